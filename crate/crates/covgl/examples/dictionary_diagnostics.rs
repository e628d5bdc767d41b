//! Dictionary quality numbers: coherence, restricted eigenvalues and the
//! compatibility constant, for an orthonormal basis and for a redundant
//! two-basis dictionary.

use covgl::diagnostics::{
    check_assumption, kappa, mutual_coherence, rho_min_restricted, Kappa, DEFAULT_SUBSET_BUDGET,
};
use covgl::dictionary::{build_dictionary, BasisSpec, DesignPoints};

fn main() -> covgl::Result<()> {
    let specs = [
        ("haar (orthonormal)", BasisSpec::Haar { size: 16 }),
        (
            "haar + fourier (redundant)",
            BasisSpec::Mixed {
                children: vec![
                    BasisSpec::Haar { size: 16 },
                    BasisSpec::Fourier { size: 16 },
                ],
            },
        ),
    ];
    for (name, spec) in specs {
        let g = build_dictionary(&spec, &DesignPoints::full_grid(16))?;
        let theta = mutual_coherence(&g)?;
        println!("{name}: n = {}, M = {}", g.n(), g.m());
        println!("  coherence theta = {theta:.4}");
        for s in [1usize, 2, 3] {
            let rho = rho_min_restricted(&g, s, DEFAULT_SUBSET_BUDGET)?;
            let k = kappa(&g, s, 1.0, DEFAULT_SUBSET_BUDGET)?;
            let ok = check_assumption(&g, s, 1.0, DEFAULT_SUBSET_BUDGET)?;
            let kstr = match k {
                Kappa::Value(v) => format!("{v:.4}"),
                Kappa::Violated => "violated".to_string(),
            };
            println!(
                "  s = {s}: rho_min = {rho:.4}, kappa = {kstr}, coherence condition holds: {ok}"
            );
        }
    }
    Ok(())
}
