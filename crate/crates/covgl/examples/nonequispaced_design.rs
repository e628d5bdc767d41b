//! Estimation when the design points are a random subset of a finer
//! dictionary grid (fewer observation points than basis functions).

use covgl::estimator::{estimate, EstimatorConfig};
use covgl::matrix::{frobenius, SymmetricMatrix};
use covgl::simulation::{generate, make_truth, DesignSpec, ModelSpec, ScenarioConfig, SignalSpec};

fn main() -> covgl::Result<()> {
    let cfg = ScenarioConfig {
        model: ModelSpec::One {
            signal: SignalSpec::HeaviSine,
            gamma: 0.5,
        },
        sigma: 0.02,
        n: 90,
        replicates: 25,
        runs: 1,
        dictionary: covgl::dictionary::BasisSpec::Symmlet8 { size: 128 },
        design: DesignSpec::PermutedSubset {
            grid: 128,
            seed: 40,
        },
        base_seed: 11,
        estimator: EstimatorConfig::default(),
    };
    let (pts, g) = cfg.design()?;
    println!(
        "design: {} points from a {}-point grid; dictionary keeps {} of 128 columns",
        pts.len(),
        128,
        g.m()
    );
    let truth = make_truth(&cfg, &pts, &g)?;
    let samples = generate(&cfg, &truth, 0)?;
    let report = estimate(&samples, &g, &cfg.estimator)?;

    println!("solver iterations: {}", report.solver.iterations);
    println!("selected columns:  {}", report.j_hat.len());
    let err =
        SymmetricMatrix::from_symmetrized(report.sigma_refit.as_array() - truth.sigma.as_array())?;
    println!(
        "refit error:       {:.4} (Frobenius), truth norm {:.4}",
        frobenius(err.as_array()),
        frobenius(truth.sigma.as_array())
    );
    Ok(())
}
