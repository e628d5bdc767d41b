//! Columnwise soft-thresholding on an orthogonal design: how the penalty
//! level sweeps columns out of the model.

use covgl::dictionary::{build_dictionary, BasisSpec, DesignPoints};
use covgl::estimator::solve_orthogonal;
use covgl::matrix::SymmetricMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};

fn main() -> covgl::Result<()> {
    let m = 16;
    let g = build_dictionary(&BasisSpec::Haar { size: m }, &DesignPoints::full_grid(m))?;

    // a symmetric "observation" with a few strong columns
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
    let mut raw = Array2::zeros((m, m));
    for k in [2usize, 5, 11] {
        let scale = rng.gen_range(1.5..3.0);
        for i in 0..m {
            raw[[i, k]] = scale * rng.gen_range(-1.0..1.0);
        }
    }
    for i in 0..m {
        for j in 0..m {
            raw[[i, j]] += 0.02 * rng.gen_range(-1.0..1.0);
        }
    }
    let s = SymmetricMatrix::from_symmetrized(raw)?;
    let y = SymmetricMatrix::from_symmetrized(g.matrix().t().dot(s.as_array()).dot(g.matrix()))?;

    println!("lambda   active columns");
    for i in 0..8 {
        let lambda = 0.2 * i as f64;
        let psi = solve_orthogonal(&y, lambda, g.gamma())?;
        let active: Vec<usize> = (0..m)
            .filter(|&k| psi.column(k).iter().any(|&v| v != 0.0))
            .collect();
        println!("{lambda:<8.2} {active:?}");
    }
    Ok(())
}
