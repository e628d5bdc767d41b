//! Full estimation pipeline on simulated noisy observations of a
//! rank-one process: automatic penalty from the data, support selection,
//! refit, and the error of each stage against the true covariance.

use covgl::diagnostics::operator_norm;
use covgl::estimator::{estimate, EstimatorConfig, SolveMode};
use covgl::matrix::{frobenius, SymmetricMatrix};
use covgl::simulation::{generate, make_truth, DesignSpec, ModelSpec, ScenarioConfig, SignalSpec};

fn main() -> covgl::Result<()> {
    let cfg = ScenarioConfig {
        model: ModelSpec::One {
            signal: SignalSpec::HeaviSine,
            gamma: 0.5,
        },
        sigma: 0.01,
        n: 256,
        replicates: 25,
        runs: 1,
        dictionary: covgl::dictionary::BasisSpec::Symmlet8 { size: 256 },
        design: DesignSpec::Equispaced,
        base_seed: 7,
        estimator: EstimatorConfig {
            mode: SolveMode::Unconstrained,
            ..EstimatorConfig::default()
        },
    };
    let (pts, g) = cfg.design()?;
    let truth = make_truth(&cfg, &pts, &g)?;
    let samples = generate(&cfg, &truth, 0)?;

    let report = estimate(&samples, &g, &cfg.estimator)?;
    println!(
        "noise sigma^2 estimate: {:.3e} (true {:.3e})",
        report.sigma2_noise_hat.unwrap(),
        cfg.sigma * cfg.sigma
    );
    println!("penalty level:          {:.4e}", report.lambda_used);
    println!(
        "selected columns:       {} of {}",
        report.j_hat.len(),
        g.m()
    );
    println!("stationarity residual:  {:.2e}", report.solver.kkt_residual);

    let err_lambda = frobenius(&(report.sigma_lambda.as_array() - truth.sigma.as_array()));
    let diff =
        SymmetricMatrix::from_symmetrized(report.sigma_refit.as_array() - truth.sigma.as_array())?;
    println!("penalized fit error:    {:.4} (Frobenius)", err_lambda);
    println!(
        "refit error:            {:.4} (operator)",
        operator_norm(&diff)
    );
    Ok(())
}
