//! Generative models, ground truth, theory constants and the Monte Carlo
//! experiment harness.

mod signals;

pub use signals::{blocks, heavisine, test_signal, SignalSpec};

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, LeastSquaresSvd, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{kappa, operator_norm, Kappa};
use crate::dictionary::{BasisSpec, DesignMatrix, DesignPoints};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig, SampleSet};
use crate::matrix::{frobenius, vec_norm, SymmetricMatrix};

/// Relative cutoff defining the active set of a signal's dictionary
/// coefficients.
pub const SUPPORT_REL_THRESHOLD: f64 = 1e-8;

/// RNG substream roles; combined with the replicate index so parallel and
/// sequential runs draw identical samples.
const ROLE_COEFFICIENTS: u64 = 0;
const ROLE_NOISE: u64 = 1;
const ROLE_COUNT: u64 = 2;

/// Process model: one or two random-amplitude signal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    One {
        signal: SignalSpec,
        gamma: f64,
    },
    Two {
        signal1: SignalSpec,
        gamma1: f64,
        signal2: SignalSpec,
        gamma2: f64,
    },
}

/// Where the design points come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum DesignSpec {
    /// `t_j = j/n`, `j = 1..n`.
    Equispaced,
    /// The first `n` elements of a seeded permutation of the canonical
    /// grid `{k/grid}`, sorted increasingly.
    PermutedSubset { grid: usize, seed: u64 },
}

/// Full description of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub model: ModelSpec,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Number of design points.
    pub n: usize,
    /// Observations drawn per experiment.
    pub replicates: usize,
    /// Monte Carlo repetitions of the whole experiment.
    pub runs: usize,
    pub dictionary: BasisSpec,
    #[serde(flatten)]
    pub design: DesignSpec,
    pub base_seed: u64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma < 0.0 {
            return Err(Error::invalid("sigma must be nonnegative"));
        }
        if self.n == 0 || self.replicates == 0 || self.runs == 0 {
            return Err(Error::invalid("n, replicates and runs must be positive"));
        }
        if let ModelSpec::Two { gamma1, gamma2, .. } = self.model {
            if gamma1 <= gamma2 || !gamma1.is_finite() {
                return Err(Error::invalid("model two requires gamma1 > gamma2"));
            }
        }
        if let DesignSpec::PermutedSubset { grid, .. } = self.design {
            if self.n > grid {
                return Err(Error::invalid(
                    "cannot draw more design points than the grid holds",
                ));
            }
        }
        self.dictionary.validate()?;
        self.estimator.validate()
    }

    /// Materialises the design points and the dictionary evaluated on
    /// them. Basis functions that vanish at every design point are
    /// dropped: a sparse design over fine-scale wavelets produces such
    /// columns structurally, and they contribute nothing to the fit.
    pub fn design(&self) -> Result<(DesignPoints, DesignMatrix)> {
        let pts = self.design_points()?;
        let (g, _kept) = crate::dictionary::build_dictionary_pruned(&self.dictionary, &pts)?;
        Ok((pts, g))
    }

    /// Materialises the design points.
    pub fn design_points(&self) -> Result<DesignPoints> {
        self.validate()?;
        match self.design {
            DesignSpec::Equispaced => Ok(DesignPoints::full_grid(self.n)),
            DesignSpec::PermutedSubset { grid, seed } => {
                let mut order: Vec<usize> = (1..=grid).collect();
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                // Fisher-Yates
                for i in (1..order.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    order.swap(i, j);
                }
                DesignPoints::from_grid_indices(order[..self.n].to_vec(), grid)
            }
        }
    }
}

/// Ground truth for one scenario: unit-norm signal vectors at the design
/// points, the covariance, dictionary coefficients and their active set,
/// and the noise-inflated refit target.
#[derive(Debug, Clone)]
pub struct TruthBundle {
    pub f1: Array1<f64>,
    pub f2: Option<Array1<f64>>,
    pub sigma: SymmetricMatrix,
    pub beta1: Array1<f64>,
    pub beta2: Option<Array1<f64>>,
    /// Active dictionary columns (0-based, sorted).
    pub j_star: Vec<usize>,
    pub s_star: usize,
    pub sigma_j_star: SymmetricMatrix,
    /// Operator norm of the noise covariance, `sigma^2` for white noise.
    pub sigma_noise_norm: f64,
}

fn sample_signal(
    spec: &SignalSpec,
    pts: &DesignPoints,
    design: &DesignSpec,
) -> Result<Array1<f64>> {
    match spec {
        SignalSpec::Custom(values) => {
            let expected = match design {
                DesignSpec::Equispaced => pts.len(),
                DesignSpec::PermutedSubset { grid, .. } => *grid,
            };
            if values.len() != expected {
                return Err(Error::invalid(format!(
                    "custom signal must have {expected} samples on the canonical grid, got {}",
                    values.len()
                )));
            }
            match design {
                DesignSpec::Equispaced => Ok(Array1::from_vec(values.clone())),
                DesignSpec::PermutedSubset { grid, .. } => {
                    let rows: Vec<f64> = pts
                        .points()
                        .iter()
                        .map(|&t| values[(t * *grid as f64).round() as usize - 1])
                        .collect();
                    Ok(Array1::from_vec(rows))
                }
            }
        }
        named => {
            let vals: Result<Vec<f64>> = pts
                .points()
                .iter()
                .map(|&t| test_signal(named, t))
                .collect();
            Ok(Array1::from_vec(vals?))
        }
    }
}

fn normalize(mut v: Array1<f64>, what: &str) -> Result<Array1<f64>> {
    let norm = vec_norm(&v);
    if norm == 0.0 {
        return Err(Error::invalid(format!(
            "{what} vanishes at every design point"
        )));
    }
    v.mapv_inplace(|x| x / norm);
    Ok(v)
}

/// Minimum-norm least-squares dictionary coefficients of a signal vector.
fn dictionary_coefficients(g: &DesignMatrix, f: &Array1<f64>) -> Result<Array1<f64>> {
    let sol = g
        .matrix()
        .least_squares(f)
        .map_err(crate::error::Error::from)?;
    Ok(sol.solution)
}

fn active_set(beta: &Array1<f64>) -> Vec<usize> {
    let max = beta.iter().fold(0.0f64, |m, &b| m.max(b.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    (0..beta.len())
        .filter(|&k| beta[k].abs() > SUPPORT_REL_THRESHOLD * max)
        .collect()
}

/// Orthogonal projector onto the span of the selected columns, through a
/// rank-revealing eigendecomposition of the Gram matrix. Falls back to
/// the pseudo-inverse when the Gram matrix is rank deficient, which
/// happens whenever the active set outgrows the number of design points.
fn projector_onto(g: &DesignMatrix, j: &[usize]) -> Result<Array2<f64>> {
    let gj = g.matrix().select(Axis(1), j);
    let gram = gj.t().dot(&gj);
    let (eigs, q) = gram.eigh(UPLO::Lower)?;
    let max_eig = eigs[eigs.len() - 1].max(0.0);
    let tol = max_eig * 1e-12;
    let inv_eigs = eigs.mapv(|e| if e > tol { 1.0 / e } else { 0.0 });
    let pinv = {
        let scaled = &q * &inv_eigs.insert_axis(Axis(0));
        scaled.dot(&q.t())
    };
    Ok(gj.dot(&pinv).dot(&gj.t()))
}

/// Builds the ground truth for a scenario at the given design.
pub fn make_truth(
    cfg: &ScenarioConfig,
    pts: &DesignPoints,
    g: &DesignMatrix,
) -> Result<TruthBundle> {
    cfg.validate()?;
    let n = pts.len();
    if g.n() != n {
        return Err(Error::dims(
            "design matrix does not match the design points",
        ));
    }

    let (f1, f2, sigma) = match &cfg.model {
        ModelSpec::One { signal, gamma } => {
            let f = normalize(sample_signal(signal, pts, &cfg.design)?, "the signal")?;
            let sig = Array2::from_shape_fn((n, n), |(i, j)| gamma * gamma * f[i] * f[j]);
            (f, None, sig)
        }
        ModelSpec::Two {
            signal1,
            gamma1,
            signal2,
            gamma2,
        } => {
            let f1 = normalize(
                sample_signal(signal1, pts, &cfg.design)?,
                "the first signal",
            )?;
            let raw2 = sample_signal(signal2, pts, &cfg.design)?;
            // Gram-Schmidt against f1, then renormalise
            let proj = f1.dot(&raw2);
            let f2 = normalize(&raw2 - &(&f1 * proj), "the orthogonalised second signal")?;
            let sig = Array2::from_shape_fn((n, n), |(i, j)| {
                gamma1 * gamma1 * f1[i] * f1[j] + gamma2 * gamma2 * f2[i] * f2[j]
            });
            (f1, Some(f2), sig)
        }
    };

    let beta1 = dictionary_coefficients(g, &f1)?;
    let beta2 = f2
        .as_ref()
        .map(|f| dictionary_coefficients(g, f))
        .transpose()?;
    let mut j_star = active_set(&beta1);
    if let Some(b2) = &beta2 {
        let mut extra = active_set(b2);
        j_star.append(&mut extra);
        j_star.sort_unstable();
        j_star.dedup();
    }
    if j_star.is_empty() {
        return Err(Error::invalid("the true active set is empty"));
    }

    let sigma_noise_norm = cfg.sigma * cfg.sigma;
    let sigma_j_star = if cfg.sigma == 0.0 {
        SymmetricMatrix::from_symmetrized(sigma.clone())?
    } else {
        let p = projector_onto(g, &j_star)?;
        SymmetricMatrix::from_symmetrized(&sigma + &(p * sigma_noise_norm))?
    };

    Ok(TruthBundle {
        s_star: j_star.len(),
        f1,
        f2,
        sigma: SymmetricMatrix::from_symmetrized(sigma)?,
        beta1,
        beta2,
        j_star,
        sigma_j_star,
        sigma_noise_norm,
    })
}

fn substream_rng(base_seed: u64, replicate: u64, role: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(base_seed);
    rng.set_stream(replicate.wrapping_mul(ROLE_COUNT).wrapping_add(role));
    rng
}

/// Draws one replicate's noisy sample matrix. Sampling is keyed by
/// `(base_seed, replicate_index, role)` substreams, so any execution
/// order reproduces identical data.
pub fn generate(
    cfg: &ScenarioConfig,
    truth: &TruthBundle,
    replicate_index: usize,
) -> Result<SampleSet> {
    let n = truth.f1.len();
    let reps = cfg.replicates;
    let mut coeff_rng = substream_rng(cfg.base_seed, replicate_index as u64, ROLE_COEFFICIENTS);
    let mut noise_rng = substream_rng(cfg.base_seed, replicate_index as u64, ROLE_NOISE);

    let mut x = Array2::zeros((reps, n));
    match (&cfg.model, &truth.f2) {
        (ModelSpec::One { gamma, .. }, _) => {
            for i in 0..reps {
                let a: f64 = gamma * coeff_rng.sample::<f64, _>(StandardNormal);
                for j in 0..n {
                    x[[i, j]] = a * truth.f1[j];
                }
            }
        }
        (ModelSpec::Two { gamma1, gamma2, .. }, Some(f2)) => {
            for i in 0..reps {
                let a1: f64 = gamma1 * coeff_rng.sample::<f64, _>(StandardNormal);
                let a2: f64 = gamma2 * coeff_rng.sample::<f64, _>(StandardNormal);
                for j in 0..n {
                    x[[i, j]] = a1 * truth.f1[j] + a2 * f2[j];
                }
            }
        }
        _ => unreachable!("model two always carries f2"),
    }
    if cfg.sigma > 0.0 {
        for i in 0..reps {
            for j in 0..n {
                let e: f64 = noise_rng.sample(StandardNormal);
                x[[i, j]] += cfg.sigma * e;
            }
        }
    }
    SampleSet::new(x)
}

/// The oracle constants from the consistency analysis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryConstants {
    pub c_eps: f64,
    pub c0: f64,
    pub c1: f64,
}

/// `C(eps) = 8 eps/(1+eps) (1+2/eps)^2`.
pub fn c_of_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    Ok(8.0 * epsilon / (1.0 + epsilon) * (1.0 + 2.0 / epsilon).powi(2))
}

/// Evaluates the oracle constants at sparsity `s`, using the noiseless
/// sample covariance `S` (available in simulations only) for the variance
/// term `(8/n) ‖S - Sigma‖_F^2`.
///
/// The compatibility constant is computed at `c0 = 3 + 4/eps`; a violated
/// coherence assumption is an error.
pub fn theory_constants(
    epsilon: f64,
    truth: &TruthBundle,
    g: &DesignMatrix,
    s_noiseless: &SymmetricMatrix,
    lambda: f64,
    s: usize,
    budget: u128,
) -> Result<TheoryConstants> {
    let c_eps = c_of_epsilon(epsilon)?;
    let c0_const = 3.0 + 4.0 / epsilon;
    let kap = match kappa(g, s, c0_const, budget)? {
        Kappa::Value(v) => v,
        Kappa::Violated => {
            return Err(Error::invalid(format!(
                "coherence assumption violated at s = {s}, c0 = {c0_const}"
            )))
        }
    };
    let n = g.n() as f64;
    let bias = frobenius(&(s_noiseless.as_array() - truth.sigma.as_array()));
    let g_max2 = g.g_max() * g.g_max();
    let c0 = (1.0 + epsilon)
        * (8.0 / n * bias * bias
            + c_eps * g_max2 * g.rho_max_gram() / (kap * kap) * lambda * lambda * s as f64 / n);
    let c1 = 4.0 * (1.0 + epsilon) * (s as f64).sqrt() / (epsilon * kap) * c0.sqrt();
    Ok(TheoryConstants { c_eps, c0, c1 })
}

/// Errors and norms recorded for a single Monte Carlo replicate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReplicateMetrics {
    /// `‖Sigma_lambda - Sigma‖_F`.
    pub eafn: f64,
    /// `‖Sigma_refit - Sigma‖_2`.
    pub eaon: f64,
    /// `‖Sigma_refit - Sigma_Jstar‖_2`.
    pub eaon_star: f64,
}

/// Monte Carlo aggregates over the replicates of one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub eafn: f64,
    pub eaon: f64,
    pub eaon_star: f64,
    pub per_replicate: Vec<ReplicateMetrics>,
    pub runs: usize,
    /// Substream identifiers, one per replicate.
    pub seeds: Vec<u64>,
}

fn replicate_metrics(
    cfg: &ScenarioConfig,
    truth: &TruthBundle,
    g: &DesignMatrix,
    p: usize,
) -> Result<ReplicateMetrics> {
    let x = generate(cfg, truth, p)?;
    let report = estimate(&x, g, &cfg.estimator)?;
    let diff_l = report.sigma_lambda.as_array() - truth.sigma.as_array();
    let eafn = frobenius(&diff_l);
    let diff_j =
        SymmetricMatrix::from_symmetrized(report.sigma_refit.as_array() - truth.sigma.as_array())?;
    let eaon = operator_norm(&diff_j);
    let diff_js = SymmetricMatrix::from_symmetrized(
        report.sigma_refit.as_array() - truth.sigma_j_star.as_array(),
    )?;
    let eaon_star = operator_norm(&diff_js);
    Ok(ReplicateMetrics {
        eafn,
        eaon,
        eaon_star,
    })
}

/// Runs the scenario's `runs` replicates (in parallel) and averages the
/// three error norms. Aggregation happens in replicate order, so the
/// summary is identical however the replicates were scheduled; a failing
/// replicate aborts the whole experiment.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<MetricsSummary> {
    cfg.validate()?;
    let (pts, g) = cfg.design()?;
    let truth = make_truth(cfg, &pts, &g)?;
    run_experiment_with(cfg, &g, &truth)
}

/// As [`run_experiment`] with the design and truth already built.
pub fn run_experiment_with(
    cfg: &ScenarioConfig,
    g: &DesignMatrix,
    truth: &TruthBundle,
) -> Result<MetricsSummary> {
    let results: Vec<Result<ReplicateMetrics>> = (0..cfg.runs)
        .into_par_iter()
        .map(|p| {
            replicate_metrics(cfg, truth, g, p).map_err(|e| Error::Replicate {
                replicate: p,
                source: Box::new(e),
            })
        })
        .collect();
    let mut per_replicate = Vec::with_capacity(cfg.runs);
    for r in results {
        per_replicate.push(r?);
    }
    let p = cfg.runs as f64;
    let eafn = per_replicate.iter().map(|r| r.eafn).sum::<f64>() / p;
    let eaon = per_replicate.iter().map(|r| r.eaon).sum::<f64>() / p;
    let eaon_star = per_replicate.iter().map(|r| r.eaon_star).sum::<f64>() / p;
    let seeds = (0..cfg.runs as u64)
        .map(|r| r.wrapping_mul(ROLE_COUNT))
        .collect();
    Ok(MetricsSummary {
        eafn,
        eaon,
        eaon_star,
        per_replicate,
        runs: cfg.runs,
        seeds,
    })
}

/// Runs the scenario once per design size in `ns`, reusing the same
/// permutation seed so the designs are nested the way a fixed random
/// permutation prescribes.
pub fn run_sweep(cfg: &ScenarioConfig, ns: &[usize]) -> Result<Vec<(usize, MetricsSummary)>> {
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut c = cfg.clone();
        c.n = n;
        let summary = run_experiment(&c)?;
        out.push((n, summary));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::build_dictionary;
    use crate::estimator::{LambdaRule, SolveMode};
    use approx::assert_abs_diff_eq;

    fn model_one_scenario() -> ScenarioConfig {
        ScenarioConfig {
            model: ModelSpec::One {
                signal: SignalSpec::HeaviSine,
                gamma: 0.5,
            },
            sigma: 0.1,
            n: 32,
            replicates: 10,
            runs: 2,
            dictionary: BasisSpec::Symmlet8 { size: 32 },
            design: DesignSpec::Equispaced,
            base_seed: 7,
            estimator: EstimatorConfig {
                mode: SolveMode::Unconstrained,
                ..EstimatorConfig::default()
            },
        }
    }

    #[test]
    fn truth_on_orthonormal_design() {
        let cfg = model_one_scenario();
        let pts = cfg.design_points().unwrap();
        let g = build_dictionary(&cfg.dictionary, &pts).unwrap();
        let truth = make_truth(&cfg, &pts, &g).unwrap();
        assert_abs_diff_eq!(vec_norm(&truth.f1), 1.0, epsilon = 1e-12);
        // Sigma = gamma^2 f fᵀ
        let f = &truth.f1;
        for i in 0..cfg.n {
            for j in 0..cfg.n {
                assert_abs_diff_eq!(
                    truth.sigma.as_array()[[i, j]],
                    0.25 * f[i] * f[j],
                    epsilon = 1e-10
                );
            }
        }
        // operator norm of Sigma_Jstar is gamma^2 + sigma^2 when the
        // signal lies in the span of the active columns
        assert_abs_diff_eq!(
            operator_norm(&truth.sigma_j_star),
            0.25 + 0.01,
            epsilon = 1e-6
        );
        assert_eq!(truth.s_star, truth.j_star.len());
    }

    #[test]
    fn truth_with_zero_noise_keeps_sigma() {
        let mut cfg = model_one_scenario();
        cfg.sigma = 0.0;
        let pts = cfg.design_points().unwrap();
        let g = build_dictionary(&cfg.dictionary, &pts).unwrap();
        let truth = make_truth(&cfg, &pts, &g).unwrap();
        assert!(frobenius(&(truth.sigma_j_star.as_array() - truth.sigma.as_array())) < 1e-14);
    }

    #[test]
    fn model_two_truth_is_orthonormal() {
        let cfg = ScenarioConfig {
            model: ModelSpec::Two {
                signal1: SignalSpec::Blocks,
                gamma1: 0.5,
                signal2: SignalSpec::HeaviSine,
                gamma2: 0.2,
            },
            sigma: 0.05,
            n: 32,
            replicates: 8,
            runs: 1,
            dictionary: BasisSpec::Haar { size: 32 },
            design: DesignSpec::Equispaced,
            base_seed: 3,
            estimator: EstimatorConfig::default(),
        };
        let pts = cfg.design_points().unwrap();
        let g = build_dictionary(&cfg.dictionary, &pts).unwrap();
        let truth = make_truth(&cfg, &pts, &g).unwrap();
        let f2 = truth.f2.as_ref().unwrap();
        assert_abs_diff_eq!(vec_norm(&truth.f1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vec_norm(f2), 1.0, epsilon = 1e-12);
        assert!(truth.f1.dot(f2).abs() < 1e-10);
    }

    #[test]
    fn gamma_ordering_is_enforced() {
        let cfg = ScenarioConfig {
            model: ModelSpec::Two {
                signal1: SignalSpec::Blocks,
                gamma1: 0.2,
                signal2: SignalSpec::HeaviSine,
                gamma2: 0.5,
            },
            sigma: 0.05,
            n: 16,
            replicates: 4,
            runs: 1,
            dictionary: BasisSpec::Haar { size: 16 },
            design: DesignSpec::Equispaced,
            base_seed: 3,
            estimator: EstimatorConfig::default(),
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn generate_is_deterministic_and_rank_one_when_noiseless() {
        let mut cfg = model_one_scenario();
        cfg.sigma = 0.0;
        let pts = cfg.design_points().unwrap();
        let g = build_dictionary(&cfg.dictionary, &pts).unwrap();
        let truth = make_truth(&cfg, &pts, &g).unwrap();
        let a = generate(&cfg, &truth, 3).unwrap();
        let b = generate(&cfg, &truth, 3).unwrap();
        assert!(a
            .as_array()
            .iter()
            .zip(b.as_array().iter())
            .all(|(x, y)| x == y));
        let c = generate(&cfg, &truth, 4).unwrap();
        assert!(a
            .as_array()
            .iter()
            .zip(c.as_array().iter())
            .any(|(x, y)| x != y));
        // every noiseless row is proportional to f1
        for row in a.as_array().rows() {
            let r = Array1::from_vec(row.to_vec());
            let coef = r.dot(&truth.f1);
            assert!(vec_norm(&(&r - &(&truth.f1 * coef))) < 1e-12);
        }
    }

    #[test]
    fn pure_noise_second_moments_match_identity() {
        let cfg = ScenarioConfig {
            model: ModelSpec::One {
                signal: SignalSpec::HeaviSine,
                gamma: 0.0,
            },
            sigma: 1.0,
            n: 8,
            replicates: 10_000,
            runs: 1,
            dictionary: BasisSpec::Haar { size: 8 },
            design: DesignSpec::Equispaced,
            base_seed: 11,
            estimator: EstimatorConfig::default(),
        };
        let pts = cfg.design_points().unwrap();
        let g = build_dictionary(&cfg.dictionary, &pts).unwrap();
        let truth = make_truth(&cfg, &pts, &g).unwrap();
        let x = generate(&cfg, &truth, 0).unwrap();
        let s = crate::estimator::empirical_covariance(&x, false);
        let dev = operator_norm(
            &SymmetricMatrix::from_symmetrized(s.as_array() - &Array2::<f64>::eye(8)).unwrap(),
        );
        assert!(dev < 0.12, "law-of-large-numbers deviation {dev}");
    }

    #[test]
    fn theory_constant_examples() {
        assert_abs_diff_eq!(c_of_epsilon(2.0).unwrap(), 64.0 / 3.0, epsilon = 1e-12);
        assert!(c_of_epsilon(0.0).is_err());

        let cfg = model_one_scenario();
        let pts = cfg.design_points().unwrap();
        let g = build_dictionary(&cfg.dictionary, &pts).unwrap();
        let truth = make_truth(&cfg, &pts, &g).unwrap();

        // zero bias and lambda = 0 collapse both constants
        let tc =
            theory_constants(2.0, &truth, &g, &truth.sigma, 0.0, truth.s_star, 1 << 20).unwrap();
        assert_abs_diff_eq!(tc.c0, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(tc.c1, 0.0, epsilon = 1e-18);

        // orthonormal design: kappa = 1, g_max = rho_max = 1, so C0
        // reduces to the explicit expression
        let lambda = 0.3;
        let s = truth.s_star;
        let tc = theory_constants(1.5, &truth, &g, &truth.sigma, lambda, s, 1 << 20).unwrap();
        let expect =
            (1.0 + 1.5) * (c_of_epsilon(1.5).unwrap() * lambda * lambda * s as f64 / cfg.n as f64);
        assert_abs_diff_eq!(tc.c0, expect, epsilon = 1e-9 * expect.max(1.0));
    }

    #[test]
    fn experiment_is_deterministic_and_collapse_consistent() {
        let mut cfg = model_one_scenario();
        cfg.sigma = 1.0; // deep saturation: the estimator collapses to zero
        cfg.runs = 3;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.eafn.to_bits(), b.eafn.to_bits());
        assert_eq!(a.eaon.to_bits(), b.eaon.to_bits());
        assert_eq!(a.eaon_star.to_bits(), b.eaon_star.to_bits());
        // collapse identity: gamma^2, gamma^2, gamma^2 + sigma^2
        for r in &a.per_replicate {
            assert_abs_diff_eq!(r.eafn, 0.25, epsilon = 1e-9);
            assert_abs_diff_eq!(r.eaon, 0.25, epsilon = 1e-9);
            assert_abs_diff_eq!(r.eaon_star, 1.25, epsilon = 1e-6);
        }
        let mean = a.per_replicate.iter().map(|r| r.eafn).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(a.eafn, mean, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_consistency_at_large_n() {
        let cfg = ScenarioConfig {
            model: ModelSpec::One {
                signal: SignalSpec::HeaviSine,
                gamma: 0.5,
            },
            sigma: 0.0,
            n: 32,
            replicates: 10_000,
            runs: 1,
            dictionary: BasisSpec::Symmlet8 { size: 32 },
            design: DesignSpec::Equispaced,
            base_seed: 5,
            estimator: EstimatorConfig {
                mode: SolveMode::Unconstrained,
                lambda: LambdaRule::Auto,
                ..EstimatorConfig::default()
            },
        };
        let m = run_experiment(&cfg).unwrap();
        assert!(m.eafn < 0.05, "eafn {}", m.eafn);
        assert!(m.eaon < 0.05, "eaon {}", m.eaon);
        assert!(m.eaon_star < 0.05, "eaon* {}", m.eaon_star);
    }

    #[test]
    fn permuted_subset_design_is_reproducible() {
        let cfg = ScenarioConfig {
            model: ModelSpec::One {
                signal: SignalSpec::Blocks,
                gamma: 0.5,
            },
            sigma: 0.02,
            n: 20,
            replicates: 5,
            runs: 1,
            dictionary: BasisSpec::Haar { size: 32 },
            design: DesignSpec::PermutedSubset { grid: 32, seed: 99 },
            base_seed: 1,
            estimator: EstimatorConfig::default(),
        };
        let a = cfg.design_points().unwrap();
        let b = cfg.design_points().unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(a.len(), 20);
        assert!(a.points().windows(2).all(|w| w[0] < w[1]));
    }
}
