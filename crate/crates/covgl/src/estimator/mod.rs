//! The estimation pipeline: sample covariance, noise level, penalty
//! level, the group-Lasso solve, support selection, refit and sparse PCA.

mod solver;

pub use solver::{objective_value, solve_group_lasso, SolveResult};

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};
use serde::{Deserialize, Serialize};

use crate::dictionary::{DesignMatrix, WaveletFamily};
use crate::error::{Error, Result};
use crate::matrix::{column_norms, SymmetricMatrix};

/// Gaussian consistency factor for the median absolute deviation.
pub const MAD_GAUSSIAN_FACTOR: f64 = 0.6745;

/// Condition-number ceiling for the refit Gram inverse.
pub const REFIT_COND_LIMIT: f64 = 1e12;

/// Noisy replicated observations: row `i` is the `i`-th replicate at the
/// `n` design points.
#[derive(Debug, Clone)]
pub struct SampleSet {
    samples: Array2<f64>,
}

impl SampleSet {
    pub fn new(samples: Array2<f64>) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::invalid(
                "sample set must have at least one replicate and one point",
            ));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("samples contain non-finite values"));
        }
        Ok(Self { samples })
    }

    /// Replicate count `N`.
    pub fn replicates(&self) -> usize {
        self.samples.nrows()
    }

    /// Design-point count `n`.
    pub fn points(&self) -> usize {
        self.samples.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.samples
    }
}

/// How the penalty level is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaRule {
    /// Estimate the noise variance from the data and apply the default
    /// penalty formula.
    Auto,
    /// Use the given value directly.
    Fixed(f64),
}

/// Feasible set for the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Optimise over symmetric matrices (the estimator's definition).
    Symmetric,
    /// Optimise over all square matrices; on orthogonal designs this has
    /// the columnwise soft-threshold closed form.
    Unconstrained,
}

/// How the selected support is cut out of the solved coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportRule {
    /// Keep columns with norm strictly above the given threshold.
    Epsilon(f64),
    /// Keep the head of the sorted norm sequence, cut at the largest
    /// ratio between consecutive nonzero norms.
    LCurve,
    /// Keep columns with `(delta_k / sqrt(n)) ‖Psi_k‖ > C1` for a
    /// caller-supplied constant.
    Theory(f64),
}

/// Pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub lambda: LambdaRule,
    /// The confidence exponent `delta > 1` in the default penalty formula.
    pub delta_conf: f64,
    pub mode: SolveMode,
    /// Primal stopping tolerance, relative to `1 + ‖S‖_F`.
    pub tol_primal: f64,
    /// Dual stopping tolerance, relative to `1 + ‖S‖_F`.
    pub tol_dual: f64,
    /// Certification threshold for the stationarity residual.
    pub tol_kkt: f64,
    pub max_iter: usize,
    pub support_rule: SupportRule,
    /// Subtract the sample mean before forming the covariance. Off by
    /// default: the model assumes a centred process.
    pub center: bool,
    /// Wavelet used by the noise-level estimator.
    pub mad_wavelet: WaveletFamily,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            lambda: LambdaRule::Auto,
            delta_conf: 1.1,
            mode: SolveMode::Symmetric,
            tol_primal: 1e-8,
            tol_dual: 1e-8,
            tol_kkt: 1e-6,
            max_iter: 5000,
            support_rule: SupportRule::LCurve,
            center: false,
            mad_wavelet: WaveletFamily::Symmlet8,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delta_conf <= 1.0 {
            return Err(Error::invalid("delta_conf must exceed 1"));
        }
        if self.tol_primal <= 0.0 || self.tol_dual <= 0.0 || self.tol_kkt <= 0.0 {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if let LambdaRule::Fixed(l) = self.lambda {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::invalid("lambda must be nonnegative"));
            }
        }
        if let SupportRule::Epsilon(e) = self.support_rule {
            if !e.is_finite() || e < 0.0 {
                return Err(Error::invalid("epsilon threshold must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Sample second-moment matrix `S = (1/N) sum_i x_i x_iᵀ`. With
/// `center`, the sample mean is removed first.
pub fn empirical_covariance(x: &SampleSet, center: bool) -> SymmetricMatrix {
    let n_rep = x.replicates() as f64;
    let data;
    let samples = if center {
        let mean = x.as_array().mean_axis(Axis(0)).expect("nonempty sample");
        data = x.as_array() - &mean.insert_axis(Axis(0));
        &data
    } else {
        x.as_array()
    };
    let s = samples.t().dot(samples) / n_rep;
    SymmetricMatrix::from_symmetrized(s).expect("finite square product")
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Noise-variance estimate from finest-scale wavelet detail coefficients.
///
/// Per replicate, the observation vector (truncated to its largest dyadic
/// prefix) goes through one analysis step; the replicate's scale estimate
/// is `median(|detail|) / 0.6745`, and the returned value is the square
/// of the median over replicates.
pub fn mad_noise_estimate(x: &SampleSet, wavelet: WaveletFamily) -> Result<f64> {
    let n = x.points();
    if n < 2 {
        return Err(Error::invalid(
            "noise estimation needs at least two design points",
        ));
    }
    let dyadic = if n.is_power_of_two() {
        n
    } else {
        usize::pow(2, n.ilog2())
    };
    let h = wavelet.lowpass();
    let mut per_replicate: Vec<f64> = Vec::with_capacity(x.replicates());
    for row in x.as_array().rows() {
        let head: Vec<f64> = row.iter().take(dyadic).copied().collect();
        let (_, detail) = crate::dictionary::analysis_step(&head, h);
        let mut abs: Vec<f64> = detail.iter().map(|d| d.abs()).collect();
        per_replicate.push(median(&mut abs) / MAD_GAUSSIAN_FACTOR);
    }
    let sigma = median(&mut per_replicate);
    Ok(sigma * sigma)
}

/// The default penalty level
/// `sigma2 (1 + sqrt(n/N) + sqrt(2 delta log M / N))^2` for white noise
/// with variance `sigma2`.
pub fn default_lambda(
    sigma2_noise: f64,
    n: usize,
    replicates: usize,
    m: usize,
    delta_conf: f64,
) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid(
            "the penalty formula needs a dictionary of size at least 2",
        ));
    }
    if n == 0 || replicates == 0 {
        return Err(Error::invalid("n and N must be positive"));
    }
    if delta_conf <= 1.0 {
        return Err(Error::invalid("delta_conf must exceed 1"));
    }
    if !sigma2_noise.is_finite() || sigma2_noise < 0.0 {
        return Err(Error::invalid("noise variance must be nonnegative"));
    }
    let n_f = n as f64;
    let rep = replicates as f64;
    let root = 1.0 + (n_f / rep).sqrt() + (2.0 * delta_conf * (m as f64).ln() / rep).sqrt();
    Ok(sigma2_noise * root * root)
}

/// Closed-form columnwise soft-threshold solution for orthogonal designs:
/// column `k` of `Y` is zeroed when `‖Y_k‖ <= lambda gamma_k` and scaled
/// by `1 - lambda gamma_k / ‖Y_k‖` otherwise.
pub fn solve_orthogonal(y: &SymmetricMatrix, lambda: f64, gamma: &[f64]) -> Result<Array2<f64>> {
    let m = y.dim();
    if gamma.len() != m {
        return Err(Error::dims(format!(
            "{} weights for a {m}x{m} matrix",
            gamma.len()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::invalid("lambda must be nonnegative"));
    }
    if gamma.iter().any(|&g| g <= 0.0) {
        return Err(Error::invalid("weights must be positive"));
    }
    let mut out = y.as_array().clone();
    for (k, &gk) in gamma.iter().enumerate() {
        let norm = out.column(k).iter().map(|v| v * v).sum::<f64>().sqrt();
        let thr = lambda * gk;
        if norm <= thr {
            out.column_mut(k).fill(0.0);
        } else {
            let factor = 1.0 - thr / norm;
            out.column_mut(k).mapv_inplace(|v| v * factor);
        }
    }
    Ok(out)
}

/// Stationarity residual of the unconstrained problem. With
/// `R = Gᵀ(S - G Psi Gᵀ)G`, returns the largest columnwise violation:
/// `‖R_k - lambda gamma_k Psi_k / ‖Psi_k‖‖` over active columns and
/// `max(0, ‖R_k‖ - lambda gamma_k)` over zero columns.
///
/// For symmetric-mode solutions this is a diagnostic upper bound, since
/// the symmetry constraint contributes its own multiplier.
pub fn kkt_residual(
    s_tilde: &SymmetricMatrix,
    g: &DesignMatrix,
    psi_hat: &Array2<f64>,
    lambda: f64,
    gamma: &[f64],
) -> Result<f64> {
    let m = g.m();
    if psi_hat.dim() != (m, m) {
        return Err(Error::dims(format!(
            "coefficient matrix must be {m}x{m}, got {}x{}",
            psi_hat.nrows(),
            psi_hat.ncols()
        )));
    }
    if s_tilde.dim() != g.n() || gamma.len() != m {
        return Err(Error::dims(
            "inconsistent shapes for the stationarity check",
        ));
    }
    let gmat = g.matrix();
    let resid = s_tilde.as_array() - &gmat.dot(psi_hat).dot(&gmat.t());
    let r = gmat.t().dot(&resid).dot(gmat);
    let mut worst = 0.0f64;
    for (k, &gk) in gamma.iter().enumerate() {
        let pk = psi_hat.column(k);
        let pnorm = pk.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rk = r.column(k);
        if pnorm > 0.0 {
            let scale = lambda * gk / pnorm;
            let viol = rk
                .iter()
                .zip(pk.iter())
                .map(|(rv, pv)| (rv - scale * pv).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(viol);
        } else {
            let rnorm = rk.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max((rnorm - lambda * gk).max(0.0));
        }
    }
    Ok(worst)
}

/// Applies a support rule to the column norms of a solved coefficient
/// matrix; returns sorted 0-based column indices.
pub fn select_support(
    psi_hat: &Array2<f64>,
    g: &DesignMatrix,
    rule: &SupportRule,
) -> Result<Vec<usize>> {
    let norms = column_norms(psi_hat);
    match *rule {
        SupportRule::Epsilon(eps) => {
            if !eps.is_finite() || eps < 0.0 {
                return Err(Error::invalid("epsilon threshold must be nonnegative"));
            }
            Ok((0..norms.len()).filter(|&k| norms[k] > eps).collect())
        }
        SupportRule::LCurve => Ok(lcurve_cut(&norms)),
        SupportRule::Theory(c1) => {
            let sqrt_n = (g.n() as f64).sqrt();
            Ok((0..norms.len())
                .filter(|&k| g.delta()[k] / sqrt_n * norms[k] > c1)
                .collect())
        }
    }
}

/// Sorts the nonzero norms in decreasing order and keeps everything above
/// the largest ratio between consecutive values. All-zero input selects
/// nothing; a single nonzero column is kept.
fn lcurve_cut(norms: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..norms.len()).filter(|&k| norms[k] > 0.0).collect();
    if order.is_empty() {
        return Vec::new();
    }
    order.sort_by(|&a, &b| {
        norms[b]
            .partial_cmp(&norms[a])
            .expect("finite")
            .then(a.cmp(&b))
    });
    let mut cut = order.len();
    let mut best_ratio = -1.0f64;
    for i in 0..order.len() - 1 {
        let ratio = norms[order[i]] / norms[order[i + 1]];
        if ratio > best_ratio {
            best_ratio = ratio;
            cut = i + 1;
        }
    }
    let mut keep: Vec<usize> = order[..cut].to_vec();
    keep.sort_unstable();
    keep
}

/// Unpenalised least-squares refit on the selected columns:
/// `Psi_J = (G_Jᵀ G_J)^{-1} G_Jᵀ S G_J (G_Jᵀ G_J)^{-1}` and
/// `Sigma_J = G_J Psi_J G_Jᵀ`. An empty selection refits to zero.
pub fn refit(
    s_tilde: &SymmetricMatrix,
    g: &DesignMatrix,
    j_hat: &[usize],
) -> Result<(Array2<f64>, SymmetricMatrix)> {
    let n = g.n();
    if s_tilde.dim() != n {
        return Err(Error::dims("sample covariance does not match the design"));
    }
    if j_hat.is_empty() {
        return Ok((Array2::zeros((0, 0)), SymmetricMatrix::zeros(n)));
    }
    if j_hat.iter().any(|&k| k >= g.m()) || j_hat.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "support must be sorted, distinct and in range",
        ));
    }
    let gj = g.matrix().select(Axis(1), j_hat);
    let gram = gj.t().dot(&gj);
    let (eigs, q) = gram.eigh(UPLO::Lower)?;
    let max_eig = eigs[eigs.len() - 1];
    let min_eig = eigs[0];
    let cond = if min_eig > 0.0 {
        max_eig / min_eig
    } else {
        f64::INFINITY
    };
    if cond > REFIT_COND_LIMIT || cond.is_nan() {
        return Err(Error::SingularGram {
            cond,
            limit: REFIT_COND_LIMIT,
        });
    }
    // inv(Gram) = Q diag(1/eig) Qᵀ
    let inv = {
        let inv_eigs = eigs.mapv(|e| 1.0 / e);
        let scaled = &q * &inv_eigs.insert_axis(Axis(0));
        scaled.dot(&q.t())
    };
    let mid = gj.t().dot(s_tilde.as_array()).dot(&gj);
    let psi = inv.dot(&mid).dot(&inv);
    let sigma = gj.dot(&psi).dot(&gj.t());
    Ok((psi, SymmetricMatrix::from_symmetrized(sigma)?))
}

/// Top-`k` eigenpairs in decreasing eigenvalue order. Eigenvectors have
/// unit norm, signed so the entry of largest magnitude is positive.
pub fn sparse_pca(sigma_hat: &SymmetricMatrix, k: usize) -> Result<Vec<(f64, Array1<f64>)>> {
    let n = sigma_hat.dim();
    if k > n {
        return Err(Error::invalid(format!(
            "requested {k} eigenpairs from a {n}x{n} matrix"
        )));
    }
    let (eigs, vecs) = sigma_hat.as_array().eigh(UPLO::Lower)?;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let idx = n - 1 - i;
        let mut v = vecs.column(idx).to_owned();
        let lead = v
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).expect("finite"))
            .map(|(j, _)| j)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        out.push((eigs[idx], v));
    }
    Ok(out)
}

/// Full estimation report.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub lambda_used: f64,
    /// Present when the penalty level was chosen automatically.
    pub sigma2_noise_hat: Option<f64>,
    /// `G Psi Gᵀ` symmetrised; the unconstrained coefficient matrix can
    /// carry a mild asymmetry that the covariance estimate should not.
    pub sigma_lambda: SymmetricMatrix,
    /// Selected dictionary columns, 0-based.
    pub j_hat: Vec<usize>,
    pub psi_refit: Array2<f64>,
    pub sigma_refit: SymmetricMatrix,
    /// Column norms of the solved coefficient matrix.
    pub column_norms: Vec<f64>,
    pub solver: SolveResult,
}

impl EstimateReport {
    pub fn psi_hat(&self) -> &Array2<f64> {
        &self.solver.psi_hat
    }
}

/// Runs the full pipeline: sample covariance, noise level and penalty
/// (when automatic), solve, support selection and refit.
///
/// On orthogonal designs in unconstrained mode the solve uses the exact
/// columnwise soft-threshold closed form instead of iterating.
pub fn estimate(x: &SampleSet, g: &DesignMatrix, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    if x.points() != g.n() {
        return Err(Error::dims(format!(
            "samples have {} points but the design has {} rows",
            x.points(),
            g.n()
        )));
    }
    let s_tilde = empirical_covariance(x, cfg.center);
    let (lambda, sigma2_hat) = match cfg.lambda {
        LambdaRule::Fixed(l) => (l, None),
        LambdaRule::Auto => {
            let s2 = mad_noise_estimate(x, cfg.mad_wavelet)?;
            let l = default_lambda(s2, g.n(), x.replicates(), g.m(), cfg.delta_conf)?;
            (l, Some(s2))
        }
    };

    let solver = if cfg.mode == SolveMode::Unconstrained && g.is_orthogonal() {
        let y = SymmetricMatrix::from_symmetrized(
            g.matrix().t().dot(s_tilde.as_array()).dot(g.matrix()),
        )?;
        let psi = solve_orthogonal(&y, lambda, g.gamma())?;
        let objective = objective_value(&s_tilde, g, &psi, lambda, g.gamma());
        let kkt = kkt_residual(&s_tilde, g, &psi, lambda, g.gamma())?;
        SolveResult {
            psi_hat: psi,
            objective,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            kkt_residual: kkt,
            converged: true,
        }
    } else {
        solve_group_lasso(&s_tilde, g, lambda, cfg)?
    };

    let column_norms = column_norms(&solver.psi_hat);
    let j_hat = select_support(&solver.psi_hat, g, &cfg.support_rule)?;
    let (psi_refit, sigma_refit) = refit(&s_tilde, g, &j_hat)?;
    let sigma_lambda =
        SymmetricMatrix::from_symmetrized(g.matrix().dot(&solver.psi_hat).dot(&g.matrix().t()))?;

    Ok(EstimateReport {
        lambda_used: lambda,
        sigma2_noise_hat: sigma2_hat,
        sigma_lambda,
        j_hat,
        psi_refit,
        sigma_refit,
        column_norms,
        solver,
    })
}
