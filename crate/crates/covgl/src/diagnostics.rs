//! Dictionary-quality diagnostics: mutual coherence, restricted minimal
//! eigenvalues, the compatibility constant `kappa`, sparsity counts and
//! matrix norms.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use serde::Serialize;

use crate::dictionary::DesignMatrix;
use crate::error::{Error, Result};
use crate::matrix::{frobenius, SymmetricMatrix};

/// Default cap on the number of Gram sub-matrices visited by the
/// exhaustive restricted-eigenvalue search.
pub const DEFAULT_SUBSET_BUDGET: u128 = 2_000_000;

/// Coherence below this threshold (relative to `g_max^2`) means the Gram
/// matrix is diagonal up to the precision of the dictionary's filter
/// coefficients; every restricted eigenvalue then equals the smallest
/// squared column norm within `s * theta` (Gershgorin), far inside the
/// tolerances used here, and enumeration is skipped.
const NEGLIGIBLE_COHERENCE: f64 = 1e-12;

/// Matrix dimension above which the operator norm switches from a full
/// eigendecomposition to power iteration.
const EIGH_DIM_LIMIT: usize = 1024;

const POWER_ITER_TOL: f64 = 1e-10;

/// Largest absolute off-diagonal entry of the Gram matrix,
/// `theta(G) = max_{k != k'} |G_k'ᵀ G_k|`.
pub fn mutual_coherence(g: &DesignMatrix) -> Result<f64> {
    let m = g.m();
    if m < 2 {
        return Err(Error::invalid(
            "mutual coherence needs at least two columns",
        ));
    }
    let gram = g.matrix().t().dot(g.matrix());
    let mut theta = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            theta = theta.max(gram[[i, j]].abs().max(gram[[j, i]].abs()));
        }
    }
    Ok(theta)
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

/// Number of nonempty subsets of `{1..m}` with at most `s` elements.
pub fn subset_count(m: usize, s: usize) -> u128 {
    (1..=s)
        .map(|j| binomial(m, j))
        .fold(0u128, u128::saturating_add)
}

fn smallest_eig_of_sub(gram: &Array2<f64>, idx: &[usize]) -> Result<f64> {
    match idx.len() {
        1 => Ok(gram[[idx[0], idx[0]]]),
        2 => {
            let (a, b, d) = (
                gram[[idx[0], idx[0]]],
                gram[[idx[0], idx[1]]],
                gram[[idx[1], idx[1]]],
            );
            let tr = a + d;
            let disc = ((a - d).powi(2) + 4.0 * b * b).sqrt();
            Ok(0.5 * (tr - disc))
        }
        k => {
            let mut sub = Array2::zeros((k, k));
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    sub[[r, c]] = gram[[i, j]];
                }
            }
            let (eigs, _) = sub.eigh(UPLO::Lower)?;
            Ok(eigs[0])
        }
    }
}

/// Walks all index subsets of size 1..=s in lexicographic order, applying
/// `visit` to each.
fn for_each_subset<F: FnMut(&[usize]) -> Result<()>>(
    m: usize,
    s: usize,
    mut visit: F,
) -> Result<()> {
    for size in 1..=s.min(m) {
        let mut idx: Vec<usize> = (0..size).collect();
        'combos: loop {
            visit(&idx)?;
            // advance to the next combination: position i may grow up to m - size + i
            let mut i = size;
            while i > 0 {
                i -= 1;
                if idx[i] < m - size + i {
                    idx[i] += 1;
                    for j in (i + 1)..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    continue 'combos;
                }
            }
            break;
        }
    }
    Ok(())
}

/// Smallest eigenvalue over all Gram sub-matrices `G_Jᵀ G_J` with
/// `|J| <= s`, by exhaustive enumeration.
///
/// Refuses (rather than approximates) when the subset count exceeds
/// `budget`: the quantity is an exact infimum and a partial search would
/// silently corrupt everything derived from it.
pub fn rho_min_restricted(g: &DesignMatrix, s: usize, budget: u128) -> Result<f64> {
    let m = g.m();
    if s == 0 || s > m {
        return Err(Error::invalid(format!("s must lie in 1..={m}, got {s}")));
    }
    let subsets = subset_count(m, s);
    if subsets > budget {
        return Err(Error::BudgetExceeded { subsets, budget });
    }
    let gram = g.matrix().t().dot(g.matrix());
    let mut rho = f64::INFINITY;
    for_each_subset(m, s, |idx| {
        let e = smallest_eig_of_sub(&gram, idx)?;
        if e < rho {
            rho = e;
        }
        Ok(())
    })?;
    Ok(rho)
}

/// `rho_min(s)` with the diagonal-Gram shortcut used by [`kappa`]: when
/// the coherence is negligible the Gram matrix is diagonal to machine
/// precision and the infimum is the smallest squared column norm.
fn rho_min_for_kappa(g: &DesignMatrix, s: usize, theta: f64, budget: u128) -> Result<f64> {
    if theta <= NEGLIGIBLE_COHERENCE * g.g_max() * g.g_max() {
        Ok(g.col_norms()
            .iter()
            .map(|c| c * c)
            .fold(f64::INFINITY, f64::min))
    } else {
        rho_min_restricted(g, s, budget)
    }
}

/// The compatibility constant: `Value(sqrt(rho_min(s)^2 - c0 theta rho_max s))`
/// when the radicand is positive, otherwise `Violated`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Kappa {
    Value(f64),
    #[serde(serialize_with = "serialize_violated")]
    Violated,
}

fn serialize_violated<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("violated")
}

impl Kappa {
    pub fn value(self) -> Option<f64> {
        match self {
            Kappa::Value(v) => Some(v),
            Kappa::Violated => None,
        }
    }
}

/// `kappa_{s,c0}` from the restricted eigenvalue, coherence and the Gram
/// spectral radius.
pub fn kappa(g: &DesignMatrix, s: usize, c0: f64, budget: u128) -> Result<Kappa> {
    if c0 <= 0.0 {
        return Err(Error::invalid("c0 must be positive"));
    }
    let theta = mutual_coherence(g)?;
    let rho_min = rho_min_for_kappa(g, s, theta, budget)?;
    let kappa_sq = rho_min * rho_min - c0 * theta * g.rho_max_gram() * s as f64;
    if kappa_sq > 0.0 {
        Ok(Kappa::Value(kappa_sq.sqrt()))
    } else {
        Ok(Kappa::Violated)
    }
}

/// Coherence condition `theta(G) < rho_min(s)^2 / (c0 rho_max(GᵀG) s)`.
pub fn check_assumption(g: &DesignMatrix, s: usize, c0: f64, budget: u128) -> Result<bool> {
    if c0 <= 0.0 {
        return Err(Error::invalid("c0 must be positive"));
    }
    let theta = mutual_coherence(g)?;
    let rho_min = rho_min_for_kappa(g, s, theta, budget)?;
    Ok(theta < rho_min * rho_min / (c0 * g.rho_max_gram() * s as f64))
}

/// Number of columns with nonzero Euclidean norm (exact zero test).
pub fn sparsity(psi: &SymmetricMatrix) -> usize {
    sparsity_with_tol(psi, 0.0)
}

/// Number of columns whose Euclidean norm exceeds `tol`; `tol = 0`
/// recovers the exact count. Useful for solver outputs that are only
/// numerically zero.
pub fn sparsity_with_tol(psi: &SymmetricMatrix, tol: f64) -> usize {
    psi.as_array()
        .columns()
        .into_iter()
        .filter(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt() > tol)
        .count()
}

/// Largest absolute eigenvalue of a symmetric matrix. Uses a full
/// eigendecomposition up to dimension 1024 and power iteration (on the
/// squared matrix, tolerance 1e-10) above.
pub fn operator_norm(a: &SymmetricMatrix) -> f64 {
    let dim = a.dim();
    if dim == 0 {
        return 0.0;
    }
    if dim <= EIGH_DIM_LIMIT {
        let (eigs, _) = a
            .as_array()
            .eigh(UPLO::Lower)
            .expect("eigendecomposition of a finite symmetric matrix");
        eigs[0].abs().max(eigs[dim - 1].abs())
    } else {
        power_iteration_abs_max(a.as_array())
    }
}

fn power_iteration_abs_max(a: &Array2<f64>) -> f64 {
    let dim = a.nrows();
    // deterministic start with components in every coordinate direction
    let mut v = Array1::from_shape_fn(dim, |i| 1.0 + (i as f64 * 0.7).sin());
    let norm = crate::matrix::vec_norm(&v);
    v.mapv_inplace(|x| x / norm);
    let mut prev = 0.0f64;
    for _ in 0..100_000 {
        let av = a.dot(&v);
        let aav = a.dot(&av);
        let rayleigh = crate::matrix::vec_norm(&av);
        let next = aav.iter().map(|x| x * x).sum::<f64>().sqrt();
        if next == 0.0 {
            return rayleigh;
        }
        v = aav.mapv(|x| x / next);
        let est = rayleigh;
        if (est - prev).abs() <= POWER_ITER_TOL * est.max(1.0) {
            return est;
        }
        prev = est;
    }
    prev
}

/// Summary of every diagnostic for one dictionary.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub theta: f64,
    /// `rho_min(s)` for `s = 1..=s_max`, in order.
    pub rho_min: Vec<RhoMinEntry>,
    pub rho_max_gram: f64,
    pub kappa: Vec<KappaEntry>,
    pub subsets_enumerated: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoMinEntry {
    pub s: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaEntry {
    pub s: usize,
    pub c0: f64,
    pub kappa: Kappa,
    pub assumption_holds: bool,
}

/// Computes coherence, `rho_min(s)` for `s <= s_max` and `kappa_{s,c0}`
/// for every requested `c0`. Sub-matrices are enumerated once, up to
/// size `s_max`, with a running minimum per size; the budget covers the
/// whole walk.
pub fn diagnose(
    g: &DesignMatrix,
    s_max: usize,
    c0_values: &[f64],
    budget: u128,
) -> Result<DiagnosticsReport> {
    let m = g.m();
    if s_max == 0 || s_max > m {
        return Err(Error::invalid(format!(
            "s must lie in 1..={m}, got {s_max}"
        )));
    }
    let theta = mutual_coherence(g)?;
    let subsets = subset_count(m, s_max);
    if subsets > budget {
        return Err(Error::BudgetExceeded { subsets, budget });
    }
    let gram = g.matrix().t().dot(g.matrix());
    let mut min_by_size = vec![f64::INFINITY; s_max + 1];
    for_each_subset(m, s_max, |idx| {
        let e = smallest_eig_of_sub(&gram, idx)?;
        let size = idx.len();
        if e < min_by_size[size] {
            min_by_size[size] = e;
        }
        Ok(())
    })?;
    let mut rho_min = Vec::with_capacity(s_max);
    let mut running = f64::INFINITY;
    for (s, &size_min) in min_by_size.iter().enumerate().skip(1) {
        running = running.min(size_min);
        rho_min.push(RhoMinEntry { s, value: running });
    }
    let rho_max = g.rho_max_gram();
    let mut kappa_entries = Vec::new();
    for &c0 in c0_values {
        if c0 <= 0.0 {
            return Err(Error::invalid("c0 must be positive"));
        }
        for entry in &rho_min {
            let kappa_sq = entry.value * entry.value - c0 * theta * rho_max * entry.s as f64;
            let kappa = if kappa_sq > 0.0 {
                Kappa::Value(kappa_sq.sqrt())
            } else {
                Kappa::Violated
            };
            let assumption_holds =
                theta < entry.value * entry.value / (c0 * rho_max * entry.s as f64);
            kappa_entries.push(KappaEntry {
                s: entry.s,
                c0,
                kappa,
                assumption_holds,
            });
        }
    }
    Ok(DiagnosticsReport {
        theta,
        rho_min,
        rho_max_gram: rho_max,
        kappa: kappa_entries,
        subsets_enumerated: subsets,
    })
}

/// Frobenius norm of a symmetric matrix, exposed next to
/// [`operator_norm`] for the usual norm comparisons.
pub fn frobenius_norm(a: &SymmetricMatrix) -> f64 {
    frobenius(a.as_array())
}
