//! Basis-function dictionaries and their design matrices.
//!
//! A dictionary of `M` basis functions evaluated at `n` design points in
//! `[0,1]` yields the `n x M` design matrix `G` with `G[j,m] = g_m(t_j)`.
//! Wavelet dictionaries are realised as the orthonormal periodized
//! synthesis matrix on the canonical grid `t_j = j/M`; for designs with
//! fewer points than `M`, rows are selected by grid index. The Fourier
//! dictionary has closed-form columns and may be evaluated anywhere.

mod wavelet;

pub use wavelet::{analysis_step, forward_transform, inverse_transform, WaveletFamily};

use ndarray::{Array2, Axis};
use ndarray_linalg::{Eigh, UPLO};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::column_norms;

/// Frobenius tolerance (per column) under which a square design counts as
/// orthogonal: `‖GᵀG - I‖_F <= ORTHOGONALITY_TOL * M`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// A dense matrix given row-by-row, used for user-supplied dictionaries.
/// Serialises as a JSON array of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CustomMatrix(pub Array2<f64>);

impl TryFrom<Vec<Vec<f64>>> for CustomMatrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> std::result::Result<Self, String> {
        if rows.is_empty() {
            return Err("custom matrix has no rows".into());
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err("custom matrix rows have inconsistent lengths".into());
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Array2::from_shape_vec((rows.len(), cols), flat)
            .map(CustomMatrix)
            .map_err(|e| e.to_string())
    }
}

impl From<CustomMatrix> for Vec<Vec<f64>> {
    fn from(m: CustomMatrix) -> Self {
        m.0.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

/// Named basis family plus its size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisSpec {
    /// Haar wavelets; `size` must be a power of two.
    Haar { size: usize },
    /// Symmlet-8 wavelets; `size` must be a power of two.
    Symmlet8 { size: usize },
    /// Real trigonometric basis, orthonormal on the equispaced grid.
    Fourier { size: usize },
    /// Horizontal concatenation of child dictionaries evaluated at the
    /// same design points.
    Mixed { children: Vec<BasisSpec> },
    /// Explicit basis matrix whose rows live on the canonical grid
    /// `t_j = j/R` for `R` = number of rows.
    Custom { matrix: CustomMatrix },
}

impl BasisSpec {
    /// Total number of dictionary columns.
    pub fn size(&self) -> usize {
        match self {
            BasisSpec::Haar { size }
            | BasisSpec::Symmlet8 { size }
            | BasisSpec::Fourier { size } => *size,
            BasisSpec::Mixed { children } => children.iter().map(|c| c.size()).sum(),
            BasisSpec::Custom { matrix } => matrix.0.ncols(),
        }
    }

    pub fn wavelet_family(&self) -> Option<WaveletFamily> {
        match self {
            BasisSpec::Haar { .. } => Some(WaveletFamily::Haar),
            BasisSpec::Symmlet8 { .. } => Some(WaveletFamily::Symmlet8),
            _ => None,
        }
    }

    /// Structural validation: wavelet sizes are powers of two, mixed
    /// dictionaries have at least two children, all sizes positive.
    pub fn validate(&self) -> Result<()> {
        match self {
            BasisSpec::Haar { size } | BasisSpec::Symmlet8 { size } => {
                if *size < 2 || !size.is_power_of_two() {
                    return Err(Error::invalid(format!(
                        "wavelet dictionary size must be a power of two >= 2, got {size}"
                    )));
                }
            }
            BasisSpec::Fourier { size } => {
                if *size == 0 {
                    return Err(Error::invalid("fourier dictionary size must be positive"));
                }
            }
            BasisSpec::Mixed { children } => {
                if children.len() < 2 {
                    return Err(Error::invalid(
                        "mixed dictionary needs at least two children",
                    ));
                }
                for c in children {
                    if matches!(c, BasisSpec::Mixed { .. }) {
                        return Err(Error::invalid("mixed dictionaries cannot be nested"));
                    }
                    c.validate()?;
                }
            }
            BasisSpec::Custom { matrix } => {
                if matrix.0.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("custom dictionary has non-finite entries"));
                }
            }
        }
        Ok(())
    }
}

/// Evaluation points in `[0,1]`, strictly increasing. Points may carry the
/// grid indices they were selected from (1-based rows of an `M x M` basis
/// matrix); indices are re-derived from the points whenever a dictionary
/// is built, so the stored form is purely a convenience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoints {
    points: Vec<f64>,
    grid_indices: Option<Vec<usize>>,
}

impl DesignPoints {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("design needs at least one point"));
        }
        if points
            .iter()
            .any(|t| !t.is_finite() || *t < 0.0 || *t > 1.0)
        {
            return Err(Error::invalid("design points must lie in [0,1]"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("design points must be strictly increasing"));
        }
        Ok(Self {
            points,
            grid_indices: None,
        })
    }

    /// The full canonical grid `t_j = j/m`, `j = 1..m`.
    ///
    /// # Panics
    /// When `m` is zero.
    pub fn full_grid(m: usize) -> Self {
        assert!(m >= 1, "grid size must be positive");
        let points = (1..=m).map(|j| j as f64 / m as f64).collect();
        Self {
            points,
            grid_indices: Some((1..=m).collect()),
        }
    }

    /// A subset of the canonical grid of size `grid`, given by 1-based
    /// indices. Indices are sorted; duplicates and out-of-range values are
    /// rejected.
    pub fn from_grid_indices(mut indices: Vec<usize>, grid: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("design needs at least one grid index"));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate grid indices"));
        }
        if indices[0] < 1 || *indices.last().unwrap() > grid {
            return Err(Error::invalid(format!(
                "grid indices must lie in 1..={grid}"
            )));
        }
        let points = indices.iter().map(|&j| j as f64 / grid as f64).collect();
        Ok(Self {
            points,
            grid_indices: Some(indices),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn grid_indices(&self) -> Option<&[usize]> {
        self.grid_indices.as_deref()
    }

    /// Maps every point onto the canonical grid of size `grid`, returning
    /// 0-based row indices. Fails if a point is not exactly of the form
    /// `j/grid`.
    fn rows_on_grid(&self, grid: usize) -> Result<Vec<usize>> {
        self.points
            .iter()
            .map(|&t| {
                let j = (t * grid as f64).round() as usize;
                if j >= 1 && j <= grid && j as f64 / grid as f64 == t {
                    Ok(j - 1)
                } else {
                    Err(Error::invalid(format!(
                        "point {t} is not on the canonical grid of size {grid}"
                    )))
                }
            })
            .collect()
    }
}

/// A design matrix with cached column norms, penalty weights and spectral
/// quantities.
///
/// Cached fields: `col_norms[k] = ‖G_k‖`, `g_max = max_k ‖G_k‖`,
/// `gamma[k] = 2 ‖G_k‖ sqrt(rho_max(G Gᵀ))`, `delta[k] = ‖G_k‖ / g_max`
/// and the largest eigenvalue of the Gram matrix (equal for `GᵀG` and
/// `G Gᵀ`). Zero columns are rejected since their weights are undefined.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    g: Array2<f64>,
    col_norms: Vec<f64>,
    g_max: f64,
    gamma: Vec<f64>,
    delta: Vec<f64>,
    rho_max: f64,
    gram_identity_err: f64,
}

impl DesignMatrix {
    /// Builds the cached form from a raw matrix.
    pub fn from_matrix(g: Array2<f64>) -> Result<Self> {
        let (n, m) = g.dim();
        if n == 0 || m == 0 {
            return Err(Error::invalid("design matrix must be non-empty"));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("design matrix has non-finite entries"));
        }
        let (gamma, delta, col_norms, g_max, rho_max) = compute_weights(&g)?;
        let gram_identity_err = if n == m {
            let gram = g.t().dot(&g);
            let mut err = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let d = gram[[i, j]] - if i == j { 1.0 } else { 0.0 };
                    err += d * d;
                }
            }
            err.sqrt()
        } else {
            f64::INFINITY
        };
        Ok(Self {
            g,
            col_norms,
            g_max,
            gamma,
            delta,
            rho_max,
            gram_identity_err,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.g
    }

    /// Number of design points (rows).
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// Dictionary size (columns).
    pub fn m(&self) -> usize {
        self.g.ncols()
    }

    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    /// Penalty weights `gamma_k = 2 ‖G_k‖ sqrt(rho_max(G Gᵀ))`.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Normalised column norms `delta_k = ‖G_k‖ / g_max`, in `(0,1]`.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Largest eigenvalue of `GᵀG`.
    pub fn rho_max_gram(&self) -> f64 {
        self.rho_max
    }

    /// Largest eigenvalue of `G Gᵀ`; the nonzero spectra coincide, so this
    /// equals [`Self::rho_max_gram`].
    pub fn rho_max_outer(&self) -> f64 {
        self.rho_max
    }

    /// True for square designs with `‖GᵀG - I‖_F <= 1e-10 * M`.
    pub fn is_orthogonal(&self) -> bool {
        self.gram_identity_err <= ORTHOGONALITY_TOL * self.m() as f64
    }

    /// Keeps only the columns in `keep` (0-based, sorted, distinct) and
    /// recomputes every cached quantity.
    pub fn subset_columns(&self, keep: &[usize]) -> Result<DesignMatrix> {
        if keep.is_empty() {
            return Err(Error::invalid("column subset must be nonempty"));
        }
        if keep.iter().any(|&k| k >= self.m()) {
            return Err(Error::invalid(format!(
                "column index out of range (dictionary has {} columns)",
                self.m()
            )));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("column subset must be sorted and distinct"));
        }
        let sub = self.g.select(Axis(1), keep);
        DesignMatrix::from_matrix(sub)
    }
}

/// Penalty weights for a raw design matrix: returns
/// `(gamma, delta, col_norms, g_max, rho_max)`.
///
/// Rejects matrices with a zero column, for which the weights are
/// undefined.
#[allow(clippy::type_complexity)]
pub fn compute_weights(g: &Array2<f64>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64, f64)> {
    let col_norms = column_norms(g);
    let g_max = col_norms.iter().cloned().fold(0.0, f64::max);
    if col_norms.contains(&0.0) {
        return Err(Error::invalid("design matrix has a zero column"));
    }
    let rho_max = largest_gram_eigenvalue(g)?;
    let sqrt_rho = rho_max.sqrt();
    let gamma = col_norms.iter().map(|&c| 2.0 * c * sqrt_rho).collect();
    let delta = col_norms.iter().map(|&c| c / g_max).collect();
    Ok((gamma, delta, col_norms, g_max, rho_max))
}

/// Largest eigenvalue of `GᵀG` (equivalently `G Gᵀ`), computed on the
/// smaller of the two Gram matrices.
fn largest_gram_eigenvalue(g: &Array2<f64>) -> Result<f64> {
    let (n, m) = g.dim();
    let gram = if n <= m { g.dot(&g.t()) } else { g.t().dot(g) };
    let (eigs, _) = gram.eigh(UPLO::Lower)?;
    Ok(eigs[eigs.len() - 1].max(0.0))
}

/// Evaluates the dictionary at the design points.
///
/// Wavelet families require the points to be the canonical grid
/// `t_j = j/M` or a subset of it; Fourier columns are evaluated in closed
/// form at arbitrary points; custom matrices are row-selected from their
/// own grid. Mixed dictionaries concatenate their children horizontally.
pub fn build_dictionary(spec: &BasisSpec, pts: &DesignPoints) -> Result<DesignMatrix> {
    spec.validate()?;
    let g = build_raw(spec, pts)?;
    DesignMatrix::from_matrix(g)
}

/// As [`build_dictionary`], but drops basis functions that vanish at
/// every design point instead of rejecting them. Sparse designs over
/// fine-scale wavelets produce such columns structurally; they carry no
/// information about the data and no meaningful penalty weight. Returns
/// the design matrix together with the retained original column indices.
pub fn build_dictionary_pruned(
    spec: &BasisSpec,
    pts: &DesignPoints,
) -> Result<(DesignMatrix, Vec<usize>)> {
    spec.validate()?;
    let g = build_raw(spec, pts)?;
    let norms = column_norms(&g);
    let kept: Vec<usize> = (0..g.ncols()).filter(|&k| norms[k] != 0.0).collect();
    if kept.is_empty() {
        return Err(Error::invalid(
            "every dictionary column vanishes on the design",
        ));
    }
    let pruned = if kept.len() == g.ncols() {
        g
    } else {
        g.select(Axis(1), &kept)
    };
    Ok((DesignMatrix::from_matrix(pruned)?, kept))
}

fn build_raw(spec: &BasisSpec, pts: &DesignPoints) -> Result<Array2<f64>> {
    match spec {
        BasisSpec::Haar { size } | BasisSpec::Symmlet8 { size } => {
            let family = spec.wavelet_family().expect("wavelet kind");
            let rows = pts.rows_on_grid(*size)?;
            let full = wavelet::synthesis_matrix(*size, family);
            Ok(full.select(Axis(0), &rows))
        }
        BasisSpec::Fourier { size } => Ok(fourier_columns(*size, pts.points())),
        BasisSpec::Mixed { children } => {
            let blocks: Vec<Array2<f64>> = children
                .iter()
                .map(|c| build_raw(c, pts))
                .collect::<Result<_>>()?;
            let n = blocks[0].nrows();
            let m: usize = blocks.iter().map(|b| b.ncols()).sum();
            let mut g = Array2::zeros((n, m));
            let mut col = 0;
            for b in blocks {
                g.slice_mut(ndarray::s![.., col..col + b.ncols()])
                    .assign(&b);
                col += b.ncols();
            }
            Ok(g)
        }
        BasisSpec::Custom { matrix } => {
            let rows = pts.rows_on_grid(matrix.0.nrows())?;
            Ok(matrix.0.select(Axis(0), &rows))
        }
    }
}

/// Real trigonometric columns at arbitrary points: the constant vector,
/// `sqrt(2/M) cos(2 pi k t)` and `sqrt(2/M) sin(2 pi k t)` for
/// `k = 1..floor((M-1)/2)`, plus the alternating column `cos(pi M t)/sqrt(M)`
/// when `M` is even. On the equispaced grid of `M` points this is the
/// orthonormal Fourier basis.
fn fourier_columns(m: usize, points: &[f64]) -> Array2<f64> {
    let n = points.len();
    let mut g = Array2::zeros((n, m));
    let scale = (2.0 / m as f64).sqrt();
    for (row, &t) in points.iter().enumerate() {
        g[[row, 0]] = 1.0 / (m as f64).sqrt();
        let mut col = 1;
        for k in 1..=((m - 1) / 2) {
            let w = 2.0 * std::f64::consts::PI * k as f64 * t;
            g[[row, col]] = scale * w.cos();
            g[[row, col + 1]] = scale * w.sin();
            col += 2;
        }
        if m.is_multiple_of(2) {
            let w = std::f64::consts::PI * m as f64 * t;
            g[[row, m - 1]] = w.cos() / (m as f64).sqrt();
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn gram_err(g: &DesignMatrix) -> f64 {
        let gram = g.matrix().t().dot(g.matrix());
        frobenius(&(&gram - &Array2::<f64>::eye(g.m())))
    }

    #[test]
    fn haar_two_matches_reference() {
        let g =
            build_dictionary(&BasisSpec::Haar { size: 2 }, &DesignPoints::full_grid(2)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = array![[s, s], [s, -s]];
        assert!(frobenius(&(g.matrix() - &expect)) < 1e-14);
        assert!(gram_err(&g) < 1e-14);
    }

    #[test]
    fn fourier_first_column_is_constant() {
        let g =
            build_dictionary(&BasisSpec::Fourier { size: 4 }, &DesignPoints::full_grid(4)).unwrap();
        for row in 0..4 {
            assert_abs_diff_eq!(g.matrix()[[row, 0]], 0.5, epsilon = 1e-15);
        }
        assert!(gram_err(&g) <= 1e-10 * 4.0);
    }

    #[test]
    fn full_grid_dictionaries_are_orthogonal() {
        for spec in [
            BasisSpec::Haar { size: 64 },
            BasisSpec::Symmlet8 { size: 64 },
            BasisSpec::Fourier { size: 63 },
            BasisSpec::Fourier { size: 64 },
        ] {
            let m = spec.size();
            let g = build_dictionary(&spec, &DesignPoints::full_grid(m)).unwrap();
            assert!(gram_err(&g) <= 1e-10 * m as f64, "{spec:?}");
            assert!(g.is_orthogonal(), "{spec:?}");
        }
    }

    #[test]
    fn mixed_concatenates_and_keeps_unit_columns() {
        let spec = BasisSpec::Mixed {
            children: vec![
                BasisSpec::Haar { size: 128 },
                BasisSpec::Fourier { size: 128 },
            ],
        };
        let g = build_dictionary(&spec, &DesignPoints::full_grid(128)).unwrap();
        assert_eq!(g.n(), 128);
        assert_eq!(g.m(), 256);
        for &c in g.col_norms() {
            assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
        }
        // two orthonormal blocks: rho_max(G Gᵀ) = 2
        assert_abs_diff_eq!(g.rho_max_outer(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn weights_match_the_formula() {
        let g = DesignMatrix::from_matrix(Array2::<f64>::eye(3).mapv(|x| 3.0 * x)).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(g.col_norms()[k], 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g.gamma()[k], 18.0, epsilon = 1e-10);
            assert_abs_diff_eq!(g.delta()[k], 1.0, epsilon = 1e-15);
        }
        let ortho =
            build_dictionary(&BasisSpec::Haar { size: 8 }, &DesignPoints::full_grid(8)).unwrap();
        for k in 0..8 {
            assert_abs_diff_eq!(ortho.gamma()[k], 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_column_rejected() {
        let mut m = Array2::<f64>::eye(3);
        m[[1, 1]] = 0.0;
        assert!(DesignMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn wavelet_requires_power_of_two_and_grid_points() {
        let bad = BasisSpec::Haar { size: 6 };
        assert!(build_dictionary(&bad, &DesignPoints::full_grid(6)).is_err());
        let off_grid = DesignPoints::new(vec![0.1, 0.3]).unwrap();
        assert!(build_dictionary(&BasisSpec::Haar { size: 8 }, &off_grid).is_err());
    }

    #[test]
    fn design_point_validation() {
        assert!(DesignPoints::new(vec![]).is_err());
        assert!(DesignPoints::new(vec![0.2, 0.2]).is_err());
        assert!(DesignPoints::new(vec![0.2, 1.2]).is_err());
        assert!(DesignPoints::from_grid_indices(vec![3, 3], 8).is_err());
        assert!(DesignPoints::from_grid_indices(vec![0], 8).is_err());
        assert!(DesignPoints::from_grid_indices(vec![9], 8).is_err());
        let p = DesignPoints::from_grid_indices(vec![8, 2], 8).unwrap();
        assert_eq!(p.grid_indices().unwrap(), &[2, 8]);
        assert_eq!(p.points(), &[0.25, 1.0]);
    }

    #[test]
    fn subset_identity_and_single_column() {
        let g = DesignMatrix::from_matrix(Array2::<f64>::eye(3)).unwrap();
        let e2 = g.subset_columns(&[1]).unwrap();
        assert_eq!(e2.matrix().column(0).to_vec(), vec![0.0, 1.0, 0.0]);
        let all = g.subset_columns(&[0, 1, 2]).unwrap();
        assert_eq!(all.matrix(), g.matrix());
        assert!(g.subset_columns(&[]).is_err());
        assert!(g.subset_columns(&[3]).is_err());
    }

    #[test]
    fn haar_subset_keeps_orthonormal_columns() {
        let g =
            build_dictionary(&BasisSpec::Haar { size: 4 }, &DesignPoints::full_grid(4)).unwrap();
        let sub = g.subset_columns(&[0, 2]).unwrap();
        let gram = sub.matrix().t().dot(sub.matrix());
        assert!(frobenius(&(&gram - &Array2::<f64>::eye(2))) < 1e-12);
    }

    #[test]
    fn row_subset_of_synthesis_matrix() {
        let full = build_dictionary(
            &BasisSpec::Symmlet8 { size: 16 },
            &DesignPoints::full_grid(16),
        )
        .unwrap();
        let pts = DesignPoints::from_grid_indices(vec![1, 5, 9, 16], 16).unwrap();
        let sub = build_dictionary(&BasisSpec::Symmlet8 { size: 16 }, &pts).unwrap();
        assert_eq!(sub.n(), 4);
        assert_eq!(sub.m(), 16);
        for (r, &j) in [1usize, 5, 9, 16].iter().enumerate() {
            let expect = full.matrix().row(j - 1);
            let got = sub.matrix().row(r);
            assert!(expect.iter().zip(got.iter()).all(|(a, b)| a == b));
        }
    }

    proptest! {
        #[test]
        fn build_is_deterministic(mshift in 1usize..5) {
            let m = 1usize << mshift;
            let spec = BasisSpec::Symmlet8 { size: m };
            let a = build_dictionary(&spec, &DesignPoints::full_grid(m)).unwrap();
            let b = build_dictionary(&spec, &DesignPoints::full_grid(m)).unwrap();
            prop_assert!(a.matrix().iter().zip(b.matrix().iter()).all(|(x, y)| x == y));
        }

        #[test]
        fn subset_composition(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let g = build_dictionary(&BasisSpec::Fourier { size: 9 }, &DesignPoints::full_grid(9)).unwrap();
            let mut first: Vec<usize> = (0..9).filter(|_| rng.gen_bool(0.7)).collect();
            if first.is_empty() { first.push(0); }
            let mut rel: Vec<usize> = (0..first.len()).filter(|_| rng.gen_bool(0.7)).collect();
            if rel.is_empty() { rel.push(0); }
            let direct: Vec<usize> = rel.iter().map(|&i| first[i]).collect();
            let two_step = g.subset_columns(&first).unwrap().subset_columns(&rel).unwrap();
            let one_step = g.subset_columns(&direct).unwrap();
            prop_assert!(two_step.matrix().iter().zip(one_step.matrix().iter()).all(|(x, y)| x == y));
        }
    }
}
