//! Real symmetric matrix wrapper and small dense-matrix helpers.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Relative tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// A square real matrix that is symmetric within [`SYMMETRY_TOL`]
/// (relative to `1 + ‖A‖_F`). Used for sample covariances, true
/// covariances and their estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    data: Array2<f64>,
}

impl SymmetricMatrix {
    /// Wraps a matrix, verifying squareness, finiteness and symmetry.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::dims(format!(
                "expected a square matrix, got {r}x{c}"
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let scale = 1.0 + frobenius(&data);
        let mut asym = 0.0f64;
        for i in 0..r {
            for j in (i + 1)..r {
                asym += (data[[i, j]] - data[[j, i]]).powi(2);
            }
        }
        let asym = (2.0 * asym).sqrt();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::invalid(format!(
                "matrix is not symmetric: ‖A - Aᵀ‖_F = {asym:.3e} exceeds {:.3e}",
                SYMMETRY_TOL * scale
            )));
        }
        Ok(Self { data })
    }

    /// Wraps `(A + Aᵀ)/2`; accepts any square finite matrix.
    pub fn from_symmetrized(data: Array2<f64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::dims(format!(
                "expected a square matrix, got {r}x{c}"
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let sym = (&data + &data.t()) * 0.5;
        Ok(Self { data: sym })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }
}

/// Frobenius norm.
pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean norms of every column.
pub fn column_norms(a: &Array2<f64>) -> Vec<f64> {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect()
}

pub fn vec_norm(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
