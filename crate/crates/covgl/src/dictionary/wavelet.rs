//! Periodized orthogonal wavelet filter banks.
//!
//! The discrete transform operates on dyadic-length vectors with circular
//! convolution, decomposing down to a single scaling coefficient. Because
//! every analysis step is an orthogonal map (the filters form a quadrature
//! mirror pair), the full transform is an orthogonal matrix and its inverse
//! is the transpose.
//!
//! Coefficient layout after a full decomposition of length `m = 2^L`:
//! `[scaling | detail level L | detail level L-1 | ... | detail level 1]`
//! where level 1 is the finest scale (`m/2` coefficients, stored last).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

static HAAR: [f64; 2] = [SQRT_HALF, SQRT_HALF];

// Least-asymmetric Daubechies lowpass filter with 8 vanishing moments
// (16 taps), in synthesis orientation.
#[allow(clippy::excessive_precision)]
static SYMMLET8: [f64; 16] = [
    0.0018899503327594609,
    -0.00030292051472413308,
    -0.014952258337048231,
    0.0038087520138906151,
    0.049137179673607506,
    -0.027219029917056003,
    -0.051945838107709037,
    0.36444189483533915,
    0.77718575170052351,
    0.48135965125837221,
    -0.061273359067658524,
    -0.14329423835080971,
    0.0076074873249176054,
    0.031695087811492981,
    -0.00054213233179114812,
    -0.0033824159510061256,
];

/// Orthonormal wavelet family with published filter coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Haar,
    Symmlet8,
}

impl WaveletFamily {
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &HAAR,
            WaveletFamily::Symmlet8 => &SYMMLET8,
        }
    }
}

/// Highpass filter from the quadrature mirror relation
/// `g[j] = (-1)^j h[F-1-j]`.
fn qmf_highpass(h: &[f64]) -> Vec<f64> {
    let f = h.len();
    (0..f)
        .map(|j| {
            if j.is_multiple_of(2) {
                h[f - 1 - j]
            } else {
                -h[f - 1 - j]
            }
        })
        .collect()
}

/// One periodized analysis step: returns (approximation, detail) halves.
pub fn analysis_step(x: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = x.len();
    debug_assert!(len >= 2 && len.is_multiple_of(2));
    let g = qmf_highpass(h);
    let half = len / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (j, &hj) in h.iter().enumerate() {
            let idx = (2 * k + j) % len;
            a += hj * x[idx];
            d += g[j] * x[idx];
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

/// One periodized synthesis step, the transpose of [`analysis_step`].
fn synthesis_step(approx: &[f64], detail: &[f64], h: &[f64]) -> Vec<f64> {
    let half = approx.len();
    let len = 2 * half;
    let g = qmf_highpass(h);
    let mut x = vec![0.0; len];
    for k in 0..half {
        for (j, &hj) in h.iter().enumerate() {
            let idx = (2 * k + j) % len;
            x[idx] += hj * approx[k] + g[j] * detail[k];
        }
    }
    x
}

/// Full-depth forward transform of a dyadic-length slice.
pub fn forward_transform(x: &[f64], family: WaveletFamily) -> Vec<f64> {
    let h = family.lowpass();
    let mut approx = x.to_vec();
    let mut details: Vec<Vec<f64>> = Vec::new();
    while approx.len() > 1 {
        let (a, d) = analysis_step(&approx, h);
        details.push(d);
        approx = a;
    }
    let mut out = approx;
    for d in details.into_iter().rev() {
        out.extend(d);
    }
    out
}

/// Full-depth inverse transform (synthesis) of a coefficient vector.
pub fn inverse_transform(coeffs: &[f64], family: WaveletFamily) -> Vec<f64> {
    let h = family.lowpass();
    let len = coeffs.len();
    let mut approx = vec![coeffs[0]];
    let mut pos = 1;
    while pos < len {
        let detail = &coeffs[pos..pos + approx.len()];
        pos += approx.len();
        approx = synthesis_step(&approx, detail, h);
    }
    approx
}

/// The `m x m` orthonormal synthesis matrix: column `k` is the inverse
/// transform of the `k`-th unit coefficient vector. `m` must be a power
/// of two.
pub fn synthesis_matrix(m: usize, family: WaveletFamily) -> Array2<f64> {
    debug_assert!(m.is_power_of_two());
    let mut g = Array2::zeros((m, m));
    let mut e = vec![0.0; m];
    for k in 0..m {
        e[k] = 1.0;
        let col = inverse_transform(&e, family);
        e[k] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            g[[i, k]] = v;
        }
    }
    g
}
