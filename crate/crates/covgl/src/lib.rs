//! Covariance estimation for noisy replicated observations of a process
//! with a sparse representation in a dictionary of basis functions.
//!
//! The estimator fits the sample covariance in a matrix regression with a
//! columnwise group penalty, selects the active dictionary columns and
//! refits on them; the refit estimate supports principal component
//! extraction in regimes where the raw sample covariance does not.
//!
//! The crate is organised around five public modules:
//!
//! * [`dictionary`] — wavelet / Fourier / custom design matrices with
//!   cached penalty weights;
//! * [`diagnostics`] — coherence, restricted eigenvalues and the
//!   compatibility constant behind the estimator's guarantees;
//! * [`estimator`] — the pipeline from samples to a refit covariance
//!   (closed-form path for orthogonal designs, a consensus-splitting
//!   solver otherwise);
//! * [`simulation`] — generative models, ground truth and the seeded
//!   Monte Carlo harness;
//! * [`io`] / [`cli`] — stable CSV/JSON formats and the `covgl` binary.
//!
//! See the crate examples for end-to-end usage of each capability.

extern crate blas_src;

pub mod cli;
pub mod diagnostics;
pub mod dictionary;
pub mod error;
pub mod estimator;
pub mod io;
pub mod matrix;
pub mod simulation;

pub use error::{Error, Result};
pub use matrix::SymmetricMatrix;
