//! Self-contained numerical kernels: nothing in here knows about antennas.
//!
//! The simulator needs exactly three nontrivial pieces of numerics, and all
//! of them sit on the hot path of channel synthesis:
//!
//! * `J0(x)` for Jakes spatial correlation,
//! * a Hermitian PSD matrix square root to color i.i.d. Gaussians,
//! * reproducible per-trial RNG streams.

mod bessel;
mod linalg;
mod rng;

pub use bessel::bessel_j0;
pub use linalg::{hermitian_eigen, hermitian_sqrt, ComplexMatrix, PSD_CLAMP_REL};
pub use rng::{complex_gaussian_vector, derive_stream, RngStream};

pub(crate) use bessel::j0_raw;
pub(crate) use rng::draw_complex_gaussian;

use thiserror::Error;

/// Errors from the numerical kernels.
#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} must be nonempty")]
    Empty { what: &'static str },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: |A - A^H| reaches {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error(
        "matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.6e} \
         below -{tolerance:.3e}"
    )]
    NotPositiveSemidefinite { min_eigenvalue: f64, tolerance: f64 },
    #[error("Jacobi eigensolver failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("dimension mismatch: {what} ({left} vs {right})")]
    DimensionMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
}
