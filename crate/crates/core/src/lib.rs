//! Truncated Karhunen-Loève expansion of random fields on tensor-product
//! spline domains.
//!
//! The covariance operator is discretized with spline trial functions
//! scaled by `1/√det DF`, so the Gramian is a Kronecker product of
//! univariate mass matrices. The kernel is replaced by its spline
//! interpolant at Greville points, which separates the double integral and
//! leaves a standard symmetric eigenproblem that is solved matrix-free with
//! Lanczos.
//!
//! ```no_run
//! use std::sync::Arc;
//! use kle::{builtin, solve_spectrum, CovarianceKernel, KleOperator, LanczosConfig, SpaceSpec};
//!
//! let patch = builtin::unit_interval();
//! let kernel = Arc::new(CovarianceKernel::exponential(1.0, 1.0)?);
//! let op = KleOperator::from_specs(
//!     &patch,
//!     &[SpaceSpec::smooth(2, 64)],
//!     &[SpaceSpec::new(2, 128, 0)],
//!     kernel,
//!     1,
//! )?;
//! let spectrum = solve_spectrum(&op, &LanczosConfig::new(20))?;
//! println!("{:?}", spectrum.eigenvalues);
//! # Ok::<(), kle::KleError>(())
//! ```

pub mod cli;
pub mod eigensolver;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod reference;
pub mod splines;
pub mod tensor;

pub use eigensolver::{
    eval_eigenfunction, parameter_lattice, sample_realizations, solve_spectrum, solve_spectrum_timed,
    variance_field, KleSpectrum, LanczosConfig, ModeTable,
};
pub use error::{KleError, Result};
pub use geometry::{builtin, load_patch, GrevilleGrid, TensorPatch};
pub use kernels::{CovarianceKernel, GaussDenominator, Kernel, KernelFamily};
pub use operator::{build_spaces, KleOperator, SpaceSpec, StageTimes, DENSE_CAP};
pub use splines::{BSplineBasis, KnotVector, Side};
pub use tensor::KroneckerFactors;
