//! Recovery of low-rank positive semidefinite matrices from rank-one
//! quadratic measurements `z_i = a_i' X a_i`, where a fraction of the
//! measurements may be corrupted by outliers of arbitrary magnitude and all
//! of them by bounded noise.
//!
//! The crate provides:
//!
//! * [`linalg`] — dense symmetric/Hermitian linear algebra: the measurement
//!   operator and its adjoint, a cyclic Jacobi eigensolver, and the
//!   projections (PSD cone, rank-r, Toeplitz subspace) the solvers compose.
//! * [`model`] — seeded generation of ground truths, Gaussian sensing
//!   ensembles, and the corruption model `z = A(X0) + beta + w`.
//! * [`solvers`] — spectral initialization, l1 subgradient descent on the
//!   factored iterate, the Wirtinger-flow l2 baseline, and projected
//!   subgradient solvers for the convex program (plain PSD and
//!   Toeplitz-constrained variants).
//! * [`harness`] — Monte-Carlo phase-transition sweeps, MSE-vs-m curves,
//!   and empirical restricted-isometry probes, with CSV/PGM/JSON output.
//!
//! All randomness is counter-based and derived from explicit 64-bit seeds
//! ([`rng`]), so every experiment replays bit for bit.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use num_complex;
pub use scalar::Scalar;

/// Version string embedded in every output file and checked on read.
pub const SCHEMA_VERSION: &str = "1";
