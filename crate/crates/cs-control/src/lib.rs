//! Sparse Fourier-domain control signal design by compressive sampling.
//!
//! This crate designs finite-horizon tracking controls for a stable
//! continuous-time LTI plant by optimizing the Fourier coefficients of the
//! input over a band-limited periodic subspace. Two designs are provided:
//! the conventional closed-form ℓ²-regularized least squares on the full
//! sampled data, and a compressive-sampling design that randomly decimates
//! the sample grid and solves an ℓ¹-ℓ² problem with FISTA to obtain a sparse
//! coefficient vector. Restricted-isometry analysis converts the solver
//! residuals into certified tracking-error bounds.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release -p cs-control --example l1l2_design
//! ```

pub mod error;
pub mod experiment;
pub mod lti;
pub mod rip;
pub mod sensing;
pub mod signals;
pub mod solvers;

pub use error::{Error, Result};
