//! Semi-analytic pricing of down-and-in barrier options under a
//! hyper-exponential additive model with piecewise constant parameters.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and thread-parallel Monte Carlo live in the `hyperbar` crate.
//!
//! Sign conventions used throughout:
//!
//! * `X` is the log-return, `S_t = S0 * exp(X_t)`.
//! * For a barrier `H < S0` the positive distance `y = ln(S0 / H)` is what
//!   enters the matrix exponential `exp(Q⁻ y)`; `Q⁻` has eigenvalues equal to
//!   the negative roots, so the exponential decays in `y`.
//! * Laplace variables passed to the Wiener–Hopf layer are already shifted by
//!   the risk-free rate when discounting is required.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calibration;
pub mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod pricing;
pub mod sampling;
pub mod transforms;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use model::{JumpFamily, ModelPeriod, PiecewiseModel};
pub use num_complex::Complex64;

/// Shorthand used by every numerical module.
pub(crate) type C64 = num_complex::Complex64;
