//! Spin-1 (ten-component) field modes on hyperbolic 3-space in horospherical
//! coordinates.
//!
//! The static metric is
//!
//! ```text
//! dS² = dt² − e^{−2z}(dr² + r² dφ²) − dz²
//! ```
//!
//! with coordinates (t, r, φ, z), r > 0. Field modes carry the phase factor
//! e^{−iεt} e^{imφ}, so every quantity handled here is a function of (r, z)
//! only, with frequency ε, azimuthal integer m, axial separation parameter σ,
//! radial separation constant Λ, and mass M as labels.
//!
//! Module map:
//!
//! - [`geometry`]: metric, Christoffel symbols, tetrad covariant derivatives
//!   and rotation coefficients, each with a closed-form path and an
//!   independent finite-difference path.
//! - [`specfun`]: cylinder functions J, Y, I, K of real order with
//!   derivatives, and the real-valued Macdonald function of purely imaginary
//!   order, computed by two independent quadrature routes.
//! - [`operators`]: the radial ladder operators, their second-order
//!   factorization, and the helicity operator acting on ten-component fields.
//! - [`modes`]: exact mode families (travelling σ ≠ 0, axially static σ = 0,
//!   massless gradient) assembled from the special functions.
//! - [`verify`]: grid residual evaluation of the first-order systems and the
//!   helicity eigenvalue equation, with Richardson extrapolation and
//!   convergence-order estimation.
//! - [`cli`]: the `dkp-h3` command-line front end (deterministic CSV/JSON
//!   output).
//!
//! # Example
//!
//! Build the travelling mode at ε = √2, m = 1, σ = i, Λ = 1, M = 1 and check
//! that the step-extrapolated residual of the full system vanishes:
//!
//! ```
//! use dkp_h3::c64;
//! use dkp_h3::modes::{build_mode_sigma, AxialKind, QuantumNumbers, RadialKind};
//! use dkp_h3::verify::{residual_system, richardson, Grid, SystemTag};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let qn = QuantumNumbers {
//!     epsilon: std::f64::consts::SQRT_2,
//!     m: 1,
//!     sigma: c64(0.0, 1.0),
//!     lambda: 1.0,
//!     mass: 1.0,
//! };
//! let mode = build_mode_sigma(qn, RadialKind::J, AxialKind::Decaying)?;
//!
//! let grid = Grid::default();
//! let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Full9)?;
//! let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Full9)?;
//! let report = richardson(&coarse, &fine)?;
//! assert!(report.max_relative() < 1e-6);
//! # Ok(())
//! # }
//! ```

// Validation gates are written `!(x > 0.0)` rather than `x <= 0.0` so that a
// NaN lands in the rejecting branch instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod geometry;
pub mod modes;
pub mod operators;
pub mod specfun;
pub mod verify;

pub use num_complex::Complex64;

/// Convenience constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
