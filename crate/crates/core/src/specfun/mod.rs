//! Special functions for the solution families: cylinder functions J_ν, Y_ν
//! and modified cylinder functions I_ν, K_ν of real order, plus the
//! real-valued Macdonald function of purely imaginary order, each returned
//! together with its first derivative with respect to the argument.
//!
//! Evaluation strategy, per family:
//!
//! - J/Y and I/K use Steed-style continued fractions for the logarithmic
//!   derivative, a downward recurrence to an order |μ| ≤ 1/2, a
//!   small-argument series closure below argument 2 and a continued-fraction
//!   closure above, tied together by the exact Wronskians. One code path
//!   covers all real orders uniformly, including the integer-order limits.
//! - Negative orders are reduced to positive ones through the standard
//!   reflection identities, which is exact for integers and loses nothing
//!   appreciable elsewhere.
//! - K of purely imaginary order comes from its real integral
//!   representation, evaluated by two independent quadrature rules (see
//!   [`macdonald_imag_order`] and [`macdonald_imag_order_gauss`]).
//!
//! Everything is validated downstream by Wronskian, recurrence, and
//! ODE-residual checks rather than against tabulated values.

mod cyl_jy;
mod gamma;
mod macdonald;
mod mod_ik;
mod quadrature;

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

pub use quadrature::{adaptive_simpson, composite_gauss_legendre, QuadratureOutcome};

/// Largest |ν| accepted by the real-order entry points. The downward
/// recurrences are run unscaled, which is comfortably safe to here.
pub const MAX_ORDER: f64 = 60.0;

/// A function value paired with its derivative with respect to the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFunctionValue {
    pub value: Complex64,
    pub derivative: Complex64,
}

impl SpecialFunctionValue {
    fn real(value: f64, derivative: f64) -> Self {
        Self {
            value: Complex64::new(value, 0.0),
            derivative: Complex64::new(derivative, 0.0),
        }
    }
}

/// Errors from the special-function evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("{function}: argument x = {x} outside domain ({requirement})")]
    Domain {
        function: &'static str,
        x: f64,
        requirement: &'static str,
    },
    #[error("{function}: order {nu} outside supported range (|order| ≤ {max})")]
    OrderRange {
        function: &'static str,
        nu: f64,
        max: f64,
    },
    #[error("{function}: iteration failed to converge at order {nu}, x = {x}")]
    NoConvergence {
        function: &'static str,
        nu: f64,
        x: f64,
    },
    /// The integral representation cancels too strongly for the requested
    /// parameters; `achieved` is the estimated attainable relative error.
    #[error(
        "{function}: accuracy loss at κ = {kappa}, x = {x}: achievable relative error \
         {achieved:.3e} exceeds target {target:.1e}"
    )]
    AccuracyLoss {
        function: &'static str,
        kappa: f64,
        x: f64,
        achieved: f64,
        target: f64,
    },
}

fn check_order(function: &'static str, nu: f64) -> Result<(), SpecFunError> {
    if !nu.is_finite() || nu.abs() > MAX_ORDER {
        return Err(SpecFunError::OrderRange {
            function,
            nu,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

fn is_integer(nu: f64) -> bool {
    nu == nu.round()
}

/// Value and derivative of J_ν, Y_ν, I_ν at x = 0 in the limit sense:
/// order 0 gives (1, 0); order 1 gives (0, 1/2); order > 1 gives (0, 0);
/// fractional orders in (0, 1) have a divergent derivative.
fn power_limit_at_zero(nu: f64) -> SpecialFunctionValue {
    if nu == 0.0 {
        SpecialFunctionValue::real(1.0, 0.0)
    } else if nu == 1.0 {
        SpecialFunctionValue::real(0.0, 0.5)
    } else if nu < 1.0 {
        SpecialFunctionValue::real(0.0, f64::INFINITY)
    } else {
        SpecialFunctionValue::real(0.0, 0.0)
    }
}

/// Bessel function of the first kind, J_ν(x), any real ν with |ν| ≤
/// [`MAX_ORDER`], x ≥ 0 (x = 0 needs ν ≥ 0).
pub fn bessel_j(nu: f64, x: f64) -> Result<SpecialFunctionValue, SpecFunError> {
    check_order("bessel_j", nu)?;
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain {
            function: "bessel_j",
            x,
            requirement: "x ≥ 0",
        });
    }
    if x == 0.0 {
        if nu < 0.0 && !is_integer(nu) {
            return Err(SpecFunError::Domain {
                function: "bessel_j",
                x,
                requirement: "x = 0 needs ν ≥ 0 or integer ν",
            });
        }
        return Ok(power_limit_at_zero(nu.abs()));
    }
    if nu >= 0.0 {
        let r = cyl_jy::bessjy(nu, x)?;
        return Ok(SpecialFunctionValue::real(r.j, r.jp));
    }
    let pos = nu.abs();
    let r = cyl_jy::bessjy(pos, x)?;
    if is_integer(pos) {
        // J_{−n} = (−1)^n J_n.
        let sign = if (pos as i64) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(SpecialFunctionValue::real(sign * r.j, sign * r.jp))
    } else {
        // J_{−ν} = cos(νπ) J_ν − sin(νπ) Y_ν.
        let (s, c) = (pos * PI).sin_cos();
        Ok(SpecialFunctionValue::real(
            c * r.j - s * r.y,
            c * r.jp - s * r.yp,
        ))
    }
}

/// Bessel function of the second kind, Y_ν(x), any real ν with |ν| ≤
/// [`MAX_ORDER`], x > 0.
pub fn bessel_y(nu: f64, x: f64) -> Result<SpecialFunctionValue, SpecFunError> {
    check_order("bessel_y", nu)?;
    if !(x > 0.0) {
        return Err(SpecFunError::Domain {
            function: "bessel_y",
            x,
            requirement: "x > 0",
        });
    }
    if nu >= 0.0 {
        let r = cyl_jy::bessjy(nu, x)?;
        return Ok(SpecialFunctionValue::real(r.y, r.yp));
    }
    let pos = nu.abs();
    let r = cyl_jy::bessjy(pos, x)?;
    if is_integer(pos) {
        let sign = if (pos as i64) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(SpecialFunctionValue::real(sign * r.y, sign * r.yp))
    } else {
        // Y_{−ν} = sin(νπ) J_ν + cos(νπ) Y_ν.
        let (s, c) = (pos * PI).sin_cos();
        Ok(SpecialFunctionValue::real(
            s * r.j + c * r.y,
            s * r.jp + c * r.yp,
        ))
    }
}

/// Modified Bessel function of the first kind, I_ν(x), any real ν with
/// |ν| ≤ [`MAX_ORDER`], x ≥ 0 (x = 0 needs ν ≥ 0 or integer ν).
pub fn bessel_i(nu: f64, x: f64) -> Result<SpecialFunctionValue, SpecFunError> {
    check_order("bessel_i", nu)?;
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain {
            function: "bessel_i",
            x,
            requirement: "x ≥ 0",
        });
    }
    if x == 0.0 {
        if nu < 0.0 && !is_integer(nu) {
            return Err(SpecFunError::Domain {
                function: "bessel_i",
                x,
                requirement: "x = 0 needs ν ≥ 0 or integer ν",
            });
        }
        return Ok(power_limit_at_zero(nu.abs()));
    }
    if nu >= 0.0 {
        let r = mod_ik::bessik(nu, x)?;
        return Ok(SpecialFunctionValue::real(r.i, r.ip));
    }
    let pos = nu.abs();
    let r = mod_ik::bessik(pos, x)?;
    if is_integer(pos) {
        // I_{−n} = I_n.
        Ok(SpecialFunctionValue::real(r.i, r.ip))
    } else {
        // I_{−ν} = I_ν + (2/π) sin(νπ) K_ν.
        let s = (pos * PI).sin();
        Ok(SpecialFunctionValue::real(
            r.i + 2.0 / PI * s * r.k,
            r.ip + 2.0 / PI * s * r.kp,
        ))
    }
}

/// Macdonald function (modified Bessel of the second kind), K_ν(x), any
/// real ν with |ν| ≤ [`MAX_ORDER`], x > 0.
pub fn bessel_k(nu: f64, x: f64) -> Result<SpecialFunctionValue, SpecFunError> {
    check_order("bessel_k", nu)?;
    if !(x > 0.0) {
        return Err(SpecFunError::Domain {
            function: "bessel_k",
            x,
            requirement: "x > 0",
        });
    }
    // K_{−ν} = K_ν.
    let r = mod_ik::bessik(nu.abs(), x)?;
    Ok(SpecialFunctionValue::real(r.k, r.kp))
}

/// Macdonald function of purely imaginary order, K_{iκ}(x), real-valued,
/// with its x-derivative. Primary (adaptive-quadrature) route.
///
/// Errors with [`SpecFunError::AccuracyLoss`] when the oscillatory
/// cancellation in the integral representation makes the relative-accuracy
/// target unattainable (large κ at moderate x).
pub fn macdonald_imag_order(kappa: f64, x: f64) -> Result<SpecialFunctionValue, SpecFunError> {
    macdonald::macdonald_adaptive(kappa, x)
}

/// Same function as [`macdonald_imag_order`] through an independent
/// composite Gauss-Legendre rule. Exists so callers (and the acceptance
/// suite) can check two-route agreement.
pub fn macdonald_imag_order_gauss(
    kappa: f64,
    x: f64,
) -> Result<SpecialFunctionValue, SpecFunError> {
    macdonald::macdonald_gauss(kappa, x)
}
