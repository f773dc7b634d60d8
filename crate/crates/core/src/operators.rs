//! Radial ladder operators, their second-order factorization, and the
//! generalized helicity operator Σ acting on ten-component fields.
//!
//! The ladder family, with the fixed constant γ = 1/√2 and azimuthal
//! number m of the mode:
//!
//! ```text
//! a  = γ(+∂_r + m/r)        b  = γ(−∂_r + m/r)
//! a₊ = γ(+∂_r + (m+1)/r)    b₊ = γ(−∂_r + (m+1)/r)
//! a₋ = γ(+∂_r + (m−1)/r)    b₋ = γ(−∂_r + (m−1)/r)
//! ```
//!
//! Both second-order compositions b₋∘a and a₊∘b collapse to the single
//! radial operator Δ = ½(−∂²_r − ∂_r/r + m²/r²), whose eigenfunctions at
//! eigenvalue Λ/2 are the cylinder functions of order m in √Λ r.
//!
//! Σ acts on a ten-component field (Φ₀, Φ⃗, E⃗, H⃗) by annihilating the
//! scalar slot and acting on each vector triplet V identically:
//!
//! ```text
//! (ΣV)₁ =  e^z a V₂ + (∂_z − 1)V₁
//! (ΣV)₂ = −e^z b₋ V₁ + e^z a₊ V₃
//! (ΣV)₃ = −e^z b V₂ − (∂_z − 1)V₃
//! ```
//!
//! The −1 shift in (∂_z − 1) is part of the operator, not a convention.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::FieldPoint;

/// The fixed ladder normalization γ = 1/√2.
pub const GAMMA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Errors from operator application.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("radial coordinate must be strictly positive, got r = {0}")]
    NonPositiveRadius(f64),
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("stencil at r = {r} with step {step} would cross the axis r = 0")]
    StencilCrossesAxis { r: f64, step: f64 },
}

/// Value, first and second derivative of a radial profile at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

/// A one-dimensional radial profile tagged with the azimuthal number m of
/// the mode it belongs to.
///
/// The tag drives the ladder shifts; the profile's own functional form may
/// be a cylinder function of order m ± 1 (the neighbouring field slots use
/// those), so m is genuinely separate data.
#[derive(Clone)]
pub struct RadialProfile {
    m: i32,
    jet: Arc<dyn Fn(f64) -> ProfileJet + Send + Sync>,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile").field("m", &self.m).finish()
    }
}

impl RadialProfile {
    /// Profile with closed-form derivatives.
    pub fn from_jet<F>(m: i32, jet: F) -> Self
    where
        F: Fn(f64) -> ProfileJet + Send + Sync + 'static,
    {
        Self {
            m,
            jet: Arc::new(jet),
        }
    }

    /// Profile from a plain value function; derivatives by fourth-order
    /// central differences with step 1e-4·max(1, r), shrunk near the axis so
    /// the stencil stays on r > 0.
    pub fn from_values<F>(m: i32, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            m,
            jet: Arc::new(move |r: f64| {
                let h = (1e-4 * r.max(1.0)).min(0.25 * r);
                let fm2 = f(r - 2.0 * h);
                let fm1 = f(r - h);
                let f0 = f(r);
                let fp1 = f(r + h);
                let fp2 = f(r + 2.0 * h);
                let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
                let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
                ProfileJet { value: f0, d1, d2 }
            }),
        }
    }

    /// Azimuthal number of the owning mode.
    pub fn azimuthal(&self) -> i32 {
        self.m
    }

    pub fn jet_at(&self, r: f64) -> Result<ProfileJet, OperatorError> {
        if !(r > 0.0) {
            return Err(OperatorError::NonPositiveRadius(r));
        }
        Ok((self.jet)(r))
    }

    pub fn value_at(&self, r: f64) -> Result<Complex64, OperatorError> {
        Ok(self.jet_at(r)?.value)
    }
}

/// The six ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    A,
    APlus,
    AMinus,
    B,
    BPlus,
    BMinus,
}

impl LadderKind {
    /// Sign of the ∂_r term: +1 for the a family, −1 for the b family.
    pub fn derivative_sign(self) -> f64 {
        match self {
            Self::A | Self::APlus | Self::AMinus => 1.0,
            Self::B | Self::BPlus | Self::BMinus => -1.0,
        }
    }

    /// Shift δ added to the azimuthal number in the (m+δ)/r term.
    pub fn shift(self) -> i32 {
        match self {
            Self::A | Self::B => 0,
            Self::APlus | Self::BPlus => 1,
            Self::AMinus | Self::BMinus => -1,
        }
    }
}

/// Applies one ladder operator to a radial profile at radius r:
/// γ(±f′ + ((m+δ)/r)·f).
pub fn ladder_apply(
    kind: LadderKind,
    f: &RadialProfile,
    r: f64,
) -> Result<Complex64, OperatorError> {
    let jet = f.jet_at(r)?;
    let coeff = (f.m + kind.shift()) as f64 / r;
    Ok(GAMMA * (kind.derivative_sign() * jet.d1 + coeff * jet.value))
}

/// Applies the composition outer∘inner to a profile at radius r, using the
/// profile's second derivative to form the inner result's first derivative
/// exactly (no extra differencing).
pub fn ladder_compose(
    outer: LadderKind,
    inner: LadderKind,
    f: &RadialProfile,
    r: f64,
) -> Result<Complex64, OperatorError> {
    let jet = f.jet_at(r)?;
    let si = inner.derivative_sign();
    let ci = (f.m + inner.shift()) as f64;
    let so = outer.derivative_sign();
    let co = (f.m + outer.shift()) as f64;
    // g = γ(s_i f′ + (c_i/r) f);  g′ = γ(s_i f″ + (c_i/r) f′ − (c_i/r²) f).
    let g = GAMMA * (si * jet.d1 + ci / r * jet.value);
    let gp = GAMMA * (si * jet.d2 + ci / r * jet.d1 - ci / (r * r) * jet.value);
    Ok(GAMMA * (so * gp + co / r * g))
}

/// The radial operator Δf = ½(−f″ − f′/r + m²f/r²).
///
/// Equals both ladder factorizations b₋∘a and a₊∘b; cylinder profiles of
/// order m in √Λ r satisfy 2Δf = Λf.
pub fn delta_apply(f: &RadialProfile, r: f64) -> Result<Complex64, OperatorError> {
    let jet = f.jet_at(r)?;
    let m2 = (f.m as f64) * (f.m as f64);
    Ok(0.5 * (-jet.d2 - jet.d1 / r + m2 / (r * r) * jet.value))
}

/// Values of the ten field components (Φ₀, Φ⃗, E⃗, H⃗) at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TenComponent {
    pub phi0: Complex64,
    pub phi: [Complex64; 3],
    pub e: [Complex64; 3],
    pub h: [Complex64; 3],
}

impl TenComponent {
    pub const ZERO: TenComponent = TenComponent {
        phi0: Complex64::new(0.0, 0.0),
        phi: [Complex64::new(0.0, 0.0); 3],
        e: [Complex64::new(0.0, 0.0); 3],
        h: [Complex64::new(0.0, 0.0); 3],
    };

    /// Components flattened in the fixed order Φ₀, Φ₁..Φ₃, E₁..E₃, H₁..H₃.
    pub fn flatten(&self) -> [Complex64; 10] {
        [
            self.phi0,
            self.phi[0],
            self.phi[1],
            self.phi[2],
            self.e[0],
            self.e[1],
            self.e[2],
            self.h[0],
            self.h[1],
            self.h[2],
        ]
    }

    /// Largest component magnitude; the local field scale for relative
    /// residuals.
    pub fn max_abs(&self) -> f64 {
        self.flatten().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.flatten()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl std::ops::Add for TenComponent {
    type Output = TenComponent;
    fn add(self, rhs: TenComponent) -> TenComponent {
        let mut out = TenComponent::ZERO;
        out.phi0 = self.phi0 + rhs.phi0;
        for i in 0..3 {
            out.phi[i] = self.phi[i] + rhs.phi[i];
            out.e[i] = self.e[i] + rhs.e[i];
            out.h[i] = self.h[i] + rhs.h[i];
        }
        out
    }
}

impl std::ops::Sub for TenComponent {
    type Output = TenComponent;
    fn sub(self, rhs: TenComponent) -> TenComponent {
        let mut out = TenComponent::ZERO;
        out.phi0 = self.phi0 - rhs.phi0;
        for i in 0..3 {
            out.phi[i] = self.phi[i] - rhs.phi[i];
            out.e[i] = self.e[i] - rhs.e[i];
            out.h[i] = self.h[i] - rhs.h[i];
        }
        out
    }
}

impl std::ops::Mul<TenComponent> for Complex64 {
    type Output = TenComponent;
    fn mul(self, rhs: TenComponent) -> TenComponent {
        let mut out = TenComponent::ZERO;
        out.phi0 = self * rhs.phi0;
        for i in 0..3 {
            out.phi[i] = self * rhs.phi[i];
            out.e[i] = self * rhs.e[i];
            out.h[i] = self * rhs.h[i];
        }
        out
    }
}

/// A ten-component field on the (r, z) half-plane that knows its azimuthal
/// number (the ladder operators inside Σ need it).
pub trait TenComponentField: Sync {
    fn azimuthal(&self) -> i32;
    fn sample(&self, r: f64, z: f64) -> TenComponent;
}

impl<T: TenComponentField + ?Sized> TenComponentField for &T {
    fn azimuthal(&self) -> i32 {
        (**self).azimuthal()
    }
    fn sample(&self, r: f64, z: f64) -> TenComponent {
        (**self).sample(r, z)
    }
}

/// Wraps a plain closure as a field.
pub struct ClosureField<F: Fn(f64, f64) -> TenComponent + Sync> {
    pub m: i32,
    pub f: F,
}

impl<F: Fn(f64, f64) -> TenComponent + Sync> TenComponentField for ClosureField<F> {
    fn azimuthal(&self) -> i32 {
        self.m
    }
    fn sample(&self, r: f64, z: f64) -> TenComponent {
        (self.f)(r, z)
    }
}

/// Applies the helicity operator Σ to a field at a point, with second-order
/// central differences of step h for both ∂_r and ∂_z.
///
/// The scalar slot of the result is identically zero; each triplet of the
/// input transforms independently through the same three-line action.
pub fn helicity_apply<F: TenComponentField + ?Sized>(
    field: &F,
    p: &FieldPoint,
    h: f64,
) -> Result<TenComponent, OperatorError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(OperatorError::InvalidStep(h));
    }
    let (r, z) = (p.r(), p.z());
    if r - h <= 0.0 {
        return Err(OperatorError::StencilCrossesAxis { r, step: h });
    }

    let center = field.sample(r, z);
    let r_plus = field.sample(r + h, z);
    let r_minus = field.sample(r - h, z);
    let z_plus = field.sample(r, z + h);
    let z_minus = field.sample(r, z - h);

    let m = field.azimuthal() as f64;
    let ez = z.exp();
    let two_h = 2.0 * h;

    let act = |get: &dyn Fn(&TenComponent) -> [Complex64; 3]| -> [Complex64; 3] {
        let v = get(&center);
        let dr = [
            (get(&r_plus)[0] - get(&r_minus)[0]) / two_h,
            (get(&r_plus)[1] - get(&r_minus)[1]) / two_h,
            (get(&r_plus)[2] - get(&r_minus)[2]) / two_h,
        ];
        let dz = [
            (get(&z_plus)[0] - get(&z_minus)[0]) / two_h,
            (get(&z_plus)[1] - get(&z_minus)[1]) / two_h,
            (get(&z_plus)[2] - get(&z_minus)[2]) / two_h,
        ];
        // a V₂, b V₂ with shift 0; b₋ V₁ with shift −1; a₊ V₃ with shift +1.
        let a_v2 = GAMMA * (dr[1] + m / r * v[1]);
        let b_v2 = GAMMA * (-dr[1] + m / r * v[1]);
        let bm_v1 = GAMMA * (-dr[0] + (m - 1.0) / r * v[0]);
        let ap_v3 = GAMMA * (dr[2] + (m + 1.0) / r * v[2]);
        [
            ez * a_v2 + dz[0] - v[0],
            -ez * bm_v1 + ez * ap_v3,
            -ez * b_v2 - (dz[2] - v[2]),
        ]
    };

    Ok(TenComponent {
        phi0: Complex64::new(0.0, 0.0),
        phi: act(&|t| t.phi),
        e: act(&|t| t.e),
        h: act(&|t| t.h),
    })
}
