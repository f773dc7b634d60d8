//! Exact ten-component mode fields and the closure constraint among
//! (ε, σ, M).
//!
//! Three families are assembled here. With a radial cylinder profile
//! R(r) of order m in √Λ r and an axial profile Z(z) built from modified
//! Bessel functions of argument √Λ e^z:
//!
//! * σ≠0 massive: Φ₀ = 0, Φ₂ = e^{2z} R(r) Z(z), and the side slots carry
//!   the order m∓1 profiles weighted by ½(∓σ − ∂_z)Z; the field-strength
//!   triplets are pointwise proportional, E_j = (−iε/M)Φ_j and
//!   H_j = (−iσ/M)Φ_j. The construction solves the full first-order
//!   system exactly when ε² + σ² = M² (see [`dispersion_residual`]).
//! * σ=0 massive: a nonzero scalar slot Φ₀ = R(r) e^z φ₀(z) with
//!   ν² = 1 − ε² + M² drives everything; H ≡ 0.
//! * massless gradient: all ten components are built from derivatives of
//!   an arbitrary smooth scalar, and E ≡ H ≡ 0 identically.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::c64;
use crate::operators::{ProfileJet, RadialProfile, TenComponent, TenComponentField, GAMMA};
use crate::specfun::{
    bessel_i, bessel_j, bessel_k, bessel_y, macdonald_imag_order, SpecFunError,
    SpecialFunctionValue,
};

const NAN_C: Complex64 = Complex64::new(f64::NAN, f64::NAN);

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("separation constant must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("mass must be non-negative and finite, got {0}")]
    InvalidMass(f64),
    #[error("energy must be nonzero and finite, got {0}")]
    InvalidEnergy(f64),
    #[error("this family requires sigma = 0, got {0}")]
    SigmaMustVanish(Complex64),
    #[error("this family requires sigma != 0")]
    SigmaMustNotVanish,
    #[error("this family requires a positive mass")]
    MassMustNotVanish,
    #[error("degenerate family boundary eps^2 = M^2 (eps = {epsilon}, M = {mass})")]
    DegenerateEnergy { epsilon: f64, mass: f64 },
    #[error("unsupported axial branch: {0}")]
    UnsupportedBranch(String),
    #[error("mode fields can only be combined within one family and one set of quantum numbers")]
    MismatchedCombination,
    #[error(transparent)]
    Special(#[from] SpecFunError),
}

/// Mode labels (ε, m, σ, Λ, M). σ is complex; the purely imaginary axis
/// σ = iκ is the branch the decaying axial profile supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumNumbers {
    pub epsilon: f64,
    pub m: i32,
    pub sigma: Complex64,
    pub lambda: f64,
    pub mass: f64,
}

impl QuantumNumbers {
    /// Shared invariants: Λ positive, M non-negative, ε finite, σ finite.
    pub fn validate(&self) -> Result<(), ModeError> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(ModeError::InvalidLambda(self.lambda));
        }
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(ModeError::InvalidMass(self.mass));
        }
        if !self.epsilon.is_finite() {
            return Err(ModeError::InvalidEnergy(self.epsilon));
        }
        if !self.sigma.re.is_finite() || !self.sigma.im.is_finite() {
            return Err(ModeError::UnsupportedBranch(format!(
                "sigma = {} is not finite",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Which cylinder function the radial factor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialKind {
    J,
    Y,
}

/// Axial behaviour as z → +∞: the Macdonald branch dies off, the
/// modified-Bessel-I branch blows up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxialKind {
    Decaying,
    Growing,
}

/// The three assembled families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SigmaNonzero,
    SigmaZeroMassive,
    MasslessGradient,
}

fn cylinder(kind: RadialKind, order: f64, x: f64) -> Result<SpecialFunctionValue, SpecFunError> {
    match kind {
        RadialKind::J => bessel_j(order, x),
        RadialKind::Y => bessel_y(order, x),
    }
}

/// Radial factor r ↦ C_m(√Λ r) with exact derivatives (C = J or Y).
/// Eigenfunction of 2Δ with eigenvalue Λ. Negative m is served through
/// the reflection built into the evaluators.
pub fn radial_profile(m: i32, lambda: f64, kind: RadialKind) -> Result<RadialProfile, ModeError> {
    radial_profile_shifted(m, 0, lambda, kind)
}

/// Radial profile whose functional order is m+shift while the ladder tag
/// stays m; the side slots of a mode live on shift = ∓1.
pub fn radial_profile_shifted(
    m: i32,
    shift: i32,
    lambda: f64,
    kind: RadialKind,
) -> Result<RadialProfile, ModeError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ModeError::InvalidLambda(lambda));
    }
    let order = (m + shift) as f64;
    let s = lambda.sqrt();
    Ok(RadialProfile::from_jet(m, move |r| {
        let y = s * r;
        match cylinder(kind, order, y) {
            Ok(v) => {
                // Second derivative from the cylinder ODE in y.
                let d2 = -v.derivative / y - (1.0 - order * order / (y * y)) * v.value;
                ProfileJet {
                    value: v.value,
                    d1: s * v.derivative,
                    d2: s * s * d2,
                }
            }
            Err(_) => ProfileJet {
                value: NAN_C,
                d1: NAN_C,
                d2: NAN_C,
            },
        }
    }))
}

/// Value and z-derivative of an axial profile at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialJet {
    pub value: Complex64,
    pub dz: Complex64,
}

/// Axial factor z ↦ f(√Λ e^z) with f a modified Bessel function of fixed
/// order; satisfies (d²/dz² − σ²)Z = Λ e^{2z} Z exactly.
#[derive(Clone)]
pub struct AxialSolution {
    order: Complex64,
    lambda: f64,
    kind: AxialKind,
    eval: Arc<dyn Fn(f64) -> AxialJet + Send + Sync>,
}

impl std::fmt::Debug for AxialSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AxialSolution")
            .field("order", &self.order)
            .field("lambda", &self.lambda)
            .field("kind", &self.kind)
            .finish()
    }
}

impl AxialSolution {
    pub fn order(&self) -> Complex64 {
        self.order
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn kind(&self) -> AxialKind {
        self.kind
    }

    /// Evaluates the profile; a failed inner evaluation yields NaN so the
    /// caller's flagged-point accounting sees it.
    pub fn at(&self, z: f64) -> AxialJet {
        (self.eval)(z)
    }
}

/// Builds the axial profile of order σ: K (decaying) or I (growing) in
/// √Λ e^z. Real orders use the standard evaluators; purely imaginary
/// orders σ = iκ take the quadrature path, which only covers the decaying
/// branch. Orders off both axes are not supported.
pub fn axial_profile(
    sigma: Complex64,
    lambda: f64,
    kind: AxialKind,
) -> Result<AxialSolution, ModeError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ModeError::InvalidLambda(lambda));
    }
    if !sigma.re.is_finite() || !sigma.im.is_finite() {
        return Err(ModeError::UnsupportedBranch(format!(
            "order {sigma} is not finite"
        )));
    }
    let s = lambda.sqrt();
    let raw: Arc<dyn Fn(f64) -> Result<AxialJet, SpecFunError> + Send + Sync> = if sigma.im == 0.0 {
        let nu = sigma.re;
        match kind {
            AxialKind::Decaying => Arc::new(move |z: f64| {
                let u = s * z.exp();
                let v = bessel_k(nu, u)?;
                Ok(AxialJet {
                    value: v.value,
                    dz: u * v.derivative,
                })
            }),
            AxialKind::Growing => Arc::new(move |z: f64| {
                let u = s * z.exp();
                let v = bessel_i(nu, u)?;
                Ok(AxialJet {
                    value: v.value,
                    dz: u * v.derivative,
                })
            }),
        }
    } else if sigma.re == 0.0 {
        if kind == AxialKind::Growing {
            return Err(ModeError::UnsupportedBranch(format!(
                "growing branch with imaginary order {sigma} (oscillatory, no real evaluator)"
            )));
        }
        let kappa = sigma.im.abs();
        Arc::new(move |z: f64| {
            let u = s * z.exp();
            let v = macdonald_imag_order(kappa, u)?;
            Ok(AxialJet {
                value: v.value,
                dz: u * v.derivative,
            })
        })
    } else {
        return Err(ModeError::UnsupportedBranch(format!(
            "order {sigma} lies off both the real and imaginary axes"
        )));
    };

    // Surface domain or accuracy errors at build time rather than as NaN
    // frames mid-grid.
    raw(0.0)?;

    let eval = Arc::new(move |z: f64| {
        raw(z).unwrap_or(AxialJet {
            value: NAN_C,
            dz: NAN_C,
        })
    });
    Ok(AxialSolution {
        order: sigma,
        lambda,
        kind,
        eval,
    })
}

/// |ε² + σ² − M²|: the scalar obstruction left when the proportional
/// field-strength triplets are eliminated from the first-order system.
/// Zero exactly when the σ≠0 construction solves the full system.
///
/// Requires M > 0 (the elimination divides by M).
pub fn dispersion_residual(epsilon: f64, sigma: Complex64, mass: f64) -> f64 {
    debug_assert!(mass > 0.0, "dispersion closure is defined for M > 0");
    (c64(epsilon * epsilon - mass * mass, 0.0) + sigma * sigma).norm()
}

/// A fully assembled ten-component field, immutable and cheap to clone.
#[derive(Clone)]
pub struct ModeField {
    family: Family,
    qn: QuantumNumbers,
    radial_kind: Option<RadialKind>,
    axial_kind: Option<AxialKind>,
    closure_residual: Option<f64>,
    eval: Arc<dyn Fn(f64, f64) -> TenComponent + Send + Sync>,
}

impl std::fmt::Debug for ModeField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeField")
            .field("family", &self.family)
            .field("qn", &self.qn)
            .field("radial_kind", &self.radial_kind)
            .field("axial_kind", &self.axial_kind)
            .field("closure_residual", &self.closure_residual)
            .finish()
    }
}

impl ModeField {
    pub fn family(&self) -> Family {
        self.family
    }
    pub fn quantum_numbers(&self) -> QuantumNumbers {
        self.qn
    }
    pub fn radial_kind(&self) -> Option<RadialKind> {
        self.radial_kind
    }
    pub fn axial_kind(&self) -> Option<AxialKind> {
        self.axial_kind
    }

    /// |ε² + σ² − M²| for the σ≠0 family; None for families without the
    /// constraint.
    pub fn closure_residual(&self) -> Option<f64> {
        self.closure_residual
    }

    /// Whether the quantum numbers close the first-order system. A field
    /// that fails this is still evaluable; residual scans rely on that.
    pub fn is_closure_satisfied(&self) -> bool {
        match self.closure_residual {
            Some(res) => {
                let scale = self
                    .qn
                    .epsilon
                    .powi(2)
                    .max(self.qn.mass.powi(2))
                    .max(self.qn.sigma.norm_sqr())
                    .max(1.0);
                res <= 1e-10 * scale
            }
            None => true,
        }
    }
}

impl TenComponentField for ModeField {
    fn azimuthal(&self) -> i32 {
        self.qn.m
    }
    fn sample(&self, r: f64, z: f64) -> TenComponent {
        (self.eval)(r, z)
    }
}

fn value_or_nan(p: &RadialProfile, r: f64) -> Complex64 {
    p.value_at(r).unwrap_or(NAN_C)
}

/// σ≠0 massive family. The quantum numbers need not satisfy the closure
/// constraint; an inconsistent set yields a flagged non-solution that is
/// still evaluable (residual scans probe exactly those).
pub fn build_mode_sigma(
    qn: QuantumNumbers,
    radial: RadialKind,
    axial: AxialKind,
) -> Result<ModeField, ModeError> {
    qn.validate()?;
    if qn.sigma.norm() == 0.0 {
        return Err(ModeError::SigmaMustNotVanish);
    }
    if qn.mass == 0.0 {
        return Err(ModeError::MassMustNotVanish);
    }
    if qn.epsilon == 0.0 {
        return Err(ModeError::InvalidEnergy(qn.epsilon));
    }

    let rad_mid = radial_profile(qn.m, qn.lambda, radial)?;
    let rad_lo = radial_profile_shifted(qn.m, -1, qn.lambda, radial)?;
    let rad_hi = radial_profile_shifted(qn.m, 1, qn.lambda, radial)?;
    let ax = axial_profile(qn.sigma, qn.lambda, axial)?;

    let sigma = qn.sigma;
    let slot_scale = 1.0 / (GAMMA * qn.lambda.sqrt());
    let e_factor = c64(0.0, -qn.epsilon) / qn.mass;
    let h_factor = -Complex64::i() * sigma / qn.mass;

    let eval = Arc::new(move |r: f64, z: f64| -> TenComponent {
        if !(r > 0.0) {
            let mut t = TenComponent::ZERO;
            t.phi0 = NAN_C;
            t.phi = [NAN_C; 3];
            t.e = [NAN_C; 3];
            t.h = [NAN_C; 3];
            return t;
        }
        let az = ax.at(z);
        let w1 = 0.5 * (-sigma * az.value - az.dz);
        let w3 = 0.5 * (sigma * az.value - az.dz);
        let ez = z.exp();
        let phi = [
            ez * slot_scale * w1 * value_or_nan(&rad_lo, r),
            ez * ez * value_or_nan(&rad_mid, r) * az.value,
            ez * slot_scale * w3 * value_or_nan(&rad_hi, r),
        ];
        TenComponent {
            phi0: c64(0.0, 0.0),
            phi,
            e: [e_factor * phi[0], e_factor * phi[1], e_factor * phi[2]],
            h: [h_factor * phi[0], h_factor * phi[1], h_factor * phi[2]],
        }
    });

    Ok(ModeField {
        family: Family::SigmaNonzero,
        qn,
        radial_kind: Some(radial),
        axial_kind: Some(axial),
        closure_residual: Some(dispersion_residual(qn.epsilon, qn.sigma, qn.mass)),
        eval,
    })
}

/// Value and first partial derivatives of a scalar on the (r, z)
/// half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialJet {
    pub value: Complex64,
    pub dr: Complex64,
    pub dz: Complex64,
}

/// A smooth scalar with a fixed azimuthal number; the seed for the σ=0
/// scalar slot and for massless gradient modes.
#[derive(Clone)]
pub struct ScalarPotential {
    m: i32,
    eval: Arc<dyn Fn(f64, f64) -> PotentialJet + Send + Sync>,
}

impl std::fmt::Debug for ScalarPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarPotential")
            .field("m", &self.m)
            .finish()
    }
}

impl ScalarPotential {
    pub fn from_jet<F>(m: i32, eval: F) -> Self
    where
        F: Fn(f64, f64) -> PotentialJet + Send + Sync + 'static,
    {
        Self {
            m,
            eval: Arc::new(eval),
        }
    }

    pub fn azimuthal(&self) -> i32 {
        self.m
    }

    pub fn jet_at(&self, r: f64, z: f64) -> PotentialJet {
        (self.eval)(r, z)
    }
}

/// The separated scalar C_m(√Λ r) · e^z f(√Λ e^z) with axial order
/// ν² = 1 − ε² + M²; the master field of the σ=0 massive family, and with
/// M = 0 a ready-made seed for massless gradient modes.
pub fn scalar_master_potential(
    m: i32,
    lambda: f64,
    epsilon: f64,
    mass: f64,
    radial: RadialKind,
    axial: AxialKind,
) -> Result<ScalarPotential, ModeError> {
    let nu_sq = 1.0 - epsilon * epsilon + mass * mass;
    let order = if nu_sq >= 0.0 {
        c64(nu_sq.sqrt(), 0.0)
    } else {
        c64(0.0, (-nu_sq).sqrt())
    };
    let rad = radial_profile(m, lambda, radial)?;
    let ax = axial_profile(order, lambda, axial)?;
    Ok(ScalarPotential::from_jet(m, move |r, z| {
        let rj = rad.jet_at(r).unwrap_or(ProfileJet {
            value: NAN_C,
            d1: NAN_C,
            d2: NAN_C,
        });
        let az = ax.at(z);
        let g = z.exp() * (az.value + az.dz); // d/dz of e^z f
        PotentialJet {
            value: rj.value * z.exp() * az.value,
            dr: rj.d1 * z.exp() * az.value,
            dz: rj.value * g,
        }
    }))
}

/// σ=0 massive family: Φ₀ = C_m(√Λ r) e^z φ₀(z) with the order fixed by
/// ν² = 1 − ε² + M², the vector slots reconstructed from ΔΦ₀ and ∂_zΦ₀,
/// E_j = (M/iε)Φ_j, and H ≡ 0 identically.
///
/// The boundary ε² = M² is rejected: the slot weights divide by ε² − M².
pub fn build_mode_sigma0_massive(
    qn: QuantumNumbers,
    radial: RadialKind,
    axial: AxialKind,
) -> Result<ModeField, ModeError> {
    qn.validate()?;
    if qn.sigma.norm() != 0.0 {
        return Err(ModeError::SigmaMustVanish(qn.sigma));
    }
    if qn.mass == 0.0 {
        return Err(ModeError::MassMustNotVanish);
    }
    if qn.epsilon == 0.0 {
        return Err(ModeError::InvalidEnergy(qn.epsilon));
    }
    if qn.epsilon * qn.epsilon == qn.mass * qn.mass {
        return Err(ModeError::DegenerateEnergy {
            epsilon: qn.epsilon,
            mass: qn.mass,
        });
    }

    let nu_sq = 1.0 - qn.epsilon * qn.epsilon + qn.mass * qn.mass;
    let order = if nu_sq >= 0.0 {
        c64(nu_sq.sqrt(), 0.0)
    } else {
        c64(0.0, (-nu_sq).sqrt())
    };
    let rad_mid = radial_profile(qn.m, qn.lambda, radial)?;
    let rad_lo = radial_profile_shifted(qn.m, -1, qn.lambda, radial)?;
    let rad_hi = radial_profile_shifted(qn.m, 1, qn.lambda, radial)?;
    let ax = axial_profile(order, qn.lambda, axial)?;

    let eps2 = qn.epsilon * qn.epsilon;
    let m2 = qn.mass * qn.mass;
    // Φ₂ = (iε/(ε²−M²)) ∂_zΦ₀; slot weight B(z) = (iε/(M²−ε²))(Λ/2) e^zφ₀.
    let c_mid = c64(0.0, qn.epsilon) / (eps2 - m2);
    let c_bar = c64(0.0, qn.epsilon) / (m2 - eps2) * (qn.lambda / 2.0);
    let slot_scale = 1.0 / (GAMMA * qn.lambda.sqrt());
    let e_factor = qn.mass / c64(0.0, qn.epsilon);

    let eval = Arc::new(move |r: f64, z: f64| -> TenComponent {
        if !(r > 0.0) {
            let mut t = TenComponent::ZERO;
            t.phi0 = NAN_C;
            t.phi = [NAN_C; 3];
            t.e = [NAN_C; 3];
            return t;
        }
        let az = ax.at(z);
        let ez = z.exp();
        let phi0_axial = ez * az.value;
        let dz_phi0_axial = ez * (az.value + az.dz);
        let phi0 = value_or_nan(&rad_mid, r) * phi0_axial;
        let b_of_z = c_bar * phi0_axial;
        let phi = [
            ez * slot_scale * b_of_z * value_or_nan(&rad_lo, r),
            c_mid * value_or_nan(&rad_mid, r) * dz_phi0_axial,
            ez * slot_scale * b_of_z * value_or_nan(&rad_hi, r),
        ];
        TenComponent {
            phi0,
            phi,
            e: [e_factor * phi[0], e_factor * phi[1], e_factor * phi[2]],
            h: [c64(0.0, 0.0); 3],
        }
    });

    Ok(ModeField {
        family: Family::SigmaZeroMassive,
        qn,
        radial_kind: Some(radial),
        axial_kind: Some(axial),
        closure_residual: None,
        eval,
    })
}

/// Massless gradient family: every component is a derivative of the given
/// scalar, Φ₁ = e^z aΦ₀/(iε), Φ₂ = (i/ε)∂_zΦ₀, Φ₃ = e^z bΦ₀/(iε), with
/// E ≡ H ≡ 0 exactly. The stored quantum numbers carry σ = 0, M = 0 and an
/// inert Λ = 1 (no separation constant exists for a generic scalar).
pub fn build_mode_massless_gradient(
    potential: ScalarPotential,
    epsilon: f64,
) -> Result<ModeField, ModeError> {
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(ModeError::InvalidEnergy(epsilon));
    }
    let qn = QuantumNumbers {
        epsilon,
        m: potential.azimuthal(),
        sigma: c64(0.0, 0.0),
        lambda: 1.0,
        mass: 0.0,
    };
    let m = potential.azimuthal() as f64;
    let inv_ie = 1.0 / c64(0.0, epsilon);
    let i_over_e = Complex64::i() / epsilon;

    let eval = Arc::new(move |r: f64, z: f64| -> TenComponent {
        if !(r > 0.0) {
            let mut t = TenComponent::ZERO;
            t.phi0 = NAN_C;
            t.phi = [NAN_C; 3];
            return t;
        }
        let jet = potential.jet_at(r, z);
        let a_phi0 = GAMMA * (jet.dr + m / r * jet.value);
        let b_phi0 = GAMMA * (-jet.dr + m / r * jet.value);
        let ez = z.exp();
        TenComponent {
            phi0: jet.value,
            phi: [
                ez * a_phi0 * inv_ie,
                i_over_e * jet.dz,
                ez * b_phi0 * inv_ie,
            ],
            e: [c64(0.0, 0.0); 3],
            h: [c64(0.0, 0.0); 3],
        }
    });

    Ok(ModeField {
        family: Family::MasslessGradient,
        qn,
        radial_kind: None,
        axial_kind: None,
        closure_residual: None,
        eval,
    })
}

/// α·a + β·b for two fields of one family with equal quantum numbers.
/// The governing systems are linear, so the combination is again a
/// solution; metadata is taken from the left operand.
pub fn linear_combination(
    alpha: Complex64,
    a: &ModeField,
    beta: Complex64,
    b: &ModeField,
) -> Result<ModeField, ModeError> {
    if a.family != b.family || a.qn != b.qn {
        return Err(ModeError::MismatchedCombination);
    }
    let ea = a.eval.clone();
    let eb = b.eval.clone();
    Ok(ModeField {
        family: a.family,
        qn: a.qn,
        radial_kind: a.radial_kind,
        axial_kind: a.axial_kind,
        closure_residual: a.closure_residual,
        eval: Arc::new(move |r, z| alpha * ea(r, z) + beta * eb(r, z)),
    })
}
