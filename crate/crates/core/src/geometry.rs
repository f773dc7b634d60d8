//! Geometry of hyperbolic 3-space in horospherical coordinates.
//!
//! The static spacetime metric is
//!
//! ```text
//! dS² = dt² − e^{−2z}(dr² + r² dφ²) − dz²,
//! ```
//!
//! coordinates ordered (t, r, φ, z) = indices (0, 1, 2, 3), curvature radius
//! fixed to 1, signature (+,−,−,−). The diagonal tetrad
//!
//! ```text
//! e_{(a)}^β  = diag(1,  e^z,      e^z/r,      1),
//! e_{(a)β}   = diag(1, −e^{−z},  −r e^{−z},  −1)
//! ```
//!
//! relates coordinate components to flat-frame components.
//!
//! Every geometric quantity here has two evaluation paths. Closed forms are
//! the production path. The numeric paths (finite differences of the metric
//! for the Christoffel symbols, index contraction of tetrad covariant
//! derivatives for the rotation coefficients) exist so the test suites can
//! cross-check the closed forms against an independent computation.

// Tensor components are addressed by their coordinate indices throughout;
// iterator rewrites of these loops hide which slot is which.
#![allow(clippy::needless_range_loop)]

use thiserror::Error;

/// Coordinate index of t.
pub const T: usize = 0;
/// Coordinate index of r.
pub const R: usize = 1;
/// Coordinate index of φ.
pub const PHI: usize = 2;
/// Coordinate index of z.
pub const Z: usize = 3;

/// Errors from coordinate validation and numeric differentiation setup.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// r = 0 is a coordinate singularity of the radial operators; points on
    /// or past the axis are rejected outright.
    #[error("radial coordinate must be strictly positive, got r = {0}")]
    NonPositiveRadius(f64),
    #[error("coordinates must be finite, got r = {r}, z = {z}")]
    NonFinite { r: f64, z: f64 },
    /// The difference stencil must stay inside r > 0.
    #[error("finite-difference step must satisfy 0 < 2h < r (step {step}, r = {r})")]
    InvalidStep { step: f64, r: f64 },
}

/// A point (r, z) of the meridian half-plane r > 0.
///
/// t and φ never appear numerically: mode fields carry them in the analytic
/// phase e^{−iεt} e^{imφ}, which is factored out of everything this crate
/// computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    r: f64,
    z: f64,
}

impl FieldPoint {
    /// Validates r > 0 strictly and finiteness of both coordinates.
    pub fn new(r: f64, z: f64) -> Result<Self, GeometryError> {
        if !(r.is_finite() && z.is_finite()) {
            return Err(GeometryError::NonFinite { r, z });
        }
        if r <= 0.0 {
            return Err(GeometryError::NonPositiveRadius(r));
        }
        Ok(Self { r, z })
    }

    pub fn r(self) -> f64 {
        self.r
    }

    pub fn z(self) -> f64 {
        self.z
    }
}

/// Diagonal metric components at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    pub g_tt: f64,
    pub g_rr: f64,
    pub g_phiphi: f64,
    pub g_zz: f64,
}

impl MetricTensor {
    /// Components as an array indexed by coordinate.
    pub fn diagonal(&self) -> [f64; 4] {
        [self.g_tt, self.g_rr, self.g_phiphi, self.g_zz]
    }

    /// Inverse metric diagonal (entrywise reciprocal; the metric is diagonal
    /// and never degenerate on r > 0).
    pub fn inverse_diagonal(&self) -> [f64; 4] {
        let d = self.diagonal();
        [1.0 / d[0], 1.0 / d[1], 1.0 / d[2], 1.0 / d[3]]
    }
}

/// Christoffel symbols Γ^i_{jk} at a point, indexed `[upper][lower][lower]`.
///
/// Symmetric in the lower pair; every entry with a t index vanishes because
/// the metric is static and t-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTable {
    entries: [[[f64; 4]; 4]; 4],
}

impl ChristoffelTable {
    pub fn get(&self, upper: usize, lower1: usize, lower2: usize) -> f64 {
        self.entries[upper][lower1][lower2]
    }

    pub fn entries(&self) -> &[[[f64; 4]; 4]; 4] {
        &self.entries
    }
}

/// Ricci rotation coefficients γ_{abc} at a point, indexed `[a][b][c]`
/// (flat tetrad indices).
///
/// Antisymmetric in (a, b); the only nonzero entries are
/// γ_{311} = −1, γ_{232} = +1, γ_{122} = e^z/r and their (a, b)-swapped
/// partners. The c = 0 column vanishes identically.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciTable {
    entries: [[[f64; 4]; 4]; 4],
}

impl RicciTable {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.entries[a][b][c]
    }

    pub fn entries(&self) -> &[[[f64; 4]; 4]; 4] {
        &self.entries
    }
}

/// Metric components at a point.
pub fn metric_at(p: &FieldPoint) -> MetricTensor {
    let w = (-2.0 * p.z()).exp();
    MetricTensor {
        g_tt: 1.0,
        g_rr: -w,
        g_phiphi: -p.r() * p.r() * w,
        g_zz: -1.0,
    }
}

/// Contravariant tetrad components e_{(a)}^β (diagonal, returned as the
/// diagonal indexed by the flat label a = coordinate label).
pub fn tetrad_up(p: &FieldPoint) -> [f64; 4] {
    let ez = p.z().exp();
    [1.0, ez, ez / p.r(), 1.0]
}

/// Covariant tetrad components e_{(a)β} (diagonal; carries the spatial minus
/// signs of the signature).
pub fn tetrad_down(p: &FieldPoint) -> [f64; 4] {
    let emz = (-p.z()).exp();
    [1.0, -emz, -p.r() * emz, -1.0]
}

/// Christoffel symbols in closed form.
pub fn christoffel_at(p: &FieldPoint) -> ChristoffelTable {
    let r = p.r();
    let w = (-2.0 * p.z()).exp();
    let mut g = [[[0.0; 4]; 4]; 4];
    g[R][R][Z] = -1.0;
    g[R][Z][R] = -1.0;
    g[R][PHI][PHI] = -r;
    g[PHI][R][PHI] = 1.0 / r;
    g[PHI][PHI][R] = 1.0 / r;
    g[PHI][PHI][Z] = -1.0;
    g[PHI][Z][PHI] = -1.0;
    g[Z][R][R] = w;
    g[Z][PHI][PHI] = r * r * w;
    ChristoffelTable { entries: g }
}

/// Numeric Christoffel evaluation together with its quality diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericChristoffel {
    pub table: ChristoffelTable,
    /// Present when the requested step is small enough that floating-point
    /// cancellation, not truncation, limits the accuracy of the stencil.
    pub cancellation: Option<CancellationWarning>,
}

/// Diagnostic attached to a finite-difference pass whose rounding noise
/// intrudes on the intended accuracy band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationWarning {
    /// Smallest step actually used by the stencil.
    pub step: f64,
    /// Estimated relative rounding-noise floor of the differentiated entries.
    pub noise: f64,
}

/// Relative noise above which a finite-difference pass is flagged as
/// cancellation-limited. One decade under the 1e-7 agreement band the
/// numeric oracle is held to.
const CANCELLATION_NOISE_BAND: f64 = 1e-8;

/// Fractional disagreement between the full-step and half-step stencils that
/// triggers Richardson extrapolation instead of accepting the half-step
/// value directly.
const RICHARDSON_TRIGGER: f64 = 1e-9;

/// Fourth-order central first derivative.
fn deriv4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Derivative of one metric component along one coordinate, with a half-step
/// refinement: if the full-step and half-step stencils disagree beyond the
/// trigger the fourth-order Richardson combination (16·D(h/2) − D(h))/15 is
/// used. Returns (value, estimated relative rounding noise).
fn metric_partial(comp: usize, coord: usize, p: &FieldPoint, h: f64) -> (f64, f64) {
    // The metric depends on r and z only; t and φ derivatives vanish
    // identically and skip the stencil.
    if coord == T || coord == PHI {
        return (0.0, 0.0);
    }
    let g = |r: f64, z: f64| -> f64 {
        let w = (-2.0 * z).exp();
        match comp {
            T => 1.0,
            R => -w,
            PHI => -r * r * w,
            Z => -1.0,
            _ => unreachable!("coordinate index out of range"),
        }
    };
    let f = |x: f64| match coord {
        R => g(x, p.z()),
        _ => g(p.r(), x),
    };
    let x0 = if coord == R { p.r() } else { p.z() };
    let d_full = deriv4(f, x0, h);
    let d_half = deriv4(f, x0, h / 2.0);
    let scale = f(x0).abs().max(1.0);
    let value = if (d_full - d_half).abs() > RICHARDSON_TRIGGER * d_half.abs().max(1.0) {
        (16.0 * d_half - d_full) / 15.0
    } else {
        d_half
    };
    // Rounding-noise model for the 12h-denominator stencil: ~18 ulps of the
    // function scale, amplified by 1/(12·h_min).
    let noise = 18.0 * f64::EPSILON * scale / (12.0 * (h / 2.0)) / value.abs().max(1.0);
    (value, noise)
}

/// Christoffel symbols from fourth-order central differences of the metric,
/// Γ^i_{jk} = ½ g^{il} (∂_j g_{lk} + ∂_k g_{lj} − ∂_l g_{jk}).
///
/// Independent of [`christoffel_at`]: only [`metric_at`]'s components enter.
/// A base step of 1e-4 keeps both truncation and rounding error well under
/// the 1e-7 band; steps small enough to be cancellation-limited are flagged
/// in the returned diagnostic rather than silently degraded.
pub fn christoffel_numeric(p: &FieldPoint, h: f64) -> Result<NumericChristoffel, GeometryError> {
    if !(h > 0.0) || 2.0 * h >= p.r() {
        return Err(GeometryError::InvalidStep { step: h, r: p.r() });
    }

    let mut dg = [[[0.0; 4]; 4]; 4]; // dg[coord][comp] = ∂_coord g_{comp comp}, diagonal metric
    let mut worst_noise: f64 = 0.0;
    for coord in 0..4 {
        for comp in 0..4 {
            let (value, noise) = metric_partial(comp, coord, p, h);
            dg[coord][comp][comp] = value;
            worst_noise = worst_noise.max(noise);
        }
    }

    let inv = metric_at(p).inverse_diagonal();
    let mut entries = [[[0.0; 4]; 4]; 4];
    for i in 0..4 {
        // Diagonal inverse metric: only l = i contributes to g^{il}.
        let l = i;
        for j in 0..4 {
            for k in 0..4 {
                let dj_glk = if l == k { dg[j][l][l] } else { 0.0 };
                let dk_glj = if l == j { dg[k][l][l] } else { 0.0 };
                let dl_gjk = if j == k { dg[l][j][j] } else { 0.0 };
                entries[i][j][k] = 0.5 * inv[i] * (dj_glk + dk_glj - dl_gjk);
            }
        }
    }

    let cancellation = (worst_noise > CANCELLATION_NOISE_BAND).then_some(CancellationWarning {
        step: h / 2.0,
        noise: worst_noise,
    });
    Ok(NumericChristoffel {
        table: ChristoffelTable { entries },
        cancellation,
    })
}

/// ∂_α e_{(a)β} for the diagonal tetrad (closed form; the tetrad depends on
/// r and z only).
fn tetrad_partial(a: usize, beta: usize, alpha: usize, p: &FieldPoint) -> f64 {
    let emz = (-p.z()).exp();
    match (a, beta, alpha) {
        (1, R, Z) => emz,           // ∂_z(−e^{−z})
        (2, PHI, R) => -emz,        // ∂_r(−r e^{−z})
        (2, PHI, Z) => p.r() * emz, // ∂_z(−r e^{−z})
        _ => 0.0,
    }
}

/// Tetrad covariant derivative e_{(a)β;α} = ∂_α e_{(a)β} − Γ^δ_{βα} e_{(a)δ},
/// returned as the 4×4 matrix `m[β][α]`.
///
/// For a = 0 the matrix vanishes; for a = 1 the only nonzero entries are
/// (φ,φ) = −r e^{−z} and (z,r) = −e^{−z}; for a = 2 they are (r,φ) = e^{−z}
/// and (z,φ) = −r e^{−z}; for a = 3 they are (r,r) = e^{−2z} and
/// (φ,φ) = r² e^{−2z}.
pub fn tetrad_covariant_derivative(a: usize, p: &FieldPoint) -> [[f64; 4]; 4] {
    assert!(a < 4, "tetrad index out of range: {a}");
    let gamma = christoffel_at(p);
    let e_down = tetrad_down(p);
    let mut out = [[0.0; 4]; 4];
    for beta in 0..4 {
        for alpha in 0..4 {
            // Diagonal tetrad: only δ = a survives the Γ contraction.
            out[beta][alpha] =
                tetrad_partial(a, beta, alpha, p) - gamma.get(a, beta, alpha) * e_down[a];
        }
    }
    out
}

/// Ricci rotation coefficients in closed form.
pub fn ricci_rotation(p: &FieldPoint) -> RicciTable {
    let ez_r = p.z().exp() / p.r();
    let mut g = [[[0.0; 4]; 4]; 4];
    g[3][1][1] = -1.0;
    g[1][3][1] = 1.0;
    g[2][3][2] = 1.0;
    g[3][2][2] = -1.0;
    g[1][2][2] = ez_r;
    g[2][1][2] = -ez_r;
    RicciTable { entries: g }
}

/// Ricci rotation coefficients by contraction,
/// γ_{abc} = e^β_{(a)} e_{(b)β;α} e^α_{(c)}.
///
/// Built entirely from [`tetrad_covariant_derivative`]; serves as the
/// independent cross-check of [`ricci_rotation`]. Antisymmetry in (a, b) is
/// a structural consequence of metric compatibility and holds here to
/// rounding.
pub fn ricci_rotation_contracted(p: &FieldPoint) -> RicciTable {
    let up = tetrad_up(p);
    let derivs = [
        tetrad_covariant_derivative(0, p),
        tetrad_covariant_derivative(1, p),
        tetrad_covariant_derivative(2, p),
        tetrad_covariant_derivative(3, p),
    ];
    let mut entries = [[[0.0; 4]; 4]; 4];
    for (a, row) in entries.iter_mut().enumerate() {
        for (b, deriv) in derivs.iter().enumerate() {
            for c in 0..4 {
                // Diagonal tetrad: the β sum collapses to β = a and the α
                // sum to α = c.
                row[b][c] = up[a] * deriv[a][c] * up[c];
            }
        }
    }
    RicciTable { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, z: f64) -> FieldPoint {
        FieldPoint::new(r, z).unwrap()
    }

    #[test]
    fn point_validation() {
        assert!(FieldPoint::new(1.0, -3.0).is_ok());
        assert_eq!(
            FieldPoint::new(0.0, 0.0),
            Err(GeometryError::NonPositiveRadius(0.0))
        );
        assert_eq!(
            FieldPoint::new(-1.0, 0.0),
            Err(GeometryError::NonPositiveRadius(-1.0))
        );
        assert!(matches!(
            FieldPoint::new(f64::NAN, 0.0),
            Err(GeometryError::NonFinite { .. })
        ));
        assert!(matches!(
            FieldPoint::new(1.0, f64::INFINITY),
            Err(GeometryError::NonFinite { .. })
        ));
    }

    #[test]
    fn metric_components() {
        let g = metric_at(&pt(1.0, 0.0));
        assert_eq!(g.g_tt, 1.0);
        assert_eq!(g.g_rr, -1.0);
        assert_eq!(g.g_zz, -1.0);

        let g = metric_at(&pt(2.0, 0.0));
        assert_eq!(g.g_phiphi, -4.0);

        let g = metric_at(&pt(1.0, 1.0));
        assert!((g.g_rr - (-(-2.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn metric_inverse_is_reciprocal() {
        let p = pt(1.7, -0.4);
        let g = metric_at(&p);
        let inv = g.inverse_diagonal();
        for (gi, ii) in g.diagonal().iter().zip(inv.iter()) {
            assert!((gi * ii - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn christoffel_closed_form_entries() {
        let p = pt(2.0, 0.0);
        let gamma = christoffel_at(&p);
        assert_eq!(gamma.get(R, R, Z), -1.0);
        assert_eq!(gamma.get(R, Z, R), -1.0);
        assert_eq!(gamma.get(PHI, R, PHI), 0.5);
        assert_eq!(gamma.get(PHI, PHI, Z), -1.0);
        assert_eq!(gamma.get(R, PHI, PHI), -2.0);

        let gamma = christoffel_at(&pt(1.0, 0.0));
        assert_eq!(gamma.get(Z, R, R), 1.0);
        assert_eq!(gamma.get(Z, PHI, PHI), 1.0);
    }

    #[test]
    fn christoffel_lower_symmetry_and_t_rows() {
        let gamma = christoffel_at(&pt(0.7, 1.3));
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(gamma.get(i, j, k), gamma.get(i, k, j));
                    assert_eq!(gamma.get(T, j, k), 0.0);
                    assert_eq!(gamma.get(i, T, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn christoffel_numeric_matches_closed_form() {
        for &(r, z) in &[(1.0, 0.0), (2.0, 1.0), (0.3, -1.5), (4.5, 1.9)] {
            let p = pt(r, z);
            let exact = christoffel_at(&p);
            let numeric = christoffel_numeric(&p, 1e-4).unwrap();
            assert!(numeric.cancellation.is_none());
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        let diff = (exact.get(i, j, k) - numeric.table.get(i, j, k)).abs();
                        assert!(
                            diff <= 1e-7,
                            "Γ^{i}_{{{j}{k}}} at (r={r}, z={z}): diff {diff:e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_numeric_t_rows_exactly_zero() {
        let numeric = christoffel_numeric(&pt(1.3, 0.4), 1e-4).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(numeric.table.get(T, j, k), 0.0);
            }
        }
    }

    #[test]
    fn christoffel_numeric_flags_cancellation() {
        let fine = christoffel_numeric(&pt(1.0, 0.0), 1e-12).unwrap();
        assert!(fine.cancellation.is_some());
        let coarse = christoffel_numeric(&pt(1.0, 0.0), 1e-4).unwrap();
        assert!(coarse.cancellation.is_none());
    }

    #[test]
    fn christoffel_numeric_rejects_bad_steps() {
        assert!(matches!(
            christoffel_numeric(&pt(1.0, 0.0), 0.0),
            Err(GeometryError::InvalidStep { .. })
        ));
        assert!(matches!(
            christoffel_numeric(&pt(1e-4, 0.0), 1e-4),
            Err(GeometryError::InvalidStep { .. })
        ));
    }

    #[test]
    fn tetrad_matrices_match_displayed_entries() {
        let p = pt(1.0, 0.0);

        let m0 = tetrad_covariant_derivative(0, &p);
        assert_eq!(m0, [[0.0; 4]; 4]);

        let m1 = tetrad_covariant_derivative(1, &p);
        assert!((m1[PHI][PHI] - (-1.0)).abs() < 1e-15); // −r e^{−z}
        assert!((m1[Z][R] - (-1.0)).abs() < 1e-15); // −e^{−z}

        let m2 = tetrad_covariant_derivative(2, &p);
        assert!((m2[R][PHI] - 1.0).abs() < 1e-15); // e^{−z}
        assert!((m2[Z][PHI] - (-1.0)).abs() < 1e-15); // −r e^{−z}

        let m3 = tetrad_covariant_derivative(3, &p);
        assert!((m3[R][R] - 1.0).abs() < 1e-15); // e^{−2z}
        assert!((m3[PHI][PHI] - 1.0).abs() < 1e-15); // r² e^{−2z}
    }

    #[test]
    fn tetrad_matrices_have_no_extra_entries() {
        let p = pt(1.7, -0.6);
        let expected_support = [
            (1usize, PHI, PHI),
            (1, Z, R),
            (2, R, PHI),
            (2, Z, PHI),
            (3, R, R),
            (3, PHI, PHI),
        ];
        for a in 0..4 {
            let m = tetrad_covariant_derivative(a, &p);
            for beta in 0..4 {
                for alpha in 0..4 {
                    let expected = expected_support.contains(&(a, beta, alpha));
                    if !expected {
                        assert!(
                            m[beta][alpha].abs() < 1e-15,
                            "unexpected entry a={a} β={beta} α={alpha}: {}",
                            m[beta][alpha]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ricci_rotation_closed_form_entries() {
        let p = pt(2.0, 0.0);
        let g = ricci_rotation(&p);
        assert_eq!(g.get(3, 1, 1), -1.0);
        assert_eq!(g.get(2, 3, 2), 1.0);
        assert_eq!(g.get(1, 2, 2), 0.5); // e^0 / 2
        assert_eq!(g.get(2, 3, 1), 0.0);
        // c = 0 column vanishes throughout.
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(g.get(a, b, 0), 0.0);
            }
        }
    }

    #[test]
    fn ricci_rotation_paths_agree() {
        for &(r, z) in &[(0.5, -1.0), (1.0, 0.0), (2.3, 1.7), (4.0, -1.9)] {
            let p = pt(r, z);
            let closed = ricci_rotation(&p);
            let contracted = ricci_rotation_contracted(&p);
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let diff = (closed.get(a, b, c) - contracted.get(a, b, c)).abs();
                        let scale = closed.get(a, b, c).abs().max(1.0);
                        assert!(
                            diff <= 1e-12 * scale,
                            "γ_{{{a}{b}{c}}} at (r={r}, z={z}): closed {} vs contracted {}",
                            closed.get(a, b, c),
                            contracted.get(a, b, c)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn contracted_path_is_antisymmetric_to_rounding() {
        for &(r, z) in &[(0.2, -2.0), (1.0, 0.0), (3.4, 1.2)] {
            let g = ricci_rotation_contracted(&pt(r, z));
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let s = (g.get(a, b, c) + g.get(b, a, c)).abs();
                        let scale = g.get(a, b, c).abs().max(1.0);
                        assert!(
                            s <= 4.0 * f64::EPSILON * scale,
                            "antisymmetry defect γ_{{{a}{b}{c}}} + γ_{{{b}{a}{c}}} = {s:e}"
                        );
                    }
                }
            }
        }
    }
}
