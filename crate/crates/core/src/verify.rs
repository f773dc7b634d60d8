//! Finite-difference residual checks of ten-component fields against the
//! governing first-order systems, on rectangular (r, z) grids.
//!
//! Derivatives are replaced by central differences (2nd order by default,
//! 4th by request), every equation of the chosen system is evaluated at
//! every grid node, and the report keeps per-equation maxima and RMS
//! values, both absolute and relative to the local field magnitude. Two
//! reports at steps h and h/2 combine into a Richardson-extrapolated
//! report that cancels the leading truncation term and estimates the
//! observed convergence order; a residual that refuses to shrink under
//! extrapolation is a genuine equation violation, not discretization
//! noise.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::FieldPoint;
use crate::modes::{ModeField, QuantumNumbers};
use crate::operators::{helicity_apply, TenComponent, TenComponentField, GAMMA};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("stencil of halfwidth {width}·h = {width}·{h} crosses the axis from r_min = {r_min}")]
    StencilCrossesAxis { r_min: f64, h: f64, width: usize },
    #[error("reports cannot be combined: {0}")]
    MismatchedReports(String),
}

/// Uniform rectangular sampling of the (r, z) half-plane, r strictly
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: usize,
}

impl Grid {
    pub fn new(
        r_min: f64,
        r_max: f64,
        n_r: usize,
        z_min: f64,
        z_max: f64,
        n_z: usize,
    ) -> Result<Self, VerifyError> {
        if !(r_min > 0.0) || !r_min.is_finite() {
            return Err(VerifyError::InvalidGrid(format!(
                "r_min must be positive and finite, got {r_min}"
            )));
        }
        if !(r_max > r_min) || !r_max.is_finite() {
            return Err(VerifyError::InvalidGrid(format!(
                "need r_min < r_max < ∞, got [{r_min}, {r_max}]"
            )));
        }
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(VerifyError::InvalidGrid(format!(
                "need z_min < z_max, both finite, got [{z_min}, {z_max}]"
            )));
        }
        if n_r < 4 || n_z < 4 {
            return Err(VerifyError::InvalidGrid(format!(
                "need at least 4 nodes per direction, got {n_r} × {n_z}"
            )));
        }
        Ok(Self {
            r_min,
            r_max,
            n_r,
            z_min,
            z_max,
            n_z,
        })
    }

    pub fn r_at(&self, i: usize) -> f64 {
        self.r_min + (self.r_max - self.r_min) * i as f64 / (self.n_r - 1) as f64
    }

    pub fn z_at(&self, j: usize) -> f64 {
        self.z_min + (self.z_max - self.z_min) * j as f64 / (self.n_z - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes in row-major order, r varying slowest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_r {
            for j in 0..self.n_z {
                out.push((self.r_at(i), self.z_at(j)));
            }
        }
        out
    }
}

impl Default for Grid {
    /// The desk-check grid: r ∈ [0.5, 3], z ∈ [−1, 1], 20 × 20.
    fn default() -> Self {
        Grid::new(0.5, 3.0, 20, -1.0, 1.0, 20).expect("desk grid is valid")
    }
}

/// Which equation set a report measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SystemTag {
    /// The ten first-order equations in ladder-operator form.
    #[serde(rename = "full-9")]
    Full9,
    /// The same ten equations with every radial operator expanded into
    /// explicit ∂_r terms and coefficient polynomials.
    #[serde(rename = "full-7")]
    Full7,
    /// Componentwise helicity eigenvalue equations ΣΨ = σΨ.
    #[serde(rename = "helicity-12")]
    Helicity12,
    /// The σ = 0 massive subsystem in bar variables, plus consistency of
    /// the bar reductions and vanishing of the magnetic triplet.
    #[serde(rename = "sigma0-21")]
    Sigma021,
    /// The massless gradient-family system (field strengths vanish).
    #[serde(rename = "massless-25")]
    Massless25,
    /// The second-order master equation for the scalar slot alone.
    #[serde(rename = "scalar-23a")]
    Scalar23a,
}

impl SystemTag {
    pub fn row_count(self) -> usize {
        match self {
            SystemTag::Scalar23a => 1,
            _ => 10,
        }
    }

    fn labels(self) -> Vec<&'static str> {
        match self {
            SystemTag::Full9 | SystemTag::Full7 | SystemTag::Massless25 => vec![
                "div-e", "curl-h-1", "curl-h-2", "curl-h-3", "e-def-1", "e-def-2", "e-def-3",
                "h-def-1", "h-def-2", "h-def-3",
            ],
            SystemTag::Helicity12 => vec![
                "scalar", "phi-1", "phi-2", "phi-3", "e-1", "e-2", "e-3", "h-1", "h-2", "h-3",
            ],
            SystemTag::Sigma021 => vec![
                "div-e",
                "curl-h-bar",
                "curl-h-2",
                "e-def-2",
                "e-def-bar",
                "phi-bar-consistency",
                "e-bar-consistency",
                "h-1",
                "h-2",
                "h-3",
            ],
            SystemTag::Scalar23a => vec!["master"],
        }
    }
}

impl std::fmt::Display for SystemTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SystemTag::Full9 => "full-9",
            SystemTag::Full7 => "full-7",
            SystemTag::Helicity12 => "helicity-12",
            SystemTag::Sigma021 => "sigma0-21",
            SystemTag::Massless25 => "massless-25",
            SystemTag::Scalar23a => "scalar-23a",
        };
        f.write_str(s)
    }
}

/// Central-difference scheme for the grid derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FdScheme {
    #[serde(rename = "order-2")]
    Order2,
    #[serde(rename = "order-4")]
    Order4,
}

impl FdScheme {
    pub fn order(self) -> u32 {
        match self {
            FdScheme::Order2 => 2,
            FdScheme::Order4 => 4,
        }
    }

    fn halfwidth(self) -> usize {
        match self {
            FdScheme::Order2 => 1,
            FdScheme::Order4 => 2,
        }
    }
}

/// The parameters a residual system needs besides the field itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub epsilon: f64,
    pub sigma: Complex64,
    pub mass: f64,
}

impl From<QuantumNumbers> for SystemParams {
    fn from(qn: QuantumNumbers) -> Self {
        Self {
            epsilon: qn.epsilon,
            sigma: qn.sigma,
            mass: qn.mass,
        }
    }
}

/// Aggregate statistics for one equation of a system.
#[derive(Debug, Clone, Serialize)]
pub struct EquationResidual {
    pub index: usize,
    pub label: String,
    pub max_abs: f64,
    pub rms_abs: f64,
    pub max_rel: f64,
    pub rms_rel: f64,
    /// Observed order from a step-halving pair; None when the residual
    /// sits at the roundoff floor (which counts as converged).
    pub convergence_order: Option<f64>,
}

/// One complex residual with its two normalization scales.
#[derive(Debug, Clone, Copy)]
struct RowOut {
    res: Complex64,
    /// Largest |component| entering the equation; denominator of the
    /// relative residual.
    comp: f64,
    /// Sum of |term| over the printed additive terms; the scale on which
    /// two transcriptions of one equation may differ by rounding.
    terms: f64,
}

/// Residuals of one system over one grid at one step.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub system: SystemTag,
    pub h: f64,
    pub scheme: FdScheme,
    pub grid: Grid,
    pub extrapolated: bool,
    pub flagged_points: usize,
    pub equations: Vec<EquationResidual>,
    #[serde(skip)]
    rows: Vec<Option<Vec<RowOut>>>,
}

impl ResidualReport {
    /// Largest relative residual over all equations.
    pub fn max_relative(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.max_rel))
    }

    /// Largest absolute residual over all equations.
    pub fn max_absolute(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.max_abs))
    }

    fn from_rows(
        system: SystemTag,
        h: f64,
        scheme: FdScheme,
        grid: Grid,
        extrapolated: bool,
        rows: Vec<Option<Vec<RowOut>>>,
    ) -> Self {
        let n_eq = system.row_count();
        let labels = system.labels();
        let mut max_abs = vec![0.0f64; n_eq];
        let mut sum_abs2 = vec![0.0f64; n_eq];
        let mut max_rel = vec![0.0f64; n_eq];
        let mut sum_rel2 = vec![0.0f64; n_eq];
        let mut used = 0usize;
        let mut flagged = 0usize;
        for point in &rows {
            match point {
                Some(rs) => {
                    used += 1;
                    for (e, row) in rs.iter().enumerate() {
                        let abs = row.res.norm();
                        let rel = abs / row.comp.max(1e-30);
                        max_abs[e] = max_abs[e].max(abs);
                        sum_abs2[e] += abs * abs;
                        max_rel[e] = max_rel[e].max(rel);
                        sum_rel2[e] += rel * rel;
                    }
                }
                None => flagged += 1,
            }
        }
        let denom = used.max(1) as f64;
        let equations = (0..n_eq)
            .map(|e| EquationResidual {
                index: e + 1,
                label: labels[e].to_string(),
                max_abs: max_abs[e],
                rms_abs: (sum_abs2[e] / denom).sqrt(),
                max_rel: max_rel[e],
                rms_rel: (sum_rel2[e] / denom).sqrt(),
                convergence_order: None,
            })
            .collect();
        Self {
            system,
            h,
            scheme,
            grid,
            extrapolated,
            flagged_points: flagged,
            equations,
            rows,
        }
    }
}

/// All ten component values with first (and radial/axial second)
/// derivatives at one node.
struct Derivs {
    c: [Complex64; 10],
    dr: [Complex64; 10],
    dz: [Complex64; 10],
    drr: [Complex64; 10],
    dzz: [Complex64; 10],
}

fn finite(t: &TenComponent) -> bool {
    t.is_finite()
}

fn sample_derivs<F: TenComponentField + ?Sized>(
    field: &F,
    r: f64,
    z: f64,
    h: f64,
    scheme: FdScheme,
) -> Option<Derivs> {
    let c0 = field.sample(r, z);
    let pr = field.sample(r + h, z);
    let mr = field.sample(r - h, z);
    let pz = field.sample(r, z + h);
    let mz = field.sample(r, z - h);
    if !(finite(&c0) && finite(&pr) && finite(&mr) && finite(&pz) && finite(&mz)) {
        return None;
    }
    let (c0f, prf, mrf, pzf, mzf) = (
        c0.flatten(),
        pr.flatten(),
        mr.flatten(),
        pz.flatten(),
        mz.flatten(),
    );
    let mut d = Derivs {
        c: c0f,
        dr: [Complex64::default(); 10],
        dz: [Complex64::default(); 10],
        drr: [Complex64::default(); 10],
        dzz: [Complex64::default(); 10],
    };
    match scheme {
        FdScheme::Order2 => {
            for k in 0..10 {
                d.dr[k] = (prf[k] - mrf[k]) / (2.0 * h);
                d.dz[k] = (pzf[k] - mzf[k]) / (2.0 * h);
                d.drr[k] = (prf[k] - 2.0 * c0f[k] + mrf[k]) / (h * h);
                d.dzz[k] = (pzf[k] - 2.0 * c0f[k] + mzf[k]) / (h * h);
            }
        }
        FdScheme::Order4 => {
            let pr2 = field.sample(r + 2.0 * h, z);
            let mr2 = field.sample(r - 2.0 * h, z);
            let pz2 = field.sample(r, z + 2.0 * h);
            let mz2 = field.sample(r, z - 2.0 * h);
            if !(finite(&pr2) && finite(&mr2) && finite(&pz2) && finite(&mz2)) {
                return None;
            }
            let (pr2f, mr2f, pz2f, mz2f) =
                (pr2.flatten(), mr2.flatten(), pz2.flatten(), mz2.flatten());
            for k in 0..10 {
                d.dr[k] = (-pr2f[k] + 8.0 * prf[k] - 8.0 * mrf[k] + mr2f[k]) / (12.0 * h);
                d.dz[k] = (-pz2f[k] + 8.0 * pzf[k] - 8.0 * mzf[k] + mz2f[k]) / (12.0 * h);
                d.drr[k] = (-pr2f[k] + 16.0 * prf[k] - 30.0 * c0f[k] + 16.0 * mrf[k] - mr2f[k])
                    / (12.0 * h * h);
                d.dzz[k] = (-pz2f[k] + 16.0 * pzf[k] - 30.0 * c0f[k] + 16.0 * mzf[k] - mz2f[k])
                    / (12.0 * h * h);
            }
        }
    }
    Some(d)
}

fn row(terms: &[Complex64], comps: &[f64]) -> RowOut {
    let res = terms.iter().sum();
    let term_sum = terms.iter().map(|t| t.norm()).sum();
    let comp = comps.iter().fold(0.0f64, |m, &c| m.max(c));
    RowOut {
        res,
        comp,
        terms: term_sum,
    }
}

// Component indices in flatten order.
const P0: usize = 0;
const P1: usize = 1;
const P2: usize = 2;
const P3: usize = 3;
const E1: usize = 4;
const E2: usize = 5;
const E3: usize = 6;
const H1: usize = 7;
const H2: usize = 8;
const H3: usize = 9;

/// Ladder-operator form: radial operators applied as γ(±∂_r + c/r).
fn rows_full9(p: &SystemParams, m: f64, r: f64, z: f64, d: &Derivs) -> Vec<RowOut> {
    let i = Complex64::i();
    let ez = z.exp();
    let mm = p.mass;
    let eps = p.epsilon;
    let a = |k: usize| GAMMA * (d.dr[k] + m / r * d.c[k]);
    let b = |k: usize| GAMMA * (-d.dr[k] + m / r * d.c[k]);
    let ap = |k: usize| GAMMA * (d.dr[k] + (m + 1.0) / r * d.c[k]);
    let bm = |k: usize| GAMMA * (-d.dr[k] + (m - 1.0) / r * d.c[k]);
    let n = |k: usize| d.c[k].norm();
    vec![
        row(
            &[
                -ez * bm(E1),
                -ez * ap(E3),
                -(d.dz[E2] - 2.0 * d.c[E2]),
                -mm * d.c[P0],
            ],
            &[n(E1), n(E3), n(E2), n(P0)],
        ),
        row(
            &[
                i * ez * a(H2),
                i * eps * d.c[E1],
                i * (d.dz[H1] - d.c[H1]),
                -mm * d.c[P1],
            ],
            &[n(H2), n(E1), n(H1), n(P1)],
        ),
        row(
            &[
                -i * ez * bm(H1),
                i * ez * ap(H3),
                i * eps * d.c[E2],
                -mm * d.c[P2],
            ],
            &[n(H1), n(H3), n(E2), n(P2)],
        ),
        row(
            &[
                -i * ez * b(H2),
                i * eps * d.c[E3],
                -i * (d.dz[H3] - d.c[H3]),
                -mm * d.c[P3],
            ],
            &[n(H2), n(E3), n(H3), n(P3)],
        ),
        row(
            &[ez * a(P0), -i * eps * d.c[P1], -mm * d.c[E1]],
            &[n(P0), n(P1), n(E1)],
        ),
        row(
            &[-i * eps * d.c[P2], -d.dz[P0], -mm * d.c[E2]],
            &[n(P2), n(P0), n(E2)],
        ),
        row(
            &[ez * b(P0), -i * eps * d.c[P3], -mm * d.c[E3]],
            &[n(P0), n(P3), n(E3)],
        ),
        row(
            &[-i * ez * a(P2), -i * (d.dz[P1] - d.c[P1]), -mm * d.c[H1]],
            &[n(P2), n(P1), n(H1)],
        ),
        row(
            &[i * ez * bm(P1), -i * ez * ap(P3), -mm * d.c[H2]],
            &[n(P1), n(P3), n(H2)],
        ),
        row(
            &[i * ez * b(P2), i * (d.dz[P3] - d.c[P3]), -mm * d.c[H3]],
            &[n(P2), n(P3), n(H3)],
        ),
    ]
}

/// Expanded form: the same ten equations with each radial operator
/// multiplied out into separate ∂_r and coefficient terms.
fn rows_full7(p: &SystemParams, m: f64, r: f64, z: f64, d: &Derivs) -> Vec<RowOut> {
    let i = Complex64::i();
    let ez = z.exp();
    let ge = GAMMA * ez;
    let mm = p.mass;
    let eps = p.epsilon;
    let n = |k: usize| d.c[k].norm();
    vec![
        row(
            &[
                ge * (d.dr[E1] - d.dr[E3]),
                -(ge / r) * ((m - 1.0) * d.c[E1] + (m + 1.0) * d.c[E3]),
                -(d.dz[E2] - 2.0 * d.c[E2]),
                -mm * d.c[P0],
            ],
            &[n(E1), n(E3), n(E2), n(P0)],
        ),
        row(
            &[
                i * eps * d.c[E1],
                i * ge * d.dr[H2],
                i * (ge * (m / r)) * d.c[H2],
                i * (d.dz[H1] - d.c[H1]),
                -mm * d.c[P1],
            ],
            &[n(E1), n(H2), n(H1), n(P1)],
        ),
        row(
            &[
                i * eps * d.c[E2],
                i * ge * (d.dr[H1] + d.dr[H3]),
                -i * (ge / r) * ((m - 1.0) * d.c[H1] - (m + 1.0) * d.c[H3]),
                -mm * d.c[P2],
            ],
            &[n(E2), n(H1), n(H3), n(P2)],
        ),
        row(
            &[
                i * eps * d.c[E3],
                i * ge * d.dr[H2],
                -i * (ge * (m / r)) * d.c[H2],
                -i * (d.dz[H3] - d.c[H3]),
                -mm * d.c[P3],
            ],
            &[n(E3), n(H2), n(H3), n(P3)],
        ),
        row(
            &[
                -i * eps * d.c[P1],
                ge * d.dr[P0],
                (ge * (m / r)) * d.c[P0],
                -mm * d.c[E1],
            ],
            &[n(P1), n(P0), n(E1)],
        ),
        row(
            &[-i * eps * d.c[P2], -d.dz[P0], -mm * d.c[E2]],
            &[n(P2), n(P0), n(E2)],
        ),
        row(
            &[
                -i * eps * d.c[P3],
                -ge * d.dr[P0],
                (ge * (m / r)) * d.c[P0],
                -mm * d.c[E3],
            ],
            &[n(P3), n(P0), n(E3)],
        ),
        row(
            &[
                -i * ge * d.dr[P2],
                -i * (ge * (m / r)) * d.c[P2],
                -i * (d.dz[P1] - d.c[P1]),
                -mm * d.c[H1],
            ],
            &[n(P2), n(P1), n(H1)],
        ),
        row(
            &[
                -i * ge * (d.dr[P1] + d.dr[P3]),
                i * (ge / r) * ((m - 1.0) * d.c[P1] - (m + 1.0) * d.c[P3]),
                -mm * d.c[H2],
            ],
            &[n(P1), n(P3), n(H2)],
        ),
        row(
            &[
                -i * ge * d.dr[P2],
                i * (ge * (m / r)) * d.c[P2],
                i * (d.dz[P3] - d.c[P3]),
                -mm * d.c[H3],
            ],
            &[n(P2), n(P3), n(H3)],
        ),
    ]
}

/// σ = 0 massive subsystem in bar variables, reconstructed from the raw
/// components: φ_j = e^{−z}Φ_j (j = 1, 3), φ₂ = e^{−2z}Φ₂, the same for
/// the electric triplet, φ̄ = ½(b₋φ₁ + a₊φ₃), ē likewise. Two extra rows
/// pin the bar reductions themselves (b₋φ₁ = a₊φ₃ and the electric
/// counterpart) and three more require the magnetic triplet to vanish.
fn rows_sigma021(p: &SystemParams, m: f64, r: f64, z: f64, d: &Derivs) -> Vec<RowOut> {
    let i = Complex64::i();
    let eps = p.epsilon;
    let mm = p.mass;
    let em1 = (-z).exp();
    let em2 = em1 * em1;
    let phi1 = em1 * d.c[P1];
    let phi3 = em1 * d.c[P3];
    let phi2 = em2 * d.c[P2];
    let e1 = em1 * d.c[E1];
    let e3 = em1 * d.c[E3];
    let e2 = em2 * d.c[E2];
    let bm_phi1 = GAMMA * (-em1 * d.dr[P1] + (m - 1.0) / r * phi1);
    let ap_phi3 = GAMMA * (em1 * d.dr[P3] + (m + 1.0) / r * phi3);
    let bm_e1 = GAMMA * (-em1 * d.dr[E1] + (m - 1.0) / r * e1);
    let ap_e3 = GAMMA * (em1 * d.dr[E3] + (m + 1.0) / r * e3);
    let phi_bar = 0.5 * (bm_phi1 + ap_phi3);
    let e_bar = 0.5 * (bm_e1 + ap_e3);
    let dz_e2 = em2 * (d.dz[E2] - 2.0 * d.c[E2]);
    let delta_phi0 = 0.5 * (-d.drr[P0] - d.dr[P0] / r + (m * m) / (r * r) * d.c[P0]);
    let n = |k: usize| d.c[k].norm();
    vec![
        row(
            &[-2.0 * e_bar, -dz_e2, -mm * em2 * d.c[P0]],
            &[e_bar.norm(), e2.norm(), em2 * n(P0)],
        ),
        row(
            &[i * eps * e_bar, -mm * phi_bar],
            &[e_bar.norm(), phi_bar.norm()],
        ),
        row(&[i * eps * e2, -mm * phi2], &[e2.norm(), phi2.norm()]),
        row(
            &[-i * eps * d.c[P2], -d.dz[P0], -mm * d.c[E2]],
            &[n(P2), n(P0), n(E2)],
        ),
        row(
            &[delta_phi0, -i * eps * phi_bar, -mm * e_bar],
            &[n(P0), phi_bar.norm(), e_bar.norm()],
        ),
        row(&[bm_phi1, -ap_phi3], &[phi1.norm(), phi3.norm()]),
        row(&[bm_e1, -ap_e3], &[e1.norm(), e3.norm()]),
        row(&[d.c[H1]], &[n(H1)]),
        row(&[d.c[H2]], &[n(H2)]),
        row(&[d.c[H3]], &[n(H3)]),
    ]
}

/// Massless gradient-family system: the full equations at M = 0 with the
/// field strengths eliminated componentwise.
fn rows_massless25(p: &SystemParams, m: f64, r: f64, z: f64, d: &Derivs) -> Vec<RowOut> {
    let i = Complex64::i();
    let ez = z.exp();
    let eps = p.epsilon;
    let sg = p.sigma;
    let a = |k: usize| GAMMA * (d.dr[k] + m / r * d.c[k]);
    let b = |k: usize| GAMMA * (-d.dr[k] + m / r * d.c[k]);
    let ap = |k: usize| GAMMA * (d.dr[k] + (m + 1.0) / r * d.c[k]);
    let bm = |k: usize| GAMMA * (-d.dr[k] + (m - 1.0) / r * d.c[k]);
    let n = |k: usize| d.c[k].norm();
    vec![
        row(
            &[-ez * bm(E1), -ez * ap(E3), -(d.dz[E2] - 2.0 * d.c[E2])],
            &[n(E1), n(E3), n(E2)],
        ),
        row(&[i * eps * d.c[E1], i * sg * d.c[H1]], &[n(E1), n(H1)]),
        row(&[i * sg * d.c[H2], i * eps * d.c[E2]], &[n(H2), n(E2)]),
        row(&[i * eps * d.c[E3], i * sg * d.c[H3]], &[n(E3), n(H3)]),
        row(
            &[ez * a(P0), -i * eps * d.c[P1], -d.c[E1]],
            &[n(P0), n(P1), n(E1)],
        ),
        row(
            &[-i * eps * d.c[P2], -d.dz[P0], -d.c[E2]],
            &[n(P2), n(P0), n(E2)],
        ),
        row(
            &[ez * b(P0), -i * eps * d.c[P3], -d.c[E3]],
            &[n(P0), n(P3), n(E3)],
        ),
        row(&[-i * sg * d.c[P1], -d.c[H1]], &[n(P1), n(H1)]),
        row(&[-i * sg * d.c[P2], -d.c[H2]], &[n(P2), n(H2)]),
        row(&[-i * sg * d.c[P3], -d.c[H3]], &[n(P3), n(H3)]),
    ]
}

/// Second-order master equation for the scalar slot:
/// 2ΔΦ₀ − ∂_z(e^{−2z}∂_zΦ₀) − (ε² − M²)e^{−2z}Φ₀ = 0, with the axial
/// part expanded as e^{−2z}(Φ₀'' − 2Φ₀').
fn rows_scalar23a(p: &SystemParams, m: f64, r: f64, z: f64, d: &Derivs) -> Vec<RowOut> {
    let em2 = (-2.0 * z).exp();
    let t1 = -d.drr[P0] - d.dr[P0] / r + (m * m) / (r * r) * d.c[P0];
    let t2 = -em2 * (d.dzz[P0] - 2.0 * d.dz[P0]);
    let t3 = -(p.epsilon * p.epsilon - p.mass * p.mass) * em2 * d.c[P0];
    vec![row(
        &[t1, t2, t3],
        &[d.c[P0].norm(), t1.norm(), t2.norm(), t3.norm()],
    )]
}

fn helicity_rows<F: TenComponentField + ?Sized>(
    field: &F,
    p: &SystemParams,
    r: f64,
    z: f64,
    h: f64,
) -> Option<Vec<RowOut>> {
    let c = field.sample(r, z);
    if !c.is_finite() {
        return None;
    }
    let point = FieldPoint::new(r, z).ok()?;
    let applied = helicity_apply(field, &point, h).ok()?;
    if !applied.is_finite() {
        return None;
    }
    let sg = p.sigma;
    let mut out = Vec::with_capacity(10);
    out.push(row(&[applied.phi0, -sg * c.phi0], &[c.phi0.norm()]));
    let triplets = [(applied.phi, c.phi), (applied.e, c.e), (applied.h, c.h)];
    for (av, cv) in triplets {
        let scales = [
            [cv[0].norm(), cv[1].norm()],
            [cv[0].norm(), cv[2].norm().max(cv[1].norm())],
            [cv[1].norm(), cv[2].norm()],
        ];
        for s in 0..3 {
            out.push(row(&[av[s], -sg * cv[s]], &scales[s]));
        }
    }
    Some(out)
}

/// Evaluates every equation of `system` at every node of `grid`, with
/// central differences of step `h` under `scheme`. The helicity system
/// always differentiates at 2nd order through the operator applicator.
/// Non-finite samples mark their node as flagged rather than poisoning
/// the aggregates.
pub fn residual_system_with<F: TenComponentField + ?Sized>(
    field: &F,
    params: SystemParams,
    grid: &Grid,
    h: f64,
    system: SystemTag,
    scheme: FdScheme,
) -> Result<ResidualReport, VerifyError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(VerifyError::InvalidStep(h));
    }
    let width = match system {
        SystemTag::Helicity12 => 1,
        _ => scheme.halfwidth(),
    };
    if grid.r_min - width as f64 * h <= 0.0 {
        return Err(VerifyError::StencilCrossesAxis {
            r_min: grid.r_min,
            h,
            width,
        });
    }
    let m = field.azimuthal() as f64;
    let points = grid.points();
    let rows: Vec<Option<Vec<RowOut>>> = points
        .par_iter()
        .map(|&(r, z)| match system {
            SystemTag::Helicity12 => helicity_rows(field, &params, r, z, h),
            _ => {
                let d = sample_derivs(field, r, z, h, scheme)?;
                Some(match system {
                    SystemTag::Full9 => rows_full9(&params, m, r, z, &d),
                    SystemTag::Full7 => rows_full7(&params, m, r, z, &d),
                    SystemTag::Sigma021 => rows_sigma021(&params, m, r, z, &d),
                    SystemTag::Massless25 => rows_massless25(&params, m, r, z, &d),
                    SystemTag::Scalar23a => rows_scalar23a(&params, m, r, z, &d),
                    SystemTag::Helicity12 => unreachable!(),
                })
            }
        })
        .collect();
    Ok(ResidualReport::from_rows(
        system, h, scheme, *grid, false, rows,
    ))
}

/// [`residual_system_with`] for an assembled mode, taking the parameters
/// from its quantum numbers and the default 2nd-order scheme.
pub fn residual_system(
    mode: &ModeField,
    grid: &Grid,
    h: f64,
    system: SystemTag,
) -> Result<ResidualReport, VerifyError> {
    residual_system_with(
        mode,
        mode.quantum_numbers().into(),
        grid,
        h,
        system,
        FdScheme::Order2,
    )
}

/// Helicity eigenvalue residual ΣΨ − σΨ of an assembled mode.
pub fn residual_helicity(
    mode: &ModeField,
    grid: &Grid,
    h: f64,
) -> Result<ResidualReport, VerifyError> {
    residual_system(mode, grid, h, SystemTag::Helicity12)
}

/// Largest pointwise disagreement between two reports of the same shape,
/// relative to the local sum of term magnitudes: the scale on which two
/// transcriptions of one system can differ by rounding alone. Two row
/// layouts of the same equations should agree to a few machine epsilon.
pub fn transcription_distance(a: &ResidualReport, b: &ResidualReport) -> Result<f64, VerifyError> {
    if a.grid != b.grid
        || a.h != b.h
        || a.scheme != b.scheme
        || a.system.row_count() != b.system.row_count()
    {
        return Err(VerifyError::MismatchedReports(
            "reports must share grid, step, scheme, and row count".into(),
        ));
    }
    let mut worst = 0.0f64;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        match (ra, rb) {
            (Some(va), Some(vb)) => {
                for (x, y) in va.iter().zip(vb) {
                    let scale = x.terms.max(y.terms).max(1e-30);
                    worst = worst.max((x.res - y.res).norm() / scale);
                }
            }
            (None, None) => {}
            _ => {
                return Err(VerifyError::MismatchedReports(
                    "flagged points differ between the reports".into(),
                ))
            }
        }
    }
    Ok(worst)
}

/// Combines reports at steps h and h/2 into the step-extrapolated report
/// (2^p·R(h/2) − R(h))/(2^p − 1) per node per equation, p the scheme
/// order, and attaches the observed convergence order
/// log₂(RMS(h)/RMS(h/2)) to each equation. Orders are omitted when the
/// fine residual sits at the roundoff floor; a genuinely violated
/// equation shows up as an order near zero and an extrapolated residual
/// that stays put.
pub fn richardson(
    coarse: &ResidualReport,
    fine: &ResidualReport,
) -> Result<ResidualReport, VerifyError> {
    if coarse.system != fine.system {
        return Err(VerifyError::MismatchedReports(format!(
            "systems differ: {} vs {}",
            coarse.system, fine.system
        )));
    }
    if coarse.scheme != fine.scheme {
        return Err(VerifyError::MismatchedReports(
            "finite-difference schemes differ".into(),
        ));
    }
    if coarse.grid != fine.grid {
        return Err(VerifyError::MismatchedReports(
            "grids differ; extrapolation needs pointwise-matching nodes".into(),
        ));
    }
    let ratio = coarse.h / fine.h;
    if !((ratio - 2.0).abs() <= 1e-9) {
        return Err(VerifyError::MismatchedReports(format!(
            "step ratio must be 2, got {ratio} (h = {}, {})",
            coarse.h, fine.h
        )));
    }
    let p = 2.0f64.powi(coarse.scheme.order() as i32);
    let rows: Vec<Option<Vec<RowOut>>> = coarse
        .rows
        .iter()
        .zip(&fine.rows)
        .map(|(c, f)| match (c, f) {
            (Some(cr), Some(fr)) => Some(
                cr.iter()
                    .zip(fr)
                    .map(|(a, b)| RowOut {
                        res: (p * b.res - a.res) / (p - 1.0),
                        comp: b.comp,
                        terms: b.terms,
                    })
                    .collect(),
            ),
            _ => None,
        })
        .collect();
    let mut out =
        ResidualReport::from_rows(fine.system, fine.h, fine.scheme, fine.grid, true, rows);
    for (e, eq) in out.equations.iter_mut().enumerate() {
        let c_rms = coarse.equations[e].rms_abs;
        let f_rms = fine.equations[e].rms_abs;
        let at_floor = fine.equations[e].max_rel <= 1e-12;
        eq.convergence_order = if c_rms > 0.0 && f_rms > 0.0 && !at_floor {
            Some((c_rms / f_rms).log2())
        } else {
            None
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::modes::{
        build_mode_massless_gradient, build_mode_sigma, build_mode_sigma0_massive,
        scalar_master_potential, AxialKind, PotentialJet, QuantumNumbers, RadialKind,
        ScalarPotential,
    };
    use crate::operators::ClosureField;

    fn params(epsilon: f64, sigma: Complex64, mass: f64) -> SystemParams {
        SystemParams {
            epsilon,
            sigma,
            mass,
        }
    }

    const ALL_TAGS: [SystemTag; 6] = [
        SystemTag::Full9,
        SystemTag::Full7,
        SystemTag::Helicity12,
        SystemTag::Sigma021,
        SystemTag::Massless25,
        SystemTag::Scalar23a,
    ];

    #[test]
    fn zero_field_has_zero_residual_everywhere() {
        let field = ClosureField {
            m: 1,
            f: |_, _| TenComponent::ZERO,
        };
        let grid = Grid::default();
        for tag in ALL_TAGS {
            let rep = residual_system_with(
                &field,
                params(1.0, c64(0.0, 1.0), 1.0),
                &grid,
                1e-3,
                tag,
                FdScheme::Order2,
            )
            .unwrap();
            assert_eq!(rep.flagged_points, 0);
            assert_eq!(rep.max_absolute(), 0.0, "{tag}");
            assert_eq!(rep.max_relative(), 0.0, "{tag}");
            assert_eq!(rep.equations.len(), tag.row_count());
        }
    }

    #[test]
    fn grid_and_step_validation() {
        assert!(Grid::new(0.0, 3.0, 20, -1.0, 1.0, 20).is_err());
        assert!(Grid::new(3.0, 0.5, 20, -1.0, 1.0, 20).is_err());
        assert!(Grid::new(0.5, 3.0, 3, -1.0, 1.0, 20).is_err());
        assert!(Grid::new(0.5, 3.0, 20, 1.0, -1.0, 20).is_err());
        let field = ClosureField {
            m: 0,
            f: |_, _| TenComponent::ZERO,
        };
        let grid = Grid::default();
        let p = params(1.0, c64(0.0, 0.0), 1.0);
        assert!(matches!(
            residual_system_with(&field, p, &grid, 0.6, SystemTag::Full9, FdScheme::Order2),
            Err(VerifyError::StencilCrossesAxis { .. })
        ));
        assert!(matches!(
            residual_system_with(&field, p, &grid, 0.3, SystemTag::Full9, FdScheme::Order4),
            Err(VerifyError::StencilCrossesAxis { .. })
        ));
        assert!(
            residual_system_with(&field, p, &grid, -1.0, SystemTag::Full9, FdScheme::Order2)
                .is_err()
        );
    }

    /// Smooth bounded field with every component active; no equation of
    /// the system is satisfied, which is irrelevant here.
    fn arbitrary_field() -> ClosureField<impl Fn(f64, f64) -> TenComponent + Sync> {
        ClosureField {
            m: 1,
            f: |r, z| {
                let f = |a: f64, b: f64, ph: f64| {
                    c64(
                        0.5 * (a * r + b * z + ph).sin(),
                        0.3 * (b * r - a * z).cos(),
                    )
                };
                TenComponent {
                    phi0: f(1.1, 0.7, 0.2),
                    phi: [f(0.9, 1.3, 0.5), f(1.4, 0.6, 1.1), f(0.8, 1.0, 1.9)],
                    e: [f(1.2, 0.9, 0.4), f(0.7, 1.5, 2.3), f(1.0, 0.8, 0.9)],
                    h: [f(1.3, 1.1, 1.4), f(0.6, 0.9, 0.7), f(1.5, 1.2, 2.8)],
                }
            },
        }
    }

    #[test]
    fn expanded_and_ladder_forms_agree_to_rounding() {
        let field = arbitrary_field();
        let grid = Grid::default();
        let p = params(1.3, c64(0.2, 0.4), 0.9);
        let r9 = residual_system_with(&field, p, &grid, 1e-3, SystemTag::Full9, FdScheme::Order2)
            .unwrap();
        let r7 = residual_system_with(&field, p, &grid, 1e-3, SystemTag::Full7, FdScheme::Order2)
            .unwrap();
        let worst = transcription_distance(&r9, &r7).unwrap();
        assert!(
            worst <= 10.0 * f64::EPSILON,
            "worst transcription disagreement {worst:e}"
        );
        let other = Grid::new(0.6, 2.0, 8, -0.5, 0.5, 8).unwrap();
        let r9b = residual_system_with(&field, p, &other, 1e-3, SystemTag::Full9, FdScheme::Order2)
            .unwrap();
        assert!(transcription_distance(&r9b, &r7).is_err());
    }

    fn sigma_mode(sigma_im: f64) -> ModeField {
        let qn = QuantumNumbers {
            epsilon: 2.0f64.sqrt(),
            m: 1,
            sigma: c64(0.0, sigma_im),
            lambda: 1.0,
            mass: 1.0,
        };
        build_mode_sigma(qn, RadialKind::J, AxialKind::Decaying).unwrap()
    }

    #[test]
    fn sigma_mode_solves_full_system_after_extrapolation() {
        let mode = sigma_mode(1.0);
        let grid = Grid::default();
        let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Full9).unwrap();
        let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Full9).unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        assert_eq!(ext.flagged_points, 0);
        assert!(
            ext.max_relative() <= 1e-6,
            "extrapolated max relative {:e}",
            ext.max_relative()
        );
        for eq in &ext.equations {
            if let Some(ord) = eq.convergence_order {
                assert!((1.8..=2.2).contains(&ord), "{}: order {ord}", eq.label);
            }
        }
    }

    #[test]
    fn sigma_mode_solves_helicity_after_extrapolation() {
        let mode = sigma_mode(1.0);
        let grid = Grid::default();
        let coarse = residual_helicity(&mode, &grid, 1e-3).unwrap();
        let fine = residual_helicity(&mode, &grid, 5e-4).unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        assert!(
            ext.max_relative() <= 1e-6,
            "extrapolated max relative {:e}",
            ext.max_relative()
        );
    }

    #[test]
    fn detuned_sigma_is_not_a_solution() {
        let mode = sigma_mode(1.1);
        let grid = Grid::default();
        let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Full9).unwrap();
        let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Full9).unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        assert!(
            ext.max_relative() > 1e-3,
            "detuned mode slipped through: {:e}",
            ext.max_relative()
        );
        // The violation is algebraic, so halving the step does not shrink
        // it: the observed order collapses on the violated rows.
        let violated = ext.equations.iter().filter(|e| e.max_rel > 1e-3).count();
        assert!(
            violated >= 3,
            "expected the three coupled rows, got {violated}"
        );
    }

    #[test]
    fn sigma0_mode_satisfies_its_subsystem_and_master_equation() {
        let qn = QuantumNumbers {
            epsilon: 1.2,
            m: 1,
            sigma: c64(0.0, 0.0),
            lambda: 1.0,
            mass: 1.0,
        };
        let mode = build_mode_sigma0_massive(qn, RadialKind::J, AxialKind::Decaying).unwrap();
        let grid = Grid::default();

        let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Sigma021).unwrap();
        let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Sigma021).unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        assert!(
            ext.max_relative() <= 1e-6,
            "sigma0 subsystem: {:e}",
            ext.max_relative()
        );
        // Magnetic rows vanish identically, not just to FD accuracy.
        for eq in &ext.equations[7..10] {
            assert_eq!(eq.max_abs, 0.0, "{}", eq.label);
        }

        let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Scalar23a).unwrap();
        let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Scalar23a).unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        assert!(
            ext.max_relative() <= 1e-7,
            "master equation: {:e}",
            ext.max_relative()
        );

        // The same construction also closes the full first-order system.
        let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Full9).unwrap();
        let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Full9).unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        assert!(
            ext.max_relative() <= 1e-6,
            "full system on sigma0 mode: {:e}",
            ext.max_relative()
        );
    }

    #[test]
    fn massless_modes_satisfy_their_system() {
        let grid = Grid::default();
        let bump = ScalarPotential::from_jet(1, |r, z| {
            let g = (-(r - 1.5) * (r - 1.5) - z * z).exp();
            PotentialJet {
                value: c64(g, 0.0),
                dr: c64(-2.0 * (r - 1.5) * g, 0.0),
                dz: c64(-2.0 * z * g, 0.0),
            }
        });
        let separated = scalar_master_potential(
            1,
            1.0,
            2.0f64.sqrt(),
            0.0,
            RadialKind::J,
            AxialKind::Decaying,
        )
        .unwrap();
        for pot in [bump, separated] {
            let mode = build_mode_massless_gradient(pot, 2.0f64.sqrt()).unwrap();
            let coarse = residual_system(&mode, &grid, 1e-3, SystemTag::Massless25).unwrap();
            let fine = residual_system(&mode, &grid, 5e-4, SystemTag::Massless25).unwrap();
            let ext = richardson(&coarse, &fine).unwrap();
            assert!(
                ext.max_relative() <= 1e-6,
                "massless system: {:e}",
                ext.max_relative()
            );
            // Strength rows are identities: E and H vanish by construction.
            for idx in [1, 2, 3, 7, 8, 9] {
                assert_eq!(
                    ext.equations[idx].max_abs, 0.0,
                    "{}",
                    ext.equations[idx].label
                );
            }
        }
    }

    #[test]
    fn richardson_rejects_mismatched_reports() {
        let mode = sigma_mode(1.0);
        let grid = Grid::default();
        let other = Grid::new(0.5, 3.0, 20, -1.0, 1.0, 21).unwrap();
        let a = residual_system(&mode, &grid, 1e-3, SystemTag::Full9).unwrap();
        let b = residual_system(&mode, &grid, 4e-4, SystemTag::Full9).unwrap();
        assert!(richardson(&a, &b).is_err());
        let c = residual_system(&mode, &other, 5e-4, SystemTag::Full9).unwrap();
        assert!(richardson(&a, &c).is_err());
        let d = residual_helicity(&mode, &grid, 5e-4).unwrap();
        assert!(richardson(&a, &d).is_err());
    }

    #[test]
    fn scalar_only_field_fails_helicity_by_sigma_phi0() {
        let field = ClosureField {
            m: 0,
            f: |r, z| {
                let mut t = TenComponent::ZERO;
                t.phi0 = c64((-(r - 1.0) * (r - 1.0) - z * z).exp(), 0.0);
                t
            },
        };
        let grid = Grid::default();
        let sigma = c64(0.0, 0.7);
        let rep = residual_system_with(
            &field,
            params(1.0, sigma, 1.0),
            &grid,
            1e-3,
            SystemTag::Helicity12,
            FdScheme::Order2,
        )
        .unwrap();
        // Scalar row: residual is exactly |σ|·|Φ₀|, relative residual |σ|.
        let scalar = &rep.equations[0];
        assert!((scalar.max_rel - sigma.norm()).abs() <= 1e-12);
        assert!(scalar.max_abs > 0.0);
        // All other rows untouched: only Φ₀ is populated.
        for eq in &rep.equations[1..] {
            assert_eq!(eq.max_abs, 0.0, "{}", eq.label);
        }
    }

    #[test]
    fn fourth_order_scheme_converges_faster() {
        let mode = sigma_mode(1.0);
        let grid = Grid::default();
        let p: SystemParams = mode.quantum_numbers().into();
        let coarse =
            residual_system_with(&mode, p, &grid, 2e-2, SystemTag::Full9, FdScheme::Order4)
                .unwrap();
        let fine = residual_system_with(&mode, p, &grid, 1e-2, SystemTag::Full9, FdScheme::Order4)
            .unwrap();
        let ext = richardson(&coarse, &fine).unwrap();
        for eq in &ext.equations {
            if let Some(ord) = eq.convergence_order {
                assert!((3.5..=4.5).contains(&ord), "{}: order {ord}", eq.label);
            }
        }
        assert!(ext.max_relative() < 1e-6);
    }

    #[test]
    fn json_serialization_carries_the_stats() {
        let mode = sigma_mode(1.0);
        let grid = Grid::new(0.6, 2.0, 4, -0.5, 0.5, 4).unwrap();
        let rep = residual_system(&mode, &grid, 1e-3, SystemTag::Full9).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"system\":\"full-9\""));
        assert!(text.contains("\"max_rel\""));
        assert!(text.contains("\"grid\""));
        assert!(!text.contains("rows"));
    }
}
