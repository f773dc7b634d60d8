//! Gamma-function helpers for the cylinder-function kernels.

use std::f64::consts::PI;

/// Lanczos coefficients, g = 7, 9 terms. Relative accuracy ~1e-15 on the
/// positive real axis. Kept digit-for-digit as published.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real x away from the poles at non-positive integers.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos sum on x ≥ 0.5.
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        let t = x + 7.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Odd-power coefficients of 1/Γ(1+x) = 1 + Σ_k c_k x^k (the x¹, x³, x⁵, x⁷,
/// x⁹ entries), which drive the small-μ expansion of `gam1`.
const RECIP_GAMMA_ODD: [f64; 5] = [
    0.577_215_664_901_532_9,
    -0.042_002_635_034_095_2,
    -0.042_197_734_555_544_3,
    0.007_218_943_246_663,
    -0.000_215_241_674_114_9,
];

/// Temme's auxiliary gamma combinations for |μ| ≤ 1/2.
#[derive(Debug, Clone, Copy)]
pub struct GammaAux {
    /// (1/Γ(1−μ) − 1/Γ(1+μ)) / (2μ), continuous at μ = 0 with value γ_E·(−1).
    pub gam1: f64,
    /// (1/Γ(1−μ) + 1/Γ(1+μ)) / 2.
    pub gam2: f64,
    /// 1/Γ(1+μ).
    pub recip_plus: f64,
    /// 1/Γ(1−μ).
    pub recip_minus: f64,
}

/// Evaluates the four gamma combinations the Temme series need.
///
/// The difference quotient in `gam1` cancels catastrophically as μ → 0, so
/// below |μ| = 0.05 it switches to the odd-coefficient series of 1/Γ(1+x);
/// the first omitted term is ≤ 1e-17 there.
pub fn gamma_aux(mu: f64) -> GammaAux {
    debug_assert!(mu.abs() <= 0.5 + 1e-12, "gamma_aux needs |μ| ≤ 1/2");
    let recip_plus = 1.0 / gamma(1.0 + mu);
    let recip_minus = 1.0 / gamma(1.0 - mu);
    let gam1 = if mu.abs() < 0.05 {
        let m2 = mu * mu;
        let c = &RECIP_GAMMA_ODD;
        -(c[0] + m2 * (c[1] + m2 * (c[2] + m2 * (c[3] + m2 * c[4]))))
    } else {
        (recip_minus - recip_plus) / (2.0 * mu)
    };
    let gam2 = 0.5 * (recip_minus + recip_plus);
    GammaAux {
        gam1,
        gam2,
        recip_plus,
        recip_minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_small_integers_and_halves() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(2.0) - 1.0).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 24.0 * 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        // Γ(−1/2) = −2√π by the functional equation.
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gamma_functional_equation() {
        for &x in &[0.3, 1.7, 3.2, 6.9] {
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!((lhs - rhs).abs() < 1e-13 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn gamma_aux_limits_and_continuity() {
        let a = gamma_aux(0.0);
        // gam1(0) = −γ_E, gam2(0) = 1.
        assert!((a.gam1 + 0.577_215_664_901_532_9).abs() < 1e-15);
        assert!((a.gam2 - 1.0).abs() < 1e-15);

        // The series and quotient branches agree around the switch point.
        for &mu in &[0.049, 0.051] {
            let quotient = (1.0 / gamma(1.0 - mu) - 1.0 / gamma(1.0 + mu)) / (2.0 * mu);
            assert!((gamma_aux(mu).gam1 - quotient).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_aux_reconstructs_reciprocals() {
        for &mu in &[-0.5, -0.2, 0.1, 0.37, 0.5] {
            let a = gamma_aux(mu);
            assert!((a.gam2 - mu * a.gam1 - a.recip_plus).abs() < 1e-14);
            assert!((a.gam2 + mu * a.gam1 - a.recip_minus).abs() < 1e-14);
        }
    }
}
