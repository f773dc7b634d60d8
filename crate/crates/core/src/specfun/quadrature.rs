//! Quadrature engines for the imaginary-order Macdonald integral.
//!
//! Two deliberately different rules: an adaptive Simpson scheme (the primary
//! route, with a per-interval error estimate) and a composite Gauss-Legendre
//! rule with runtime-computed nodes (the cross-check route). Agreement of
//! the two on the same integrand is part of the acceptance surface of the
//! crate, so they share no machinery beyond the integrand itself.

/// Result of a quadrature pass.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOutcome {
    pub value: f64,
    /// Accumulated local error estimate (absolute).
    pub error_estimate: f64,
}

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`, with recursion depth capped at `max_depth`.
///
/// Classic bisection scheme: an interval is accepted when the five-point
/// refinement S₂ differs from the three-point estimate S₁ by at most 15·tol,
/// and the returned value then carries the (S₂ − S₁)/15 Richardson tail.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> QuadratureOutcome {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut out = QuadratureOutcome {
        value: 0.0,
        error_estimate: 0.0,
    };
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut QuadratureOutcome,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    let delta = refined - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        out.value += refined + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

/// Gauss-Legendre nodes and weights on (−1, 1), computed by Newton iteration
/// on the Legendre recurrence. No tabulated constants: the rule is fully
/// determined by `n`, which keeps this route independent of any coefficient
/// transcription.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Legendre rule needs n ≥ 2");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based starting guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, dpx) = legendre_with_derivative(n, x);
            dp = dpx;
            let dx = -p / dpx;
            x += dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// P_n(x) and P'_n(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre integration of `f` over [a, b] with `panels`
/// equal panels of an `n`-point rule.
pub fn composite_gauss_legendre<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    n: usize,
) -> f64 {
    let (nodes, weights) = gauss_legendre_rule(n);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        let mut panel = 0.0;
        for (t, w) in nodes.iter().zip(weights.iter()) {
            panel += w * f(mid + half * t);
        }
        total += panel * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for &n in &[2usize, 5, 8, 16, 20] {
            let (nodes, weights) = gauss_legendre_rule(n);
            let sum: f64 = weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n = {n}: Σw = {sum}");
            // Nodes are symmetric and sorted.
            for i in 0..n {
                assert!((nodes[i] + nodes[n - 1 - i]).abs() < 1e-14);
                if i > 0 {
                    assert!(nodes[i] > nodes[i - 1]);
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        // An n-point rule integrates degree ≤ 2n−1 exactly: ∫_{-1}^{1} x^6 dx = 2/7.
        let (nodes, weights) = gauss_legendre_rule(4);
        let integral: f64 = nodes
            .iter()
            .zip(weights.iter())
            .map(|(x, w)| w * x.powi(6))
            .sum();
        assert!((integral - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn both_rules_integrate_a_smooth_oscillator() {
        // ∫₀^π sin t dt = 2.
        let f = |t: f64| t.sin();
        let simpson = adaptive_simpson(&f, 0.0, PI, 1e-13, 40);
        assert!((simpson.value - 2.0).abs() < 1e-12);
        assert!(simpson.error_estimate < 1e-10);
        let gl = composite_gauss_legendre(&f, 0.0, PI, 8, 16);
        assert!((gl - 2.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_error_estimate_reflects_accuracy() {
        // ∫₀¹ cos t dt = sin 1; the estimate must bound the actual error.
        let f = |t: f64| t.cos();
        let out = adaptive_simpson(&f, 0.0, 1.0, 1e-12, 40);
        let exact = 1.0f64.sin();
        assert!((out.value - exact).abs() <= out.error_estimate.max(1e-14));
    }
}
