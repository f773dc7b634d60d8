//! Modified cylinder functions I_ν, K_ν of non-negative real order with
//! derivatives.
//!
//! Same organization as the J/Y kernel: CF1 fixes I'_ν/I_ν, a downward
//! recurrence moves to |μ| ≤ 1/2, and (K_μ, K_{μ+1}) come from the
//! small-argument series (x ≤ 2) or from the Thompson-Barnett continued
//! fraction CF2 (x > 2). I is normalized through the Wronskian
//! I_ν K'_ν − I'_ν K_ν = −1/x; K recurs upward stably.

use std::f64::consts::PI;

use super::gamma::gamma_aux;
use super::SpecFunError;

const MAXIT: usize = 10_000;
const EPS: f64 = f64::EPSILON;
const FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;
const XMIN_CROSSOVER: f64 = 2.0;

/// I_ν, I'_ν, K_ν, K'_ν at a point.
#[derive(Debug, Clone, Copy)]
pub struct CylIk {
    pub i: f64,
    pub ip: f64,
    pub k: f64,
    pub kp: f64,
}

/// Simultaneous I/K evaluation for ν ≥ 0, x > 0.
pub fn bessik(nu: f64, x: f64) -> Result<CylIk, SpecFunError> {
    debug_assert!(nu >= 0.0, "bessik kernel needs ν ≥ 0");
    debug_assert!(x > 0.0, "bessik kernel needs x > 0");

    let no_convergence = || SpecFunError::NoConvergence {
        function: "bessel_ik",
        nu,
        x,
    };

    let nl = (nu + 0.5) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    // CF1: h = I'_ν/I_ν. All quantities positive; no sign tracking.
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0f64;
    let mut c = h;
    let mut ok = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(no_convergence());
    }

    // Downward recurrence from ν to μ at an arbitrary scale.
    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let ril1 = ril;
    let rip1 = ripl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let riltemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * riltemp + ril;
        ril = riltemp;
    }
    let f = ripl / ril; // I'_μ/I_μ

    let (mut rkmu, mut rk1);
    if x <= XMIN_CROSSOVER {
        // Temme's series for K_μ and K_{μ+1}.
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fct = if pimu.abs() < EPS {
            1.0
        } else {
            pimu / pimu.sin()
        };
        let mut d = -x2.ln();
        let mut e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let aux = gamma_aux(xmu);
        let mut ff = fct * (aux.gam1 * e.cosh() + aux.gam2 * fact2 * d);
        let mut sum = ff;
        e = e.exp();
        let mut p = 0.5 * e / aux.recip_plus;
        let mut q = 0.5 / (e * aux.recip_minus);
        let mut cc = 1.0;
        d = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * ff;
            sum += del;
            let del1 = cc * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(no_convergence());
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        // Thompson-Barnett CF2 with the Q-sum that yields K directly.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h2 = delh;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..=MAXIT {
            a -= 2.0 * (i as f64 - 1.0);
            c = -a * c / i as f64;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h2 += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(no_convergence());
        }
        let h2 = a1 * h2;
        rkmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        rk1 = rkmu * (xmu + x + 0.5 - h2) * xi;
    }

    // Wronskian normalization of I, then upward recurrence for K.
    let rkmup = xmu * xi * rkmu - rk1;
    let rimu = xi / (f * rkmu - rkmup);
    let i_val = rimu * ril1 / ril;
    let ip_val = rimu * rip1 / ril;
    for i in 1..=nl {
        let rktemp = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    let k = rkmu;
    let kp = nu * xi * rkmu - rk1;

    Ok(CylIk {
        i: i_val,
        ip: ip_val,
        k,
        kp,
    })
}
