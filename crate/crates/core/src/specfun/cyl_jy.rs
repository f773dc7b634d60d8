//! Cylinder functions J_ν, Y_ν of non-negative real order with derivatives.
//!
//! Steed's method: the continued fraction CF1 fixes J'_ν/J_ν, a downward
//! recurrence carries it to an order μ with |μ| ≤ 1/2, and the pair
//! (J_μ, Y_μ) is closed either by the small-argument series (x < 2) or by
//! the complex continued fraction CF2 (x ≥ 2), normalized through the
//! Wronskian J_ν Y'_ν − J'_ν Y_ν = 2/(πx). Y is then recurred upward, which
//! is stable because Y grows with order.

use std::f64::consts::PI;

use super::gamma::gamma_aux;
use super::SpecFunError;

const MAXIT: usize = 10_000;
const EPS: f64 = f64::EPSILON;
/// Smallest representable scale used to keep Lentz denominators alive.
const FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;
/// Crossover between the series (below) and CF2 (above) closures.
const XMIN_CROSSOVER: f64 = 2.0;

/// J_ν, J'_ν, Y_ν, Y'_ν at a point.
#[derive(Debug, Clone, Copy)]
pub struct CylJy {
    pub j: f64,
    pub jp: f64,
    pub y: f64,
    pub yp: f64,
}

/// Simultaneous J/Y evaluation for ν ≥ 0, x > 0.
pub fn bessjy(nu: f64, x: f64) -> Result<CylJy, SpecFunError> {
    debug_assert!(nu >= 0.0, "bessjy kernel needs ν ≥ 0");
    debug_assert!(x > 0.0, "bessjy kernel needs x > 0");

    let no_convergence = || SpecFunError::NoConvergence {
        function: "bessel_jy",
        nu,
        x,
    };

    let nl = if x < XMIN_CROSSOVER {
        (nu + 0.5) as usize
    } else {
        (nu - x + 1.5).floor().max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI; // Wronskian value 2/(πx)

    // CF1 by modified Lentz: h = J'_ν/J_ν, isign tracks sign(J_ν).
    let mut isign = 1.0f64;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0f64;
    let mut c = h;
    let mut ok = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(no_convergence());
    }

    // Downward recurrence from ν to μ at an arbitrary scale.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl; // J'_μ/J_μ

    let (rjmu, rymu, ry1);
    if x < XMIN_CROSSOVER {
        // Temme's series for Y_μ and Y_{μ+1}.
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
        let mut ff = 2.0 / PI * fct * (aux.gam1 * e.cosh() + aux.gam2 * fact2 * d);
        e = e.exp();
        let mut p = e / (aux.recip_plus * PI);
        let mut q = 1.0 / (e * PI * aux.recip_minus);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS {
            1.0
        } else {
            pimu2.sin() / pimu2
        };
        let r = PI * pimu2 * fact3 * fact3;
        let mut cc = 1.0;
        d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * (ff + r * q);
            sum += del;
            let del1 = cc * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(no_convergence());
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu); // Wronskian normalization
    } else {
        // CF2 in the complex plane: p + iq = (J'_μ + iY'_μ)/(J_μ + iY_μ).
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fct = a * xi / (p * p + q * q);
        let mut cr = br + q * fct;
        let mut ci = bi + p * fct;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let dlr = cr * dr - ci * di;
        let dli = cr * di + ci * dr;
        let temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..=MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fct = a / (cr * cr + ci * ci);
            cr = br + cr * fct;
            ci = bi - ci * fct;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di = -di / den;
            let dlr = cr * dr - ci * di;
            let dli = cr * di + ci * dr;
            let temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(no_convergence());
        }
        let gam = (p - f) / q;
        let mut rj = (w / ((p - f) * gam + q)).sqrt();
        rj = rj.copysign(rjl);
        rjmu = rj;
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }

    // Rescale J and J' to the true magnitude fixed at order μ.
    let fact = rjmu / rjl;
    let j = rjl1 * fact;
    let jp = rjp1 * fact;

    // Upward recurrence carries Y from μ to ν.
    let mut rymu = rymu;
    let mut ry1 = ry1;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = nu * xi * rymu - ry1;

    Ok(CylJy { j, jp, y, yp })
}
