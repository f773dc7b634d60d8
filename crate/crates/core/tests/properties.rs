//! Randomized structural identities over the public API: operator
//! algebra, cylinder-function identities, and mode construction
//! invariants that must hold across the whole parameter space.

use dkp_h3::geometry::FieldPoint;
use dkp_h3::modes::{
    build_mode_sigma, build_mode_sigma0_massive, radial_profile, AxialKind, QuantumNumbers,
    RadialKind,
};
use dkp_h3::operators::{
    delta_apply, helicity_apply, ladder_apply, ladder_compose, ClosureField, LadderKind,
    ProfileJet, RadialProfile, TenComponent, TenComponentField, GAMMA,
};
use dkp_h3::specfun::{bessel_i, bessel_j, bessel_k, bessel_y, macdonald_imag_order};
use dkp_h3::{c64, Complex64};
use proptest::prelude::*;

/// (c₀ + c₁r + c₂r²)·exp(−a(r−b)²) with closed-form jets.
fn poly_gauss(m: i32, a: f64, b: f64, coeffs: [f64; 6]) -> RadialProfile {
    let c: [Complex64; 3] = [
        c64(coeffs[0], coeffs[1]),
        c64(coeffs[2], coeffs[3]),
        c64(coeffs[4], coeffs[5]),
    ];
    RadialProfile::from_jet(m, move |r| {
        let g = (-a * (r - b) * (r - b)).exp();
        let g1 = -2.0 * a * (r - b) * g;
        let g2 = (4.0 * a * a * (r - b) * (r - b) - 2.0 * a) * g;
        let p = c[0] + c[1] * r + c[2] * r * r;
        let p1 = c[1] + 2.0 * c[2] * r;
        let p2 = 2.0 * c[2];
        ProfileJet {
            value: p * g,
            d1: p1 * g + p * g1,
            d2: p2 * g + 2.0 * p1 * g1 + p * g2,
        }
    })
}

fn trig_field_a(r: f64, z: f64) -> TenComponent {
    let f = |a: f64, b: f64| c64((a * r + b * z).sin(), 0.4 * (b * r - a * z).cos());
    TenComponent {
        phi0: f(1.1, 0.6),
        phi: [f(0.8, 1.2), f(1.3, 0.5), f(0.7, 0.9)],
        e: [f(1.0, 1.1), f(0.6, 1.4), f(1.2, 0.8)],
        h: [f(0.9, 0.7), f(1.4, 1.0), f(0.5, 1.3)],
    }
}

fn trig_field_b(r: f64, z: f64) -> TenComponent {
    let f = |a: f64, b: f64| c64(0.7 * (a * r - b * z).cos(), (b * r + a * z).sin());
    TenComponent {
        phi0: f(0.9, 1.3),
        phi: [f(1.2, 0.4), f(0.6, 1.1), f(1.5, 0.8)],
        e: [f(0.5, 1.2), f(1.1, 0.9), f(0.8, 1.4)],
        h: [f(1.3, 0.6), f(0.7, 1.5), f(1.0, 1.0)],
    }
}

fn lincomb(a: Complex64, x: &TenComponent, b: Complex64, y: &TenComponent) -> TenComponent {
    let mix = |p: Complex64, q: Complex64| a * p + b * q;
    TenComponent {
        phi0: mix(x.phi0, y.phi0),
        phi: std::array::from_fn(|i| mix(x.phi[i], y.phi[i])),
        e: std::array::from_fn(|i| mix(x.e[i], y.e[i])),
        h: std::array::from_fn(|i| mix(x.h[i], y.h[i])),
    }
}

fn ten_norm(t: &TenComponent) -> f64 {
    let mut s = t.phi0.norm();
    for c in t.phi.iter().chain(&t.e).chain(&t.h) {
        s = s.max(c.norm());
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ladder_factorizations_equal_the_radial_operator(
        m in -2..=3i32,
        a in 0.2..1.2f64,
        b in 0.5..3.0f64,
        coeffs in prop::array::uniform6(-1.0..1.0f64),
        r in 0.3..4.5f64,
    ) {
        let profile = poly_gauss(m, a, b, coeffs);
        let delta = delta_apply(&profile, r).unwrap();
        let ba = ladder_compose(LadderKind::BMinus, LadderKind::A, &profile, r).unwrap();
        let ab = ladder_compose(LadderKind::APlus, LadderKind::B, &profile, r).unwrap();
        let scale = delta.norm().max(1.0);
        prop_assert!((ba - delta).norm() <= 1e-10 * scale, "b-a: {:e}", (ba - delta).norm());
        prop_assert!((ab - delta).norm() <= 1e-10 * scale, "a+b: {:e}", (ab - delta).norm());
    }

    #[test]
    fn ladders_shift_cylinder_orders(
        m in 0..=3i32,
        lam_idx in 0..3usize,
        use_j in any::<bool>(),
        r in 0.2..5.0f64,
    ) {
        let lambda = [0.5, 1.0, 2.0][lam_idx];
        let kind = if use_j { RadialKind::J } else { RadialKind::Y };
        let profile = radial_profile(m, lambda, kind).unwrap();
        let s = lambda.sqrt();
        let x = s * r;
        let eval = |order: f64| match kind {
            RadialKind::J => bessel_j(order, x).unwrap().value,
            RadialKind::Y => bessel_y(order, x).unwrap().value,
        };
        let lowered = ladder_apply(LadderKind::A, &profile, r).unwrap();
        let raised = ladder_apply(LadderKind::B, &profile, r).unwrap();
        let expect_down = GAMMA * s * eval((m - 1) as f64);
        let expect_up = GAMMA * s * eval((m + 1) as f64);
        let scale = expect_down.norm().max(expect_up.norm()).max(1.0);
        prop_assert!(
            (lowered - expect_down).norm() <= 1e-9 * scale,
            "a: {:e} of {scale:e}", (lowered - expect_down).norm()
        );
        prop_assert!(
            (raised - expect_up).norm() <= 1e-9 * scale,
            "b: {:e} of {scale:e}", (raised - expect_up).norm()
        );
    }

    #[test]
    fn cylinder_wronskians_hold(nu in 0.0..8.0f64, x in 0.1..20.0f64) {
        let j = bessel_j(nu, x).unwrap();
        let y = bessel_y(nu, x).unwrap();
        let jy = (j.value * y.derivative - j.derivative * y.value).re;
        let jy_exact = 2.0 / (std::f64::consts::PI * x);
        prop_assert!(((jy - jy_exact) / jy_exact).abs() <= 1e-10, "J/Y: {jy:e} vs {jy_exact:e}");

        let i = bessel_i(nu, x).unwrap();
        let k = bessel_k(nu, x).unwrap();
        let ik = (i.value * k.derivative - i.derivative * k.value).re;
        let ik_exact = -1.0 / x;
        prop_assert!(((ik - ik_exact) / ik_exact).abs() <= 1e-10, "I/K: {ik:e} vs {ik_exact:e}");
    }

    #[test]
    fn reported_derivatives_match_differencing(nu in 0.0..6.0f64, x in 0.5..10.0f64) {
        let h = 1e-5 * x.max(1.0);
        let check = |eval: &dyn Fn(f64) -> Complex64, d: Complex64, scale_floor: f64| {
            let fd = (eval(x + h) - eval(x - h)) / (2.0 * h);
            let scale = eval(x).norm().max(d.norm()).max(scale_floor);
            (fd - d).norm() / scale
        };
        let j = bessel_j(nu, x).unwrap();
        prop_assert!(check(&|t| bessel_j(nu, t).unwrap().value, j.derivative, 1.0) <= 1e-8);
        let k = bessel_k(nu, x).unwrap();
        prop_assert!(check(&|t| bessel_k(nu, t).unwrap().value, k.derivative, 1e-12) <= 1e-8);
        let kappa = 0.4 * nu + 0.3;
        let ki = macdonald_imag_order(kappa, x).unwrap();
        prop_assert!(
            check(&|t| macdonald_imag_order(kappa, t).unwrap().value, ki.derivative, 1e-12) <= 1e-8
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traveling_mode_strengths_stay_proportional(
        eps in 0.6..2.5f64,
        m in -2..=3i32,
        kappa in 0.2..2.0f64,
        lambda in 0.5..2.2f64,
        mass in 0.5..2.0f64,
        r in 0.4..3.5f64,
        z in -1.0..1.2f64,
    ) {
        let qn = QuantumNumbers { epsilon: eps, m, sigma: c64(0.0, kappa), lambda, mass };
        let mode = build_mode_sigma(qn, RadialKind::J, AxialKind::Decaying).unwrap();
        let t = mode.sample(r, z);
        let e_factor = c64(0.0, -eps) / mass;
        let h_factor = c64(0.0, -1.0) * qn.sigma / mass;
        for jdx in 0..3 {
            let scale = t.phi[jdx].norm().max(1e-30);
            prop_assert!(
                (t.e[jdx] - e_factor * t.phi[jdx]).norm() <= 1e-13 * e_factor.norm() * scale,
                "electric slot {jdx}"
            );
            prop_assert!(
                (t.h[jdx] - h_factor * t.phi[jdx]).norm() <= 1e-13 * h_factor.norm().max(1.0) * scale,
                "magnetic slot {jdx}"
            );
        }
    }

    #[test]
    fn axially_uniform_mode_has_no_magnetic_part(
        eps in 1.3..2.4f64,
        mass in 0.5..1.1f64,
        m in -1..=2i32,
        lambda in 0.5..2.0f64,
        r in 0.4..3.0f64,
        z in -1.0..1.0f64,
    ) {
        let qn = QuantumNumbers { epsilon: eps, m, sigma: c64(0.0, 0.0), lambda, mass };
        let mode = build_mode_sigma0_massive(qn, RadialKind::J, AxialKind::Decaying).unwrap();
        let t = mode.sample(r, z);
        for c in t.h {
            prop_assert_eq!(c, Complex64::new(0.0, 0.0));
        }
        let e_factor = mass / c64(0.0, eps);
        for jdx in 0..3 {
            let scale = t.phi[jdx].norm().max(1e-30);
            prop_assert!(
                (t.e[jdx] - e_factor * t.phi[jdx]).norm() <= 1e-13 * e_factor.norm() * scale,
                "electric slot {jdx}"
            );
        }
    }

    #[test]
    fn helicity_action_is_linear(
        ar in -1.5..1.5f64,
        ai in -1.5..1.5f64,
        br in -1.5..1.5f64,
        bi in -1.5..1.5f64,
        r in 0.5..3.0f64,
        z in -1.0..1.0f64,
    ) {
        let alpha = c64(ar, ai);
        let beta = c64(br, bi);
        let first = ClosureField { m: 1, f: trig_field_a };
        let second = ClosureField { m: 1, f: trig_field_b };
        let combined = ClosureField {
            m: 1,
            f: move |rr, zz| lincomb(alpha, &trig_field_a(rr, zz), beta, &trig_field_b(rr, zz)),
        };
        let p = FieldPoint::new(r, z).unwrap();
        let h = 1e-3;
        let of_sum = helicity_apply(&combined, &p, h).unwrap();
        let sum_of = lincomb(
            alpha,
            &helicity_apply(&first, &p, h).unwrap(),
            beta,
            &helicity_apply(&second, &p, h).unwrap(),
        );
        let scale = ten_norm(&of_sum).max(ten_norm(&sum_of)).max(1.0);
        let flat_a = of_sum.flatten();
        let flat_b = sum_of.flatten();
        for idx in 0..10 {
            prop_assert!(
                (flat_a[idx] - flat_b[idx]).norm() <= 1e-11 * scale,
                "slot {idx}: {:e} of {scale:e}", (flat_a[idx] - flat_b[idx]).norm()
            );
        }
    }
}
