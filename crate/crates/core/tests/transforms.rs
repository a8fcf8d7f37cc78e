use proptest::prelude::*;
use quench_core::transforms::{cubic_of_u, u_of_cubic, TransformContext, U_MAX};
use quench_core::Params;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

fn ctx(lambda: f64, delta: f64) -> TransformContext {
    TransformContext::new(Params::new(lambda, delta).unwrap())
}

#[test]
fn exp_transform_matches_gauss_legendre_oracle() {
    // ∫₀^0.5 e^{1/(1−s)} ds, 30-digit reference evaluated offline
    let frozen = 2.082_870_318_639_673_5;
    let oracle = composite_gl(|s| (1.0 / (1.0 - s)).exp(), 0.0, 0.5, 40);
    assert!((oracle - frozen).abs() < 1e-13, "oracle {oracle}");
    let v = ctx(1.0, 1.0).exp_transform(0.5).unwrap();
    assert!((v - oracle).abs() < 1e-10 * oracle, "v {v} oracle {oracle}");

    for (lambda, delta, u) in [(2.0, 0.35, 0.9), (3.0, 0.1, 0.99), (1.0, 0.7, 0.3)] {
        let ld: f64 = lambda * delta;
        let oracle = composite_gl(|s| (ld / (1.0 - s)).exp(), 0.0, u, 200);
        let v = ctx(lambda, delta).exp_transform(u).unwrap();
        assert!((v - oracle).abs() < 1e-10 * oracle, "λδ={ld} u={u}: {v} vs {oracle}");
    }
}

#[test]
fn rho_prime_matches_central_differences() {
    for (lambda, delta) in [(1.0, 0.0), (1.0, 0.7), (3.0, 0.1)] {
        let c = ctx(lambda, delta);
        for v in [0.1, 0.5, 1.0, 2.0] {
            // without fringing v = u, so ρ has its pole at v = 1
            if delta == 0.0 && v >= 1.0 {
                continue;
            }
            let eps = 1e-5 * v;
            let fd = (c.rho(v + eps).unwrap() - c.rho(v - eps).unwrap()) / (2.0 * eps);
            let exact = c.rho_prime(v).unwrap();
            assert!(((fd - exact) / exact).abs() < 1e-6, "λ={lambda} δ={delta} v={v}: fd {fd} exact {exact}");
        }
    }
}

#[test]
fn tail_integral_matches_quadrature() {
    // ∫_{v0}^{Vmax} ds/ρ(s), substituted back to u: ds = e^{λδ/(1−u)} du, so
    // the integrand is (1−u)²; this checks the inverse map and the closed form.
    for (lambda, delta) in [(1.0, 0.7), (3.0, 0.1), (2.0, 0.0)] {
        let c = ctx(lambda, delta);
        for v0 in [0.2, 0.5, 1.0] {
            let closed = c.rho_tail_integral(v0).unwrap();
            let v_max = 20.0;
            let direct = composite_gl(|s| 1.0 / c.rho(s).unwrap(), v0, v_max, 40);
            let remainder = c.rho_tail_integral(v_max).unwrap();
            assert!((direct - (closed - remainder)).abs() < 1e-6, "λ={lambda} δ={delta} v0={v0}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transforms_are_strictly_monotone(
        lambda in 0.1f64..50.0,
        delta in 0.0f64..5.0,
        a in 0.0f64..0.999,
        b in 0.0f64..0.999,
    ) {
        prop_assume!((a - b).abs() > 1e-9);
        let (u1, u2) = if a < b { (a, b) } else { (b, a) };
        // keep e^{λδ/(1−u)} finite
        prop_assume!(lambda * delta / (1.0 - u2) < 600.0);
        let p = Params::new(lambda, delta).unwrap();
        let c = TransformContext::new(p);
        prop_assert!(c.exp_transform(u1).unwrap() < c.exp_transform(u2).unwrap());
        prop_assert!(cubic_of_u(u1, &p).unwrap() > cubic_of_u(u2, &p).unwrap());
    }

    #[test]
    fn cubic_round_trip(lambda in 0.01f64..1e3, u in 0.0f64..=1.0) {
        let p = Params::new(lambda, 0.3).unwrap();
        let back = u_of_cubic(cubic_of_u(u, &p).unwrap(), &p).unwrap();
        prop_assert!((back - u).abs() <= 1e-14, "u={} back={}", u, back);
    }

    #[test]
    fn exp_round_trip(lambda in 0.1f64..10.0, delta in 0.0f64..2.0, u in 0.0f64..0.99) {
        prop_assume!(lambda * delta / (1.0 - u) < 600.0);
        let c = ctx(lambda, delta);
        let v = c.exp_transform(u).unwrap();
        let back = c.u_of_exp(v).unwrap();
        prop_assert!((c.exp_transform(back).unwrap() - v).abs() <= 1e-9 * v.max(1.0));
        prop_assert!((back - u).abs() <= 1e-9);
    }

    #[test]
    fn rho_is_positive_increasing_and_convex(
        lambda in 0.1f64..10.0,
        delta in 0.0f64..2.0,
        v in 0.0f64..20.0,
        dv in 1e-3f64..5.0,
    ) {
        let c = ctx(lambda, delta);
        let (r1, r2) = (c.rho(v).unwrap(), c.rho(v + dv).unwrap());
        prop_assert!(r1 > 0.0 && r2 > r1);
        prop_assert!(c.rho_prime(v).unwrap() > 0.0);
        prop_assert!(c.rho_second(v).unwrap() > 0.0);
    }
}

#[test]
fn inverse_saturates_without_fringing() {
    assert_eq!(ctx(1.0, 0.0).u_of_exp(1.5).unwrap(), U_MAX);
}
