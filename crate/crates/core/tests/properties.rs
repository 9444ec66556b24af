mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::{diagonal, e, field, line};
use warpcert::geometry::{
    integrate_geodesic, lie_derivative_metric, lie_derivative_metric_covariant, metric_at, ricci,
    riemann, CurveState, SamplePlan,
};
use warpcert::soliton::{soliton_residual, SolitonCase};
use warpcert::spacetime::{DoublyWarpedSpacetime, SpacetimeField};
use warpcert::{parse, Chart, Point};

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (1i32..9).prop_map(|n| n.to_string()),
        (1i32..99).prop_map(|n| format!("{}.{}", n / 10, n % 10)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) / (2 + ({b})^2)")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(({a})/8)")),
            inner.clone().prop_map(|a| format!("ln(1 + ({a})^2)")),
            inner.prop_map(|a| format!("sqrt(1 + ({a})^2)")),
        ]
    })
}

fn at(x: f64, y: f64) -> Point {
    Point::from_pairs([("x", x), ("y", y)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn render_parse_round_trip(text in expr_text(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let a = parse(&text).unwrap();
        let b = parse(&a.to_string()).unwrap();
        let p = at(x, y);
        match (a.eval(&p), b.eval(&p)) {
            (Ok(u), Ok(v)) => prop_assert!(u == v || (u.is_nan() && v.is_nan()), "{} vs {}: {u} {v}", a, b),
            (Err(_), Err(_)) => {}
            (u, v) => prop_assert!(false, "{u:?} vs {v:?}"),
        }
    }

    #[test]
    fn derivative_matches_central_difference(text in expr_text(), x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let f = parse(&text).unwrap();
        let df = f.diff("x");
        let h = 1e-5;
        let (Ok(exact), Ok(fp), Ok(fm)) = (df.eval(&at(x, y)), f.eval(&at(x + h, y)), f.eval(&at(x - h, y))) else {
            return Ok(());
        };
        let fd = (fp - fm) / (2.0 * h);
        // Central differences lose about eps/h relative to the function's size.
        let noise = 4.0 * f64::EPSILON * fp.abs().max(fm.abs()) / h;
        prop_assume!(noise < 1e-6 * exact.abs().max(1.0));
        prop_assume!(exact.abs() < 1e6);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{f}: fd {fd}, exact {exact}");
    }

    #[test]
    fn derivative_is_linear(a in expr_text(), b in expr_text(), s in -3.0..3.0f64, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let (ea, eb) = (parse(&a).unwrap(), parse(&b).unwrap());
        let sc = warpcert::ScalarExpr::constant(s);
        let lhs = ea.mul(&sc).add(&eb).diff("y");
        let rhs = ea.diff("y").mul(&sc).add(&eb.diff("y"));
        if let (Ok(u), Ok(v)) = (lhs.eval(&at(x, y)), rhs.eval(&at(x, y))) {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(v.abs()).max(1.0), "{u} vs {v}");
        }
    }
}

/// Random positive-definite, non-diagonal metric on (x, y, z).
fn metric_chart(c: [f64; 5]) -> Chart {
    let m = |s: String| parse(&s).unwrap();
    let rows = vec![
        vec![m(format!("2 + {}*sin(y)", c[0] * 0.5)), m(format!("{}*x*z/4", c[1])), m("0".into())],
        vec![m(format!("{}*x*z/4", c[1])), m(format!("exp({}*x/3) + z^2", c[2])), m(format!("{}*cos(x)/5", c[3]))],
        vec![m("0".into()), m(format!("{}*cos(x)/5", c[3])), m(format!("1 + y^2 + {}*x^2", c[4].abs()))],
    ];
    Chart::new("m", vec!["x".into(), "y".into(), "z".into()], rows).unwrap()
}

fn xyz(p: [f64; 3]) -> Point {
    Point::from_pairs([("x", p[0]), ("y", p[1]), ("z", p[2])])
}

/// Christoffel symbols from central differences of the numerically
/// evaluated metric, with no symbolic derivatives.
fn fd_christoffel(chart: &Chart, p: [f64; 3], h: f64) -> Vec<DMatrix<f64>> {
    let g = |q: [f64; 3]| metric_at(chart, &xyz(q)).unwrap();
    let dg: Vec<DMatrix<f64>> = (0..3)
        .map(|m| {
            let (mut a, mut b) = (p, p);
            a[m] += h;
            b[m] -= h;
            (g(a) - g(b)) / (2.0 * h)
        })
        .collect();
    let ginv = g(p).try_inverse().unwrap();
    (0..3)
        .map(|k| {
            DMatrix::from_fn(3, 3, |i, j| {
                (0..3)
                    .map(|l| 0.5 * ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]))
                    .sum()
            })
        })
        .collect()
}

/// Ricci from finite-difference Christoffel symbols:
/// `R_{sv} = d_r G^r_{vs} - d_v G^r_{rs} + G^r_{rl} G^l_{vs} - G^r_{vl} G^l_{rs}`.
fn fd_ricci(chart: &Chart, p: [f64; 3]) -> DMatrix<f64> {
    let h = 1e-4;
    let gam = fd_christoffel(chart, p, h);
    let dgam: Vec<Vec<DMatrix<f64>>> = (0..3)
        .map(|m| {
            let (mut a, mut b) = (p, p);
            a[m] += h;
            b[m] -= h;
            let (ga, gb) = (fd_christoffel(chart, a, h), fd_christoffel(chart, b, h));
            (0..3).map(|k| (&ga[k] - &gb[k]) / (2.0 * h)).collect()
        })
        .collect();
    DMatrix::from_fn(3, 3, |s, v| {
        let mut r = 0.0;
        for rr in 0..3 {
            r += dgam[rr][rr][(v, s)] - dgam[v][rr][(rr, s)];
            for l in 0..3 {
                r += gam[rr][(rr, l)] * gam[l][(v, s)] - gam[rr][(v, l)] * gam[l][(rr, s)];
            }
        }
        r
    })
}

fn coeffs() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(-1.0..1.0f64)
}

fn point3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-0.8..0.8f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_bianchi_and_symmetries(c in coeffs(), p in point3()) {
        let chart = metric_chart(c);
        let r = riemann(&chart, &xyz(p)).unwrap();
        let g = metric_at(&chart, &xyz(p)).unwrap();
        let scale = (0..81).map(|i| r.get(i / 27, (i / 9) % 3, (i / 3) % 3, i % 3).abs()).fold(1.0, f64::max);
        for a in 0..3 { for b in 0..3 { for m in 0..3 { for v in 0..3 {
            let cyc = r.get(a, b, m, v) + r.get(a, m, v, b) + r.get(a, v, b, m);
            prop_assert!(cyc.abs() <= 1e-8 * scale, "bianchi {cyc}");
            prop_assert!((r.get(a, b, m, v) + r.get(a, b, v, m)).abs() <= 1e-10 * scale);
            // Lowered index pair symmetry R_{abmv} = R_{mvab}.
            let low = |a: usize, b: usize, m: usize, v: usize| (0..3).map(|k| g[(a, k)] * r.get(k, b, m, v)).sum::<f64>();
            prop_assert!((low(a, b, m, v) - low(m, v, a, b)).abs() <= 1e-8 * scale);
        }}}}
        let ric = ricci(&chart, &xyz(p)).unwrap();
        prop_assert!((&ric - ric.transpose()).amax() <= 1e-10 * ric.amax().max(1.0));
    }

    #[test]
    fn ricci_matches_finite_differences(c in coeffs(), p in point3()) {
        let chart = metric_chart(c);
        let exact = ricci(&chart, &xyz(p)).unwrap();
        let fd = fd_ricci(&chart, p);
        prop_assert!((&exact - &fd).amax() <= 1e-5 * exact.amax().max(1.0), "{exact} vs {fd}");
    }

    #[test]
    fn lie_derivative_forms_agree(c in coeffs(), p in point3(), k in -2.0..2.0f64) {
        let chart = metric_chart(c);
        let zeta = field(&[("x", &format!("{k}*y*z")), ("y", "sin(x)"), ("z", "1 + x^2")]);
        let a = lie_derivative_metric(&chart, &zeta, &xyz(p)).unwrap();
        let b = lie_derivative_metric_covariant(&chart, &zeta, &xyz(p)).unwrap();
        prop_assert!((&a - &b).amax() <= 1e-9 * a.amax().max(1.0));
    }

    // Starts keep the curve at least 0.6 away from the coordinate poles.
    #[test]
    fn geodesic_speed_is_conserved(th in 1.0..2.1f64, ph in 0.0..6.0f64, a in -0.4..0.4f64, b in -1.0..1.0f64) {
        let chart = diagonal("s2", &["th", "ph"], &["1", "sin(th)^2"]);
        let start = CurveState::new(Point::from_pairs([("th", th), ("ph", ph)]), vec![a, b]);
        let path = integrate_geodesic(&chart, &start, 1e-3, 1000).unwrap();
        let s0 = start.speed_squared(&chart).unwrap();
        for s in &path {
            prop_assert!((s.speed_squared(&chart).unwrap() - s0).abs() <= 1e-6);
        }
    }

    #[test]
    fn sampling_is_seeded_and_boxed(seed in any::<u64>(), n in 1usize..40) {
        let plan = SamplePlan::new([("x", (-1.0, 2.0)), ("y", (3.0, 3.0))], n, seed);
        let a = plan.draw(|_| Ok(true)).unwrap();
        let b = plan.draw(|_| Ok(true)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), n);
        for p in &a {
            let x = p.get("x").unwrap();
            prop_assert!((-1.0..=2.0).contains(&x));
            prop_assert_eq!(p.get("y"), Some(3.0));
        }
    }

    #[test]
    fn soliton_residual_shifts_with_lambda(delta in -2.0..2.0f64, x in -1.0..1.0f64, t in 0.2..1.0f64) {
        // Shifting lambda by delta moves the residual by exactly -delta g.
        let st = DoublyWarpedSpacetime::new(line("x"), e("1+x^2"), e("exp(t)"), (0.0, 2.0)).unwrap();
        let case = SolitonCase::new(st, SpacetimeField::new(e("t"), field(&[("x", "x")])), 0.3).unwrap();
        let p = Point::from_pairs([("t", t), ("x", x)]);
        let r0 = soliton_residual(&case, &p).unwrap();
        let r1 = soliton_residual(&case.with_lambda(0.3 + delta), &p).unwrap();
        let g = metric_at(case.spacetime.chart(), &p).unwrap();
        prop_assert!((r1 - r0 + g * delta).amax() <= 1e-12 * (1.0 + delta.abs()) * 10.0);
    }
}

#[test]
fn sphere_and_hyperbolic_ricci_by_hand() {
    // Ric = g on the unit sphere, Ric = -g on dt^2 + e^(2t) dx^2.
    let s2 = diagonal("s2", &["th", "ph"], &["1", "sin(th)^2"]);
    let h2 = diagonal("h2", &["t", "x"], &["1", "exp(2*t)"]);
    for th in [0.4, 1.0, 2.0] {
        let p = Point::from_pairs([("th", th), ("ph", PI / 3.0)]);
        let d = ricci(&s2, &p).unwrap() - metric_at(&s2, &p).unwrap();
        assert!(d.amax() < 1e-13);
        let q = Point::from_pairs([("t", th - 1.0), ("x", 0.2)]);
        let d = ricci(&h2, &q).unwrap() + metric_at(&h2, &q).unwrap();
        assert!(d.amax() < 1e-12);
    }
}
