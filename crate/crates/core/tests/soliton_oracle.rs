//! The soliton reductions against the brute-force residual on space-times
//! that are not solitons, plus hand-derived values on de Sitter.

mod common;

use std::f64::consts::PI;

use common::{diagonal, e, field};
use warpcert::geometry::{hessian, laplacian, lie_derivative_metric, metric_at, ricci, SamplePlan};
use warpcert::soliton::{
    einstein_conformal_soliton, einstein_factor_check, homothetic_lambda, soliton_residual, th2_checks,
    SolitonCase,
};
use warpcert::spacetime::{DoublyWarpedSpacetime, SpacetimeField};
use warpcert::{Point, Verdict};

fn generic() -> SolitonCase {
    let st = DoublyWarpedSpacetime::new(
        diagonal("m", &["x", "y"], &["1", "1+x^2"]),
        e("2+sin(x)*y/3"),
        e("1+t^2/2"),
        (-1.0, 1.0),
    )
    .unwrap();
    let zeta = SpacetimeField::new(e("t^2+1"), field(&[("x", "x*y"), ("y", "cos(x)")]));
    SolitonCase::new(st, zeta, 0.7).unwrap()
}

fn points() -> Vec<Point> {
    let mut out = Vec::new();
    for (i, t) in [-0.8, -0.1, 0.5, 0.9].into_iter().enumerate() {
        let x = -0.9 + 0.5 * i as f64;
        out.push(Point::from_pairs([("t", t), ("x", x), ("y", 0.7 - 0.4 * i as f64)]));
    }
    out
}

struct Pieces {
    f: f64,
    sigma: f64,
    sdot: f64,
    sddot: f64,
    h: f64,
    hdot: f64,
    zf: f64,
    f_diamond: f64,
}

/// Evaluates the scalar ingredients directly from the expressions.
fn pieces(case: &SolitonCase, p: &Point) -> Pieces {
    let st = &case.spacetime;
    let s = st.sigma();
    Pieces {
        f: st.f().eval(p).unwrap(),
        sigma: s.eval(p).unwrap(),
        sdot: s.diff("t").eval(p).unwrap(),
        sddot: s.diff("t").diff("t").eval(p).unwrap(),
        h: case.field.h.eval(p).unwrap(),
        hdot: case.field.h.diff("t").eval(p).unwrap(),
        zf: case.field.spatial.apply(st.f()).eval(p).unwrap(),
        f_diamond: st.f().eval(p).unwrap() * laplacian(st.base(), st.f(), p).unwrap(),
    }
}

#[test]
fn time_identity_is_the_tt_component() {
    let case = generic();
    let n = 2.0;
    let mut printed_gap: f64 = 0.0;
    for p in points() {
        let q = pieces(&case, &p);
        let res = soliton_residual(&case, &p).unwrap();
        let f2 = q.f * q.f;
        let pred = (case.lambda * f2 - q.f * q.zf - n / q.sigma * q.sddot + q.f_diamond / (q.sigma * q.sigma)) / f2;
        // Res_tt = f^2 (pred - h').
        assert!((res[(0, 0)] - f2 * (pred - q.hdot)).abs() < 1e-12, "{}", res[(0, 0)]);
        let printed = (case.lambda * f2 - q.f * q.zf - n / q.sigma * q.sddot - q.f_diamond) / f2;
        printed_gap = printed_gap.max((res[(0, 0)] - f2 * (printed - q.hdot)).abs());
        // No mixed block: sigma' X(f) vanishes only where t = 0 or grad f = 0.
        let mixed = (n - 1.0) * q.sdot / q.sigma * case.spacetime.f().diff("x").eval(&p).unwrap() / q.f;
        assert!((res[(0, 1)] - mixed).abs() < 1e-12);
    }
    assert!(printed_gap > 1e-2, "{printed_gap}");
}

#[test]
fn spatial_identity_is_the_base_block() {
    let case = generic();
    let st = &case.spacetime;
    let mut printed_gap: f64 = 0.0;
    for p in points() {
        let q = pieces(&case, &p);
        let res = soliton_residual(&case, &p).unwrap();
        let g = metric_at(st.base(), &p).unwrap();
        let lhs = lie_derivative_metric(st.base(), &case.field.spatial, &p).unwrap() * (0.5 * q.sigma * q.sigma)
            + ricci(st.base(), &p).unwrap()
            - hessian(st.base(), st.f(), &p).unwrap() / q.f;
        // Diamond of sigma on (I, -dt^2): sigma * (-sigma'') + (n - 1) * (-sigma'^2).
        let sd = -(q.sigma * q.sddot + q.sdot * q.sdot);
        assert!((st.sigma_diamond(&p).unwrap() - sd).abs() < 1e-13);
        let rhs = &g * (case.lambda * q.sigma * q.sigma - q.h * q.sigma * q.sdot + sd / (q.f * q.f));
        let block = res.view((1, 1), (2, 2)).into_owned();
        assert!((&block - (&lhs - &rhs)).amax() < 1e-12, "{block} vs {}", lhs - rhs);
        let printed = &g * (case.lambda * q.sigma * q.sigma - q.h * q.sigma * q.sdot - sd);
        printed_gap = printed_gap.max((&block - (&lhs - printed)).amax());
    }
    assert!(printed_gap > 1e-2, "{printed_gap}");
}

#[test]
fn th2_flags_disagreement_but_not_on_a_non_soliton() {
    let case = generic();
    let plan = SamplePlan::new([("x", (-1.0, 1.0)), ("y", (-1.0, 1.0))], 10, 3);
    let c = th2_checks(&case, &plan).unwrap();
    assert_eq!(c.verdict, Verdict::Fail);
    assert!(!c.track_passed("time identity") || !c.track_passed("spatial identity"));
    assert!(c.flags.iter().all(|f| !f.contains("disagree with")), "{:?}", c.flags);
}

fn de_sitter_global() -> DoublyWarpedSpacetime {
    DoublyWarpedSpacetime::new(
        diagonal("s2", &["th", "ph"], &["1", "sin(th)^2"]),
        e("1"),
        e("(exp(t)+exp(-t))/2"),
        (-1.0, 1.0),
    )
    .unwrap()
}

fn sphere_plan() -> SamplePlan {
    SamplePlan::new([("th", (0.3, PI - 0.3)), ("ph", (0.0, 2.0 * PI))], 12, 8).with_tol(1e-9)
}

#[test]
fn de_sitter_is_einstein_with_lambda_two() {
    // -dt^2 + cosh(t)^2 g_S2 has Ric = 2 g; the slices are unit spheres, mu = 1.
    let case = SolitonCase::new(de_sitter_global(), SpacetimeField::zero(), 2.0).unwrap();
    for p in sphere_plan().draw(|_| Ok(true)).unwrap() {
        let p = p.with("t", 0.4);
        assert!(soliton_residual(&case, &p).unwrap().amax() < 1e-12);
    }
    let c = einstein_factor_check(&case, 0.0, &sphere_plan()).unwrap();
    assert!(c.passed, "{c:?}");
    assert!((c.derived["mu_mean"] - 1.0).abs() < 1e-12);
    assert!(c.flags.iter().any(|f| f.contains("printed")));
}

#[test]
fn einstein_conformal_on_de_sitter() {
    // h = 0, rho = 0, mu = 1: (0 - 0) sigma^2 = 1 - (cosh^2 - sinh^2) and lambda = 2 sigma''/sigma = 2.
    let case = SolitonCase::new(de_sitter_global(), SpacetimeField::zero(), 0.0).unwrap();
    let c = einstein_conformal_soliton(&case, 1.0, 0.0, &sphere_plan()).unwrap();
    assert!(c.passed, "{c:?}");
    assert!((c.derived["lambda_mean"] - 2.0).abs() < 1e-12);
    assert!((c.derived["lambda_printed_mean"] + 2.0).abs() < 1e-12);
    assert!(c.flags.iter().any(|f| f.contains("printed")));
}

#[test]
fn homothetic_lambda_on_flat_de_sitter() {
    // sigma = e^t over flat R^2 with the Killing field d_t - x d_x - y d_y: lambda = 0 + 2.
    let st = DoublyWarpedSpacetime::new(
        warpcert::Chart::euclidean("r2", &["x", "y"]),
        e("1"),
        e("exp(t)"),
        (-1.0, 1.0),
    )
    .unwrap();
    let zeta = SpacetimeField::new(e("1"), field(&[("x", "-x"), ("y", "-y")]));
    let case = SolitonCase::new(st, zeta, 2.0).unwrap();
    let p = Point::from_pairs([("t", 0.3), ("x", 0.1), ("y", -0.4)]);
    assert!((homothetic_lambda(&case, 0.0, &p).unwrap() - 2.0).abs() < 1e-12);
    assert!(soliton_residual(&case, &p).unwrap().amax() < 1e-12);
}
