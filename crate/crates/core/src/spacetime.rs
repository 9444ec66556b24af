//! Doubly warped space-times `I x M` with metric `-f^2 dt^2 + sigma^2 g`,
//! `f > 0` on `M` and `sigma > 0` on `I`.
//!
//! A space-time is stored as a [`DoublyWarpedProduct`] whose first factor is
//! the interval `(I, -dt^2)` with warping `sigma` and whose second factor is
//! `(M, g)` with warping `f`. The Lorentzian sign lives only in the interval
//! chart, so the oracle in [`crate::geometry`] is used unchanged.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Point, ScalarExpr};
use crate::geometry::{
    self, conformal_factor_estimate, conformal_verdict, gradient, lie_bracket,
    lie_derivative_metric, mean_spread, metric_at, nabla, Chart, SamplePlan, VectorField,
};
use crate::report::{ClassificationReport, Track, Verdict};
use crate::warped::{DoublyWarpedProduct, SplitVectorField};

pub const DEFAULT_TIME: &str = "t";

#[derive(Clone, Debug)]
pub struct DoublyWarpedSpacetime {
    base: Chart,
    f: ScalarExpr,
    sigma: ScalarExpr,
    time: String,
    t_interval: (f64, f64),
    product: DoublyWarpedProduct,
}

impl DoublyWarpedSpacetime {
    pub fn new(
        base: Chart,
        f: ScalarExpr,
        sigma: ScalarExpr,
        t_interval: (f64, f64),
    ) -> Result<Self> {
        DoublyWarpedSpacetime::with_time(base, f, sigma, t_interval, DEFAULT_TIME)
    }

    pub fn with_time(
        base: Chart,
        f: ScalarExpr,
        sigma: ScalarExpr,
        t_interval: (f64, f64),
        time: &str,
    ) -> Result<Self> {
        let (lo, hi) = t_interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Invalid(format!("time interval ({lo}, {hi}) is empty")));
        }
        if let Some(v) = sigma.vars().into_iter().find(|v| v != time) {
            return Err(Error::Invalid(format!("sigma depends on `{v}`, not only on `{time}`")));
        }
        let interval = Chart::diagonal("I", vec![time.to_string()], vec![ScalarExpr::constant(-1.0)])?
            .with_signature(vec![-1])?;
        let product = DoublyWarpedProduct::new(interval, base.clone(), sigma.clone(), f.clone())?;
        Ok(DoublyWarpedSpacetime {
            base,
            f,
            sigma,
            time: time.to_string(),
            t_interval,
            product,
        })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn f(&self) -> &ScalarExpr {
        &self.f
    }

    pub fn sigma(&self) -> &ScalarExpr {
        &self.sigma
    }

    pub fn time(&self) -> &str {
        &self.time
    }

    pub fn t_interval(&self) -> (f64, f64) {
        self.t_interval
    }

    /// Dimension `n` of the base.
    pub fn n(&self) -> usize {
        self.base.dim()
    }

    /// The space-time as a doubly warped product `(I, -dt^2) x (M, g)`.
    pub fn product(&self) -> &DoublyWarpedProduct {
        &self.product
    }

    /// The assembled Lorentzian chart, time coordinate first.
    pub fn chart(&self) -> &Chart {
        self.product.chart()
    }

    pub fn assemble(&self) -> Chart {
        self.product.assemble()
    }

    /// Generalized Robertson–Walker: `f` constant.
    pub fn is_grw(&self) -> bool {
        self.f.vars().is_empty()
    }

    /// Standard static: `sigma` constant.
    pub fn is_standard_static(&self) -> bool {
        self.sigma.vars().is_empty()
    }

    pub fn sigma_dot(&self) -> ScalarExpr {
        self.sigma.diff(&self.time)
    }

    pub fn sigma_ddot(&self) -> ScalarExpr {
        self.sigma_dot().diff(&self.time)
    }

    /// `sigma⋄` on the interval with its Lorentzian metric: the interval
    /// Laplacian and gradient square both pick up the sign of `-dt^2`, giving
    /// `-(sigma sigma'' + (n - 1) sigma'^2)`.
    pub fn sigma_diamond(&self, p: &Point) -> Result<f64> {
        crate::warped::diamond(self.product.m1(), &self.sigma, self.n(), p)
    }

    /// `f⋄ = f Δf` on the base (the partner factor is one-dimensional).
    pub fn f_diamond(&self, p: &Point) -> Result<f64> {
        crate::warped::diamond(&self.base, &self.f, 1, p)
    }

    /// Draws samples, rejecting times outside the interval.
    pub fn draw(&self, plan: &SamplePlan, fields: &[&SpacetimeField]) -> Result<Vec<Point>> {
        for f in fields {
            f.check_on(self)?;
        }
        let splits: Vec<SplitVectorField> = fields.iter().map(|f| f.to_split(self)).collect();
        let refs: Vec<&SplitVectorField> = splits.iter().collect();
        plan.require(self.chart().coords())?;
        let (lo, hi) = self.t_interval;
        plan.draw(|p| {
            let t = p.get(&self.time).unwrap_or(f64::NAN);
            if !(lo..=hi).contains(&t) {
                return Ok(false);
            }
            self.product.accepts(p, &refs)
        })
    }

    /// `plan` with the time interval filled in when it lacks one.
    pub fn complete_plan(&self, plan: &SamplePlan) -> SamplePlan {
        let mut out = plan.clone();
        out.bounds.entry(self.time.clone()).or_insert(self.t_interval);
        out
    }
}

/// `zeta_bar = h d_t + zeta` with `h` a function of time and `zeta` a field
/// on the base.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeField {
    pub h: ScalarExpr,
    pub spatial: VectorField,
}

impl SpacetimeField {
    pub fn new(h: ScalarExpr, spatial: VectorField) -> SpacetimeField {
        SpacetimeField { h, spatial }
    }

    pub fn zero() -> SpacetimeField {
        SpacetimeField::new(ScalarExpr::zero(), VectorField::zero())
    }

    pub fn timelike(h: ScalarExpr) -> SpacetimeField {
        SpacetimeField::new(h, VectorField::zero())
    }

    pub fn spatial(zeta: VectorField) -> SpacetimeField {
        SpacetimeField::new(ScalarExpr::zero(), zeta)
    }

    pub fn check_on(&self, st: &DoublyWarpedSpacetime) -> Result<()> {
        if let Some(v) = self.h.vars().into_iter().find(|v| v != st.time()) {
            return Err(Error::Invalid(format!("h depends on `{v}`, not only on time")));
        }
        self.spatial.check_on(st.base())
    }

    pub fn to_split(&self, st: &DoublyWarpedSpacetime) -> SplitVectorField {
        SplitVectorField::new(
            VectorField::new([(st.time(), self.h.clone())]),
            self.spatial.clone(),
        )
    }

    /// `h d_t + zeta` on the assembled chart.
    pub fn lift(&self, st: &DoublyWarpedSpacetime) -> VectorField {
        self.to_split(st).lift()
    }

    pub fn h_dot(&self, st: &DoublyWarpedSpacetime) -> ScalarExpr {
        self.h.diff(st.time())
    }

    pub fn scaled(&self, c: f64) -> SpacetimeField {
        let k = ScalarExpr::constant(c);
        SpacetimeField::new(self.h.mul(&k), self.spatial.scaled(&k))
    }
}

/// `(L zeta_bar g_bar)(X_bar, Y_bar) = -2 x y f^2 [h' + zeta(ln f)]
///  + sigma^2 (L_zeta g)(X, Y) + 2 h sigma sigma' g(X, Y)`
/// for `X_bar = x d_t + X` and `Y_bar = y d_t + Y`.
pub fn lie_spacetime(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    x: &SpacetimeField,
    y: &SpacetimeField,
    p: &Point,
) -> Result<f64> {
    zeta.check_on(st)?;
    let xv = x.lift(st).values_at(st.chart(), p)?;
    let yv = y.lift(st).values_at(st.chart(), p)?;
    lie_spacetime_values(st, zeta, &xv, &yv, p)
}

fn lie_spacetime_values(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    x: &DVector<f64>,
    y: &DVector<f64>,
    p: &Point,
) -> Result<f64> {
    let (sigma, f) = st.product().warpings_at(p)?;
    let h = zeta.h.eval(p)?;
    let hdot = zeta.h_dot(st).eval(p)?;
    let sdot = st.sigma_dot().eval(p)?;
    let zf = zeta.spatial.apply(st.f()).eval(p)?;
    let g = metric_at(st.base(), p)?;
    let l = lie_derivative_metric(st.base(), &zeta.spatial, p)?;
    let n = st.n();
    let (xs, ys) = (x.rows(1, n).into_owned(), y.rows(1, n).into_owned());
    let q = |m: &DMatrix<f64>| (xs.transpose() * m * &ys)[(0, 0)];
    Ok(-2.0 * x[0] * y[0] * f * f * (hdot + zf / f)
        + sigma * sigma * q(&l)
        + 2.0 * h * sigma * sdot * q(&g))
}

/// [`lie_spacetime`] over the coordinate frame.
pub fn lie_spacetime_matrix(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    p: &Point,
) -> Result<DMatrix<f64>> {
    let n = st.n() + 1;
    let basis: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = lie_spacetime_values(st, zeta, &basis[i], &basis[j], p)?;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Compares [`lie_spacetime_matrix`] with the oracle Lie derivative.
pub fn lie_spacetime_report(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let plan = st.complete_plan(plan);
    let points = st.draw(&plan, &[zeta])?;
    let lifted = zeta.lift(st);
    let mut track = Track::new("closed form - oracle", plan.tol);
    for p in &points {
        let closed = lie_spacetime_matrix(st, zeta, p)?;
        let oracle = lie_derivative_metric(st.chart(), &lifted, p)?;
        let scale = closed.amax().max(oracle.amax());
        track.record((closed - oracle).amax(), scale, p);
    }
    let mut report = ClassificationReport::new("lie_spacetime", plan.tol);
    report.samples = points.len();
    report.verdict = if track.passed {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.add_track(track);
    Ok(report)
}

fn population_stddev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Whether `h d_t` is conformal, decided by fitting `a = h / sigma`.
///
/// The fit passes when `a` is constant across samples and non-negative; the
/// factor is then `2h'`. The direct measurement on the assembled chart is
/// reported next to the fit, together with the two factor demands read off
/// the time block (`2h'`) and the spatial block (`2 h sigma'/sigma`).
pub fn timelike_conformal_check(
    st: &DoublyWarpedSpacetime,
    h: &ScalarExpr,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let field = SpacetimeField::timelike(h.clone());
    let plan = st.complete_plan(plan);
    let points = st.draw(&plan, &[&field])?;
    let tol = plan.tol;
    let lifted = field.lift(st);
    let hdot = field.h_dot(st);
    let sdot = st.sigma_dot();
    let mut direct = Track::new("L g - rho g", tol).informational();
    let mut demands = Track::new("2h' - 2h sigma'/sigma", tol).informational();
    let mut factor = Track::new("rho - 2h'", tol);
    let (mut a, mut time_demand, mut space_demand, mut est) = (vec![], vec![], vec![], vec![]);
    for p in &points {
        let (sigma, _) = st.product().warpings_at(p)?;
        let hv = h.eval(p)?;
        a.push(hv / sigma);
        let d_t = 2.0 * hdot.eval(p)?;
        let d_s = 2.0 * hv * sdot.eval(p)? / sigma;
        time_demand.push(d_t);
        space_demand.push(d_s);
        demands.record((d_t - d_s).abs(), d_t.abs().max(d_s.abs()), p);
        let e = conformal_factor_estimate(st.chart(), &lifted, p)?;
        direct.record(e.residual, e.scale, p);
        est.push(e.factor);
    }
    let (a_mean, a_spread) = mean_spread(&a);
    let a_std = population_stddev(&a);
    let constant = geometry::within(a_std, a_mean, tol);
    let nonnegative = a.iter().all(|v| *v >= -tol);
    let fit = constant && nonnegative;
    let mut report = ClassificationReport::new("timelike_conformal", tol);
    report.samples = points.len();
    report.derive("a_mean", a_mean);
    report.derive("a_spread", a_spread);
    report.derive("a_stddev", a_std);
    let (tm, _) = mean_spread(&time_demand);
    let (sm, _) = mean_spread(&space_demand);
    report.derive("demand_time_mean", tm);
    report.derive("demand_space_mean", sm);
    if fit {
        for (p, (e, d)) in points.iter().zip(est.iter().zip(&time_demand)) {
            factor.record((e - d).abs(), e.abs().max(d.abs()), p);
        }
        let (fm, fs) = mean_spread(&time_demand);
        report.derive("factor_mean", fm);
        report.derive("factor_spread", fs);
        report.verdict = if factor.passed {
            conformal_verdict(true, &time_demand, tol)
        } else {
            Verdict::NotConformal
        };
    } else {
        report.verdict = Verdict::NotConformal;
        report.note("h is not a non-negative constant multiple of sigma; the time and space blocks demand different factors");
    }
    if direct.passed != fit {
        if constant && !nonnegative && direct.passed {
            report.flag("a is constant but negative: h d_t is conformal by direct measurement, yet the fit requires a >= 0");
        } else {
            report.flag("fit verdict and direct measurement disagree");
        }
    }
    report.add_track(factor);
    report.add_track(direct);
    report.add_track(demands);
    Ok(report)
}

/// Killing test for `h d_t + zeta` with the two factor-level conditions
/// `h' + zeta(ln f) = 0` and `L_zeta g = (-2 h sigma'/sigma) g`, plus the
/// direct product measurement. The verdict is the direct one; a flag is
/// raised whenever the factor-level conditions and the direct measurement
/// disagree.
pub fn killing_decomposition_check(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let plan = st.complete_plan(plan);
    let points = st.draw(&plan, &[zeta])?;
    let tol = plan.tol;
    let lifted = zeta.lift(st);
    let hdot = zeta.h_dot(st);
    let sdot = st.sigma_dot();
    let zf = zeta.spatial.apply(st.f());
    let mut time = Track::new("h' + zeta(ln f)", tol).informational();
    let mut space = Track::new("L_zeta g + (2h sigma'/sigma) g", tol).informational();
    let mut direct = Track::new("product L g", tol);
    for p in &points {
        let (sigma, f) = st.product().warpings_at(p)?;
        let hd = hdot.eval(p)?;
        let lf = zf.eval(p)? / f;
        time.record((hd + lf).abs(), hd.abs().max(lf.abs()), p);
        let rho2 = -2.0 * zeta.h.eval(p)? * sdot.eval(p)? / sigma;
        let l = lie_derivative_metric(st.base(), &zeta.spatial, p)?;
        let g = metric_at(st.base(), p)?;
        space.record((&l - &g * rho2).amax(), l.amax().max(rho2.abs() * g.amax()), p);
        let lbar = lie_derivative_metric(st.chart(), &lifted, p)?;
        let scale = nabla(st.chart(), &lifted, p)?.amax() * metric_at(st.chart(), p)?.amax();
        direct.record(lbar.amax(), scale, p);
    }
    let mut report = ClassificationReport::new("killing_decomposition", tol);
    report.samples = points.len();
    let conditions = time.passed && space.passed;
    report.verdict = if direct.passed {
        Verdict::Killing
    } else {
        Verdict::NotKilling
    };
    report.derive("conditions_hold", f64::from(u8::from(conditions)));
    if conditions != direct.passed {
        report.flag("factor-level conditions and direct measurement disagree");
    }
    report.add_track(direct);
    report.add_track(time);
    report.add_track(space);
    Ok(report)
}

/// Tolerance on the normalization of a unit tangent.
pub const UNIT_TOL: f64 = 1e-9;

/// The along-curve conformal factor in two forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlongCurveFactor {
    /// `2h' eps - 2 sigma^2 g([zeta,V],V) + 2(h sigma sigma' - h' sigma^2) g(V,V)`, times `eps`.
    pub corrected: f64,
    /// The same with `+2 sigma^2 g([zeta,V],V)`.
    pub printed: f64,
}

/// Conformal factor of `zeta_bar` read off a unit tangent field
/// `V_bar = v d_t + V` with `g_bar(V_bar, V_bar) = eps` (`eps = +1` by
/// default, matching `-f^2 v^2 + sigma^2 g(V, V) = 1`).
///
/// The formula uses that `V_bar` stays normalized along the flow of
/// `zeta_bar`, so `V_bar` is a field, not a single vector.
pub fn conformal_factor_along_curve_st(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    v: &SpacetimeField,
    p: &Point,
    normalization: f64,
) -> Result<AlongCurveFactor> {
    if normalization != 1.0 && normalization != -1.0 {
        return Err(Error::Invalid("normalization must be +1 or -1".into()));
    }
    zeta.check_on(st)?;
    v.check_on(st)?;
    let vv = v.lift(st).values_at(st.chart(), p)?;
    let norm = st.chart().inner(p, &vv, &vv)?;
    if (norm - normalization).abs() > UNIT_TOL {
        return Err(Error::Precondition(format!(
            "tangent is not normalized: g(V, V) = {norm}, expected {normalization}"
        )));
    }
    let (sigma, _) = st.product().warpings_at(p)?;
    let h = zeta.h.eval(p)?;
    let hd = zeta.h_dot(st).eval(p)?;
    let sd = st.sigma_dot().eval(p)?;
    let base_v = v.spatial.values_at(st.base(), p)?;
    let g = metric_at(st.base(), p)?;
    let gvv = (base_v.transpose() * &g * &base_v)[(0, 0)];
    let bracket = lie_bracket(st.base(), &zeta.spatial, &v.spatial, p)?;
    let gbv = (bracket.transpose() * &g * &base_v)[(0, 0)];
    let common = 2.0 * hd * normalization + 2.0 * (h * sigma * sd - hd * sigma * sigma) * gvv;
    let term = 2.0 * sigma * sigma * gbv;
    Ok(AlongCurveFactor {
        corrected: (common - term) * normalization,
        printed: (common + term) * normalization,
    })
}

/// Along-curve factor against the trace estimate on samples where
/// `zeta_bar` is conformal.
pub fn conformal_along_curve_st_report(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    v: &SpacetimeField,
    normalization: f64,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let plan = st.complete_plan(plan);
    let points = st.draw(&plan, &[zeta, v])?;
    let tol = plan.tol;
    let lifted = zeta.lift(st);
    let mut conformal = Track::new("L g - rho g", tol).informational();
    let mut corrected = Track::new("corrected - trace factor", tol);
    let mut printed = Track::new("printed - trace factor", tol).informational();
    let mut values = Vec::new();
    for p in &points {
        let a = conformal_factor_along_curve_st(st, zeta, v, p, normalization)?;
        let e = conformal_factor_estimate(st.chart(), &lifted, p)?;
        conformal.record(e.residual, e.scale, p);
        if geometry::within(e.residual, e.scale, tol) {
            corrected.record((a.corrected - e.factor).abs(), a.corrected.abs().max(e.factor.abs()), p);
            printed.record((a.printed - e.factor).abs(), a.printed.abs().max(e.factor.abs()), p);
        }
        values.push(a.corrected);
    }
    let mut report = ClassificationReport::new("conformal_along_curve_st", tol);
    report.samples = points.len();
    report.verdict = if corrected.passed {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let (mean, spread) = mean_spread(&values);
    report.derive("factor_mean", mean);
    report.derive("factor_spread", spread);
    if !printed.passed {
        report.flag("the printed sign of the bracket term disagrees with the trace factor");
    }
    if corrected.residuals.is_empty() {
        report.note("zeta is not conformal at any sample; nothing to compare");
    }
    report.add_track(corrected);
    report.add_track(printed);
    report.add_track(conformal);
    Ok(report)
}

/// Concurrency test `D_X zeta_bar = X` on the frame and random probes, with
/// the sufficient-condition checklist and projection diagnostics.
pub fn concurrent_check_st(
    st: &DoublyWarpedSpacetime,
    zeta: &SpacetimeField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let plan = st.complete_plan(plan);
    let points = st.draw(&plan, &[zeta])?;
    let tol = plan.tol;
    let lifted = zeta.lift(st);
    let probes = plan.probes(st.n() + 1);
    let hdot = zeta.h_dot(st);
    let sdot = st.sigma_dot();
    let mut direct = Track::new("D_X zeta - X", tol);
    let mut conformal = Track::new("L g - 2 g", tol).informational();
    let mut h_one = Track::new("h' - 1", tol).informational();
    let mut base_conc = Track::new("D_X zeta - X on M", tol).informational();
    let mut grad_f = Track::new("grad f", tol).informational();
    let mut sig_dot = Track::new("sigma'", tol).informational();
    let mut ew4 = Track::new("h f grad f", tol).informational();
    let mut ew5 = Track::new("sigma sigma' zeta", tol).informational();
    let mut implication = Track::new("h sigma' |grad f|", tol).informational();
    let mut factors = Vec::new();
    let id_base = DMatrix::<f64>::identity(st.n(), st.n());
    for p in &points {
        let (sigma, f) = st.product().warpings_at(p)?;
        let m = nabla(st.chart(), &lifted, p)?;
        let id = DMatrix::<f64>::identity(m.nrows(), m.ncols());
        let diff = &m - &id;
        let scale = m.amax().max(1.0);
        direct.begin_sample();
        for x in &probes {
            direct.push((&diff * x).amax(), scale, p);
        }
        let e = conformal_factor_estimate(st.chart(), &lifted, p)?;
        conformal.record(
            (lie_derivative_metric(st.chart(), &lifted, p)? - metric_at(st.chart(), p)? * 2.0).amax(),
            e.scale,
            p,
        );
        factors.push(e.factor);
        let h = zeta.h.eval(p)?;
        let hd = hdot.eval(p)?;
        let sd = sdot.eval(p)?;
        h_one.record((hd - 1.0).abs(), 1.0, p);
        let mb = nabla(st.base(), &zeta.spatial, p)?;
        base_conc.record((&mb - &id_base).amax(), mb.amax(), p);
        let gf = gradient(st.base(), st.f(), p)?.amax();
        grad_f.record(gf, f, p);
        sig_dot.record(sd.abs(), sigma, p);
        ew4.record((h * f * gf).abs(), 0.0, p);
        let z = zeta.spatial.values_at(st.base(), p)?.amax();
        ew5.record((sigma * sd * z).abs(), 0.0, p);
        implication.record((h * sd * gf).abs(), 0.0, p);
    }
    let mut report = ClassificationReport::new("concurrent_st", tol);
    report.samples = points.len();
    report.verdict = if direct.passed {
        Verdict::Concurrent
    } else {
        Verdict::NotConcurrent
    };
    let (fm, fs) = mean_spread(&factors);
    report.derive("factor_mean", fm);
    report.derive("factor_spread", fs);
    let checklist = h_one.passed && base_conc.passed && grad_f.passed && sig_dot.passed;
    report.derive("constant_warpings_checklist", f64::from(u8::from(checklist)));
    report.derive("h_zero_or_sigma_static", f64::from(u8::from(implication.passed)));
    if checklist && !direct.passed {
        report.flag("sufficient conditions hold but the field is not concurrent");
    }
    if direct.passed && !(ew4.passed && ew5.passed && implication.passed) {
        report.flag("concurrent field violates the projection identities");
    }
    if direct.passed && !conformal.passed {
        report.flag("concurrent field is not conformal with factor 2");
    }
    for t in [direct, conformal, h_one, base_conc, grad_f, sig_dot, ew4, ew5, implication] {
        report.add_track(t);
    }
    Ok(report)
}

/// One solution family of the two-dimensional concurrent system.
///
/// Expressions use the free parameters `a`, `b`, `r` and `c` (`c` and `d`
/// for constant warpings).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcurrentFamily {
    pub case: usize,
    pub branch: String,
    pub h: String,
    pub k: String,
    pub sigma: String,
    pub f: String,
    pub field: String,
}

/// A rejected branch of the case split with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedBranch {
    pub branch: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcurrentSolution {
    pub families: Vec<ConcurrentFamily>,
    pub rejected: Vec<RejectedBranch>,
}

/// Solves the concurrent system on `_f I x_sigma R` with `zeta_bar = h d_t + k d_x`:
///
/// * `h' f + k f' = f`
/// * `h f f' + k sigma sigma' = 0`
/// * `h f f' - k sigma sigma' = 0`
/// * `h sigma' + k' sigma = sigma`
///
/// The middle pair forces `h f f' = 0` and `k sigma sigma' = 0`; since
/// `f, sigma > 0` this splits into `h = 0 or f' = 0` and `k = 0 or sigma' = 0`.
/// Each branch reduces the outer equations to linear ODEs with closed-form
/// solutions.
pub fn solve_concurrent_2d() -> ConcurrentSolution {
    let mut families = Vec::new();
    let mut rejected = Vec::new();
    for h_zero in [true, false] {
        for k_zero in [false, true] {
            // h = 0 or f' = 0; k = 0 or sigma' = 0.
            match (h_zero, k_zero) {
                (true, false) => {
                    // sigma' = 0: k' = 1 so k = x + a; then k f' = f gives f = r (x + a).
                    families.push(ConcurrentFamily {
                        case: 1,
                        branch: "h = 0, sigma' = 0".into(),
                        h: "0".into(),
                        k: "x+a".into(),
                        sigma: "c".into(),
                        f: "r*(x+a)".into(),
                        field: "(x+a) d_x".into(),
                    });
                }
                (false, true) => {
                    // f' = 0: h' = 1 so h = t + a; then h sigma' = sigma gives sigma = r (t + a).
                    families.push(ConcurrentFamily {
                        case: 2,
                        branch: "k = 0, f' = 0".into(),
                        h: "t+a".into(),
                        k: "0".into(),
                        sigma: "r*(t+a)".into(),
                        f: "c".into(),
                        field: "(t+a) d_t".into(),
                    });
                }
                (false, false) => {
                    // f' = 0 and sigma' = 0: h' = 1 and k' = 1.
                    families.push(ConcurrentFamily {
                        case: 3,
                        branch: "f' = 0, sigma' = 0".into(),
                        h: "t+a".into(),
                        k: "x+b".into(),
                        sigma: "d".into(),
                        f: "c".into(),
                        field: "(t+a) d_t + (x+b) d_x".into(),
                    });
                }
                (true, true) => rejected.push(RejectedBranch {
                    branch: "h = 0, k = 0".into(),
                    reason: "the first equation reduces to 0 = f, impossible for f > 0".into(),
                }),
            }
        }
    }
    families.sort_by_key(|f| f.case);
    ConcurrentSolution { families, rejected }
}

/// Parameters for instantiating a [`ConcurrentFamily`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub c: f64,
    pub d: f64,
}

impl FamilyParams {
    fn constants(&self) -> BTreeMap<String, f64> {
        [("a", self.a), ("b", self.b), ("r", self.r), ("c", self.c), ("d", self.d)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

impl ConcurrentFamily {
    /// The space-time and field for the given parameters, on the time
    /// interval `t_interval` with base coordinate `x`.
    pub fn instantiate(
        &self,
        params: FamilyParams,
        t_interval: (f64, f64),
    ) -> Result<(DoublyWarpedSpacetime, SpacetimeField)> {
        let consts = params.constants();
        let bind = |s: &str| -> Result<ScalarExpr> { Ok(crate::expr::parse(s)?.bind_constants(&consts)) };
        let st = DoublyWarpedSpacetime::new(
            Chart::euclidean("R", &["x"]),
            bind(&self.f)?,
            bind(&self.sigma)?,
            t_interval,
        )?;
        let field = SpacetimeField::new(bind(&self.h)?, VectorField::new([("x", bind(&self.k)?)]));
        Ok((st, field))
    }
}

/// Plain-text table of the solution families, one row per case.
pub fn render_families(solution: &ConcurrentSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<4} {:<7} {:<7} {:<10} {:<10} {}",
        "case", "h", "k", "sigma", "f", "field"
    );
    for f in &solution.families {
        let _ = writeln!(
            out,
            "{:<4} {:<7} {:<7} {:<10} {:<10} {}",
            f.case, f.h, f.k, f.sigma, f.f, f.field
        );
    }
    out
}

/// Outcome of certifying one family over seeded parameter draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCertificate {
    pub family: ConcurrentFamily,
    pub instances: usize,
    pub passed: usize,
    pub worst_residual: f64,
    /// Largest `|rho - 2|` seen, with `L g = rho g`.
    pub factor_deviation: f64,
}

/// Parameter ranges for [`certify_families`]: `a, b` in `[-1, 1]`, `r, c, d`
/// in `[0.5, 2]`, with `t, x` sampled in `[2, 3]` so `t + a` and `x + a` stay
/// positive.
pub const FAMILY_BOX: (f64, f64) = (2.0, 3.0);

/// Instantiates every family `instances` times with seeded parameters and
/// runs [`concurrent_check_st`] on each instance.
pub fn certify_families(
    solution: &ConcurrentSolution,
    instances: usize,
    plan: &SamplePlan,
) -> Result<Vec<FamilyCertificate>> {
    use rand::{Rng, SeedableRng};
    let mut plan = plan.clone();
    plan.bounds.entry("x".into()).or_insert(FAMILY_BOX);
    let mut out = Vec::new();
    for fam in &solution.families {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(plan.seed ^ ((fam.case as u64) << 40));
        let mut cert = FamilyCertificate {
            family: fam.clone(),
            instances,
            passed: 0,
            worst_residual: 0.0,
            factor_deviation: 0.0,
        };
        for j in 0..instances {
            let params = FamilyParams {
                a: rng.random_range(-1.0..=1.0),
                b: rng.random_range(-1.0..=1.0),
                r: rng.random_range(0.5..=2.0),
                c: rng.random_range(0.5..=2.0),
                d: rng.random_range(0.5..=2.0),
            };
            let (st, field) = fam.instantiate(params, FAMILY_BOX)?;
            let report = concurrent_check_st(&st, &field, &plan.clone().with_seed(plan.seed.wrapping_add(j as u64)))?;
            if report.verdict == Verdict::Concurrent {
                cert.passed += 1;
            }
            cert.worst_residual = cert.worst_residual.max(report.worst_residual);
            let dev = (report.derived["factor_mean"] - 2.0).abs() + report.derived["factor_spread"];
            cert.factor_deviation = cert.factor_deviation.max(dev);
        }
        out.push(cert);
    }
    Ok(out)
}
