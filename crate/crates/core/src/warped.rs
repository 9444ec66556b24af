//! Doubly warped products `M = M1 x M2` with metric `f2^2 g1 + f1^2 g2`,
//! where `f1 > 0` lives on `M1` and `f2 > 0` on `M2`.
//!
//! Every closed form here uses factor-level data only: the factor charts,
//! their own Christoffel symbols, gradients, Hessians and Laplacians, and the
//! warping functions. The assembled product chart is kept alongside so each
//! closed form can be compared with the brute-force value from
//! [`crate::geometry`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Point, ScalarExpr};
use crate::geometry::{
    self, accept_on, conformal_factor_estimate, conformal_verdict, covariant_derivative,
    covariant_derivative_along, gradient, hessian, laplacian, lie_derivative_metric, mean_spread,
    metric_at, nabla, ricci, Chart, CurveState, SamplePlan, VectorField,
};
use crate::report::{ClassificationReport, Track, Verdict};

/// Warping functions at or below this value are rejected.
pub const MIN_WARPING: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DoublyWarpedProduct {
    m1: Chart,
    m2: Chart,
    f1: ScalarExpr,
    f2: ScalarExpr,
    product: Chart,
}

impl DoublyWarpedProduct {
    pub fn new(m1: Chart, m2: Chart, f1: ScalarExpr, f2: ScalarExpr) -> Result<Self> {
        if let Some(c) = m1.coords().iter().find(|c| m2.index_of(c).is_some()) {
            return Err(Error::CoordinateCollision(c.clone()));
        }
        for (f, m, name) in [(&f1, &m1, "f1"), (&f2, &m2, "f2")] {
            if let Some(v) = f.vars().into_iter().find(|v| m.index_of(v).is_none()) {
                return Err(Error::Invalid(format!(
                    "{name} depends on `{v}`, which is not a coordinate of `{}`",
                    m.name()
                )));
            }
        }
        let product = assemble_chart(&m1, &m2, &f1, &f2)?;
        Ok(DoublyWarpedProduct {
            m1,
            m2,
            f1,
            f2,
            product,
        })
    }

    /// Singly warped product `M1 x_f M2` (`f2 = 1`).
    pub fn singly(m1: Chart, m2: Chart, f: ScalarExpr) -> Result<Self> {
        DoublyWarpedProduct::new(m1, m2, f, ScalarExpr::one())
    }

    pub fn m1(&self) -> &Chart {
        &self.m1
    }

    pub fn m2(&self) -> &Chart {
        &self.m2
    }

    pub fn f1(&self) -> &ScalarExpr {
        &self.f1
    }

    pub fn f2(&self) -> &ScalarExpr {
        &self.f2
    }

    pub fn n1(&self) -> usize {
        self.m1.dim()
    }

    pub fn n2(&self) -> usize {
        self.m2.dim()
    }

    pub fn dim(&self) -> usize {
        self.n1() + self.n2()
    }

    /// The assembled product chart.
    pub fn chart(&self) -> &Chart {
        &self.product
    }

    pub fn assemble(&self) -> Chart {
        self.product.clone()
    }

    /// `(f1, f2)` at `p`, failing unless both are positive.
    pub fn warpings_at(&self, p: &Point) -> Result<(f64, f64)> {
        let a = self.f1.eval(p)?;
        let b = self.f2.eval(p)?;
        for (name, v) in [("f1", a), ("f2", b)] {
            if !(v > MIN_WARPING) {
                return Err(Error::NonPositiveWarping {
                    name: name.into(),
                    value: v,
                });
            }
        }
        Ok((a, b))
    }

    /// Whether `p` is a usable sample: positive warpings, invertible
    /// metrics and evaluable fields.
    pub fn accepts(&self, p: &Point, fields: &[&SplitVectorField]) -> Result<bool> {
        self.warpings_at(p)?;
        accept_on(&self.m1, &[], p)?;
        accept_on(&self.m2, &[], p)?;
        let lifts: Vec<VectorField> = fields.iter().map(|f| f.lift()).collect();
        let refs: Vec<&VectorField> = lifts.iter().collect();
        accept_on(&self.product, &refs, p)
    }

    pub fn draw(&self, plan: &SamplePlan, fields: &[&SplitVectorField]) -> Result<Vec<Point>> {
        plan.require(self.product.coords())?;
        for f in fields {
            f.check_on(self)?;
        }
        plan.draw(|p| self.accepts(p, fields))
    }

    fn split(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (
            v.rows(0, self.n1()).into_owned(),
            v.rows(self.n1(), self.n2()).into_owned(),
        )
    }

    fn join(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(0, self.n1()).copy_from(a);
        out.rows_mut(self.n1(), self.n2()).copy_from(b);
        out
    }

    /// `X_i(ln f_i)` for a factor vector given numerically.
    fn log_derivative(&self, which: Factor, v: &DVector<f64>, p: &Point) -> Result<f64> {
        let (chart, f) = self.factor(which);
        let (f1, f2) = self.warpings_at(p)?;
        let fv = if which == Factor::First { f1 } else { f2 };
        let mut s = 0.0;
        for (k, c) in chart.coords().iter().enumerate() {
            if v[k] != 0.0 {
                s += v[k] * f.diff(c).eval(p)?;
            }
        }
        Ok(s / fv)
    }

    fn factor(&self, which: Factor) -> (&Chart, &ScalarExpr) {
        match which {
            Factor::First => (&self.m1, &self.f1),
            Factor::Second => (&self.m2, &self.f2),
        }
    }
}

/// Selects one factor of a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

impl Factor {
    pub fn from_index(i: usize) -> Option<Factor> {
        match i {
            1 => Some(Factor::First),
            2 => Some(Factor::Second),
            _ => None,
        }
    }

    pub fn other(self) -> Factor {
        match self {
            Factor::First => Factor::Second,
            Factor::Second => Factor::First,
        }
    }
}

fn assemble_chart(m1: &Chart, m2: &Chart, f1: &ScalarExpr, f2: &ScalarExpr) -> Result<Chart> {
    let n1 = m1.dim();
    let n = n1 + m2.dim();
    let s2 = f2.powi(2);
    let s1 = f1.powi(2);
    let mut rows = vec![vec![ScalarExpr::zero(); n]; n];
    for i in 0..n1 {
        for j in 0..n1 {
            rows[i][j] = s2.mul(m1.component(i, j));
        }
    }
    for i in 0..m2.dim() {
        for j in 0..m2.dim() {
            rows[n1 + i][n1 + j] = s1.mul(m2.component(i, j));
        }
    }
    let coords = m1.coords().iter().chain(m2.coords()).cloned().collect();
    let signature = m1.signature().iter().chain(m2.signature()).copied().collect();
    Chart::new(format!("{}x{}", m1.name(), m2.name()), coords, rows)?.with_signature(signature)
}

/// Block metric `f2^2 g1 + f1^2 g2` as a chart.
pub fn assemble(w: &DoublyWarpedProduct) -> Chart {
    w.assemble()
}

/// `zeta = zeta1 + zeta2` with `zeta_i` a field on factor `i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitVectorField {
    pub part1: VectorField,
    pub part2: VectorField,
}

impl SplitVectorField {
    pub fn new(part1: VectorField, part2: VectorField) -> SplitVectorField {
        SplitVectorField { part1, part2 }
    }

    pub fn zero() -> SplitVectorField {
        SplitVectorField::default()
    }

    /// Lift of the `k`-th product coordinate field.
    pub fn coordinate(w: &DoublyWarpedProduct, k: usize) -> SplitVectorField {
        let c = &w.chart().coords()[k];
        if k < w.n1() {
            SplitVectorField::new(VectorField::coordinate(c), VectorField::zero())
        } else {
            SplitVectorField::new(VectorField::zero(), VectorField::coordinate(c))
        }
    }

    pub fn part(&self, which: Factor) -> &VectorField {
        match which {
            Factor::First => &self.part1,
            Factor::Second => &self.part2,
        }
    }

    /// Componentwise union on the product chart.
    pub fn lift(&self) -> VectorField {
        self.part1.plus(&self.part2)
    }

    /// Each part must live on its own factor.
    pub fn check_on(&self, w: &DoublyWarpedProduct) -> Result<()> {
        self.part1.check_on(w.m1())?;
        self.part2.check_on(w.m2())
    }
}

fn factor_values(
    w: &DoublyWarpedProduct,
    x: &SplitVectorField,
    p: &Point,
) -> Result<(DVector<f64>, DVector<f64>)> {
    Ok((
        x.part1.values_at(w.m1(), p)?,
        x.part2.values_at(w.m2(), p)?,
    ))
}

/// `D_X Y` from the split connection formulas, extended bilinearly:
///
/// * block 1: `D1_{X1}Y1 + Y2(ln f2) X1 + X2(ln f2) Y1 - (f1/f2^2) g2(X2,Y2) grad1 f1`
/// * block 2: `D2_{X2}Y2 + X1(ln f1) Y2 + Y1(ln f1) X2 - (f2/f1^2) g1(X1,Y1) grad2 f2`
pub fn connection_closed_form(
    w: &DoublyWarpedProduct,
    x: &SplitVectorField,
    y: &SplitVectorField,
    p: &Point,
) -> Result<DVector<f64>> {
    x.check_on(w)?;
    y.check_on(w)?;
    let (f1, f2) = w.warpings_at(p)?;
    let (x1, x2) = factor_values(w, x, p)?;
    let (y1, y2) = factor_values(w, y, p)?;
    let g1 = metric_at(w.m1(), p)?;
    let g2 = metric_at(w.m2(), p)?;

    let mut b1 = covariant_derivative(w.m1(), &x.part1, &y.part1, p)?;
    b1 += &x1 * w.log_derivative(Factor::Second, &y2, p)?;
    b1 += &y1 * w.log_derivative(Factor::Second, &x2, p)?;
    let g2xy = (x2.transpose() * &g2 * &y2)[(0, 0)];
    if g2xy != 0.0 {
        b1 -= gradient(w.m1(), w.f1(), p)? * (f1 / (f2 * f2) * g2xy);
    }

    let mut b2 = covariant_derivative(w.m2(), &x.part2, &y.part2, p)?;
    b2 += &x2 * w.log_derivative(Factor::First, &y1, p)?;
    b2 += &y2 * w.log_derivative(Factor::First, &x1, p)?;
    let g1xy = (x1.transpose() * &g1 * &y1)[(0, 0)];
    if g1xy != 0.0 {
        b2 -= gradient(w.m2(), w.f2(), p)? * (f2 / (f1 * f1) * g1xy);
    }
    Ok(w.join(&b1, &b2))
}

/// `f_i Δ^i f_i + (n_j - 1) g_i(grad f_i, grad f_i)`, computed on factor
/// `i` with `n_j` the dimension of the other factor.
pub fn f_diamond(w: &DoublyWarpedProduct, which: Factor, p: &Point) -> Result<f64> {
    let (chart, f) = w.factor(which);
    let n_other = w.factor(which.other()).0.dim();
    diamond(chart, f, n_other, p)
}

/// `f Δf + (n_other - 1) |grad f|^2` on `chart`.
pub fn diamond(chart: &Chart, f: &ScalarExpr, n_other: usize, p: &Point) -> Result<f64> {
    let fv = f.eval(p)?;
    let grad = gradient(chart, f, p)?;
    let g = metric_at(chart, p)?;
    let sq = (grad.transpose() * g * &grad)[(0, 0)];
    Ok(fv * laplacian(chart, f, p)? + (n_other as f64 - 1.0) * sq)
}

/// Ricci tensor of the product from factor data:
///
/// * `Ric(X1,Y1) = Ric1 - (n2/f1) H^{f1} - (f2⋄ / f1^2) g1`
/// * `Ric(X2,Y2) = Ric2 - (n1/f2) H^{f2} - (f1⋄ / f2^2) g2`
/// * `Ric(X1,Y2) = (n - 2) X1(ln f1) Y2(ln f2)`
///
/// The `1/f_i^2` on the diamond terms is required; without it the diagonal
/// blocks disagree with the brute-force Ricci tensor whenever both warpings
/// vary.
pub fn ricci_closed_form(w: &DoublyWarpedProduct, p: &Point) -> Result<DMatrix<f64>> {
    let (f1, f2) = w.warpings_at(p)?;
    let (n1, n2, n) = (w.n1(), w.n2(), w.dim());
    let block1 = ricci(w.m1(), p)? - hessian(w.m1(), w.f1(), p)? * (n2 as f64 / f1)
        - metric_at(w.m1(), p)? * (f_diamond(w, Factor::Second, p)? / (f1 * f1));
    let block2 = ricci(w.m2(), p)? - hessian(w.m2(), w.f2(), p)? * (n1 as f64 / f2)
        - metric_at(w.m2(), p)? * (f_diamond(w, Factor::First, p)? / (f2 * f2));
    let d1: Vec<f64> = w
        .m1()
        .coords()
        .iter()
        .map(|c| w.f1().diff(c).eval(p).map(|v| v / f1))
        .collect::<std::result::Result<_, _>>()?;
    let d2: Vec<f64> = w
        .m2()
        .coords()
        .iter()
        .map(|c| w.f2().diff(c).eval(p).map(|v| v / f2))
        .collect::<std::result::Result<_, _>>()?;
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (n1, n1)).copy_from(&block1);
    out.view_mut((n1, n1), (n2, n2)).copy_from(&block2);
    let coeff = n as f64 - 2.0;
    for a in 0..n1 {
        for b in 0..n2 {
            let v = coeff * d1[a] * d2[b];
            out[(a, n1 + b)] = v;
            out[(n1 + b, a)] = v;
        }
    }
    Ok(out)
}

/// `(L_zeta g)(X, Y)` from factor Lie derivatives:
/// `f2^2 (L1 g1)(X1,Y1) + f1^2 (L2 g2)(X2,Y2) + 2 f1 zeta1(f1) g2(X2,Y2) + 2 f2 zeta2(f2) g1(X1,Y1)`.
pub fn lie_split(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    x: &SplitVectorField,
    y: &SplitVectorField,
    p: &Point,
) -> Result<f64> {
    zeta.check_on(w)?;
    let (x1, x2) = factor_values(w, x, p)?;
    let (y1, y2) = factor_values(w, y, p)?;
    lie_split_values(w, zeta, &w.join(&x1, &x2), &w.join(&y1, &y2), p)
}

fn lie_split_values(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    x: &DVector<f64>,
    y: &DVector<f64>,
    p: &Point,
) -> Result<f64> {
    let (f1, f2) = w.warpings_at(p)?;
    let (x1, x2) = w.split(x);
    let (y1, y2) = w.split(y);
    let l1 = lie_derivative_metric(w.m1(), &zeta.part1, p)?;
    let l2 = lie_derivative_metric(w.m2(), &zeta.part2, p)?;
    let g1 = metric_at(w.m1(), p)?;
    let g2 = metric_at(w.m2(), p)?;
    let q = |m: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * m * b)[(0, 0)];
    let z1f1 = zeta.part1.apply(w.f1()).eval(p)?;
    let z2f2 = zeta.part2.apply(w.f2()).eval(p)?;
    Ok(f2 * f2 * q(&l1, &x1, &y1)
        + f1 * f1 * q(&l2, &x2, &y2)
        + 2.0 * f1 * z1f1 * q(&g2, &x2, &y2)
        + 2.0 * f2 * z2f2 * q(&g1, &x1, &y1))
}

/// Full matrix of [`lie_split`] over the product coordinate frame.
pub fn lie_split_matrix(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    p: &Point,
) -> Result<DMatrix<f64>> {
    let n = w.dim();
    let basis: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = lie_split_values(w, zeta, &basis[i], &basis[j], p)?;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Compares [`connection_closed_form`] with the oracle for every pair of
/// lifted coordinate fields, plus any extra split fields supplied.
pub fn connection_report(
    w: &DoublyWarpedProduct,
    extra: &[SplitVectorField],
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let refs: Vec<&SplitVectorField> = extra.iter().collect();
    let points = w.draw(plan, &refs)?;
    let mut fields: Vec<SplitVectorField> =
        (0..w.dim()).map(|k| SplitVectorField::coordinate(w, k)).collect();
    fields.extend(extra.iter().cloned());
    let mut track = Track::new("closed form - oracle", plan.tol);
    for p in &points {
        track.begin_sample();
        for x in &fields {
            for y in &fields {
                let closed = connection_closed_form(w, x, y, p)?;
                let oracle = covariant_derivative(w.chart(), &x.lift(), &y.lift(), p)?;
                let scale = closed.amax().max(oracle.amax());
                track.push((closed - oracle).amax(), scale, p);
            }
        }
    }
    Ok(equivalence_report("connection", plan.tol, points.len(), track))
}

/// Compares [`ricci_closed_form`] with the oracle Ricci tensor.
pub fn ricci_report(w: &DoublyWarpedProduct, plan: &SamplePlan) -> Result<ClassificationReport> {
    let points = w.draw(plan, &[])?;
    let mut track = Track::new("closed form - oracle", plan.tol);
    let mut asym = Track::new("closed form asymmetry", plan.tol);
    for p in &points {
        let closed = ricci_closed_form(w, p)?;
        let oracle = ricci(w.chart(), p)?;
        let scale = closed.amax().max(oracle.amax());
        track.record((&closed - oracle).amax(), scale, p);
        asym.record((&closed - closed.transpose()).amax(), scale, p);
    }
    let mut report = equivalence_report("ricci", plan.tol, points.len(), track);
    report.add_track(asym);
    report.verdict = if report.gating_passed() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.note("diamond terms carry 1/f_i^2; f_i⋄ uses the other factor's dimension");
    Ok(report)
}

/// Compares [`lie_split`] with the oracle Lie derivative over the frame.
pub fn lie_split_report(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let points = w.draw(plan, &[zeta])?;
    let lifted = zeta.lift();
    let mut track = Track::new("closed form - oracle", plan.tol);
    for p in &points {
        let closed = lie_split_matrix(w, zeta, p)?;
        let oracle = lie_derivative_metric(w.chart(), &lifted, p)?;
        let scale = closed.amax().max(oracle.amax());
        track.record((closed - oracle).amax(), scale, p);
    }
    Ok(equivalence_report("lie_split", plan.tol, points.len(), track))
}

fn equivalence_report(check: &str, tol: f64, samples: usize, track: Track) -> ClassificationReport {
    let mut report = ClassificationReport::new(check, tol);
    report.samples = samples;
    report.verdict = if track.passed {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report.add_track(track);
    report
}

/// Conformal analysis of a split field.
///
/// Tracks: each factor part against its own trace factor, the compatibility
/// condition `rho1 - rho2 = 2[zeta1(ln f1) - zeta2(ln f2)]`, the direct
/// product measurement, and (where the factor-level conditions hold) the
/// predicted product factor `rho1 + 2 zeta2(ln f2)`. All factors use the
/// `L g = rho g` convention. The verdict comes from the direct measurement.
pub fn classify_conformal_product(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let points = w.draw(plan, &[zeta])?;
    let lifted = zeta.lift();
    let tol = plan.tol;
    let mut report = ClassificationReport::new("conformal_product", tol);
    let mut t1 = Track::new("zeta1 conformal on M1", tol).informational();
    let mut t2 = Track::new("zeta2 conformal on M2", tol).informational();
    let mut compat = Track::new("rho1 - rho2 - 2[zeta1(ln f1) - zeta2(ln f2)]", tol).informational();
    let mut direct = Track::new("product L g - rho g", tol);
    let mut predicted = Track::new("rho - (rho1 + 2 zeta2(ln f2))", tol);
    let (mut r1s, mut r2s, mut rhos, mut preds) = (vec![], vec![], vec![], vec![]);
    let mut consistent = true;
    let mut sufficient_everywhere = true;
    for p in &points {
        let (f1, f2) = w.warpings_at(p)?;
        let e1 = conformal_factor_estimate(w.m1(), &zeta.part1, p)?;
        let e2 = conformal_factor_estimate(w.m2(), &zeta.part2, p)?;
        let l1 = zeta.part1.apply(w.f1()).eval(p)? / f1;
        let l2 = zeta.part2.apply(w.f2()).eval(p)? / f2;
        let c = e1.factor - e2.factor - 2.0 * (l1 - l2);
        let c_scale = e1.factor.abs() + e2.factor.abs() + 2.0 * (l1.abs() + l2.abs());
        t1.record(e1.residual, e1.scale, p);
        t2.record(e2.residual, e2.scale, p);
        compat.record(c.abs(), c_scale, p);
        let d = conformal_factor_estimate(w.chart(), &lifted, p)?;
        direct.record(d.residual, d.scale, p);
        let pred = e1.factor + 2.0 * l2;
        r1s.push(e1.factor);
        r2s.push(e2.factor);
        rhos.push(d.factor);
        preds.push(pred);
        let sufficient = geometry::within(e1.residual, e1.scale, tol)
            && geometry::within(e2.residual, e2.scale, tol)
            && geometry::within(c.abs(), c_scale, tol);
        if sufficient {
            let before = predicted.passed && direct.passed;
            predicted.record((d.factor - pred).abs(), d.factor.abs().max(pred.abs()), p);
            if before && !(predicted.passed && direct.passed) {
                consistent = false;
            }
        } else {
            sufficient_everywhere = false;
        }
    }
    report.samples = points.len();
    report.verdict = if predicted.passed {
        conformal_verdict(direct.passed, &rhos, tol)
    } else {
        Verdict::NotConformal
    };
    for (name, values) in [
        ("rho1", &r1s),
        ("rho2", &r2s),
        ("factor", &rhos),
        ("predicted_factor", &preds),
    ] {
        let (mean, spread) = mean_spread(values);
        report.derive(format!("{name}_mean"), mean);
        report.derive(format!("{name}_spread"), spread);
    }
    if !consistent {
        report.flag("factor-level conditions hold but the product is not conformal with the predicted factor");
    }
    if sufficient_everywhere {
        report.note("factor-level sufficient conditions hold at every sample");
    } else if direct.passed {
        report.note("product is conformal although the factor-level sufficient conditions fail somewhere");
    }
    report.derive("sufficient_conditions_hold", f64::from(u8::from(sufficient_everywhere)));
    for t in [t1, t2, compat, direct, predicted] {
        report.add_track(t);
    }
    Ok(report)
}

/// For a Killing split field, checks that each part is conformal on its
/// factor with the printed factor `rho_i = -2 zeta_j(ln f_j)`, and, as a
/// second track, with `rho_i = rho f_j^2 - 2 zeta_j(ln f_j)` where `rho` is
/// the measured product factor. Both are evaluated on product samples since
/// `rho_i` depends on the other factor's coordinates.
pub fn killing_projection(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let points = w.draw(plan, &[zeta])?;
    let lifted = zeta.lift();
    let tol = plan.tol;
    let mut report = ClassificationReport::new("killing_projection", tol);
    report.samples = points.len();
    let mut pre = Track::new("product L g", tol);
    let mut rhos = Vec::new();
    for p in &points {
        let l = lie_derivative_metric(w.chart(), &lifted, p)?;
        let g = metric_at(w.chart(), p)?;
        let scale = nabla(w.chart(), &lifted, p)?.amax() * g.amax();
        pre.record(l.amax(), scale, p);
        rhos.push(conformal_factor_estimate(w.chart(), &lifted, p)?.factor);
    }
    if !pre.passed {
        report.verdict = Verdict::PreconditionFailed;
        report.note("zeta is not Killing on the product");
        report.add_track(pre);
        return Ok(report);
    }
    let mut printed = [
        Track::new("L1 g1 + 2 zeta2(ln f2) g1", tol),
        Track::new("L2 g2 + 2 zeta1(ln f1) g2", tol),
    ];
    let mut variant = [
        Track::new("L1 g1 - (rho f2^2 - 2 zeta2(ln f2)) g1", tol).informational(),
        Track::new("L2 g2 - (rho f1^2 - 2 zeta1(ln f1)) g2", tol).informational(),
    ];
    let mut factors: [Vec<f64>; 2] = [vec![], vec![]];
    for (p, rho) in points.iter().zip(&rhos) {
        let (f1, f2) = w.warpings_at(p)?;
        for (k, which) in [Factor::First, Factor::Second].into_iter().enumerate() {
            let (chart, _) = w.factor(which);
            let other_f = w.factor(which.other()).1;
            let fj = if which == Factor::First { f2 } else { f1 };
            let lj = zeta.part(which.other()).apply(other_f).eval(p)? / fj;
            let li = lie_derivative_metric(chart, zeta.part(which), p)?;
            let gi = metric_at(chart, p)?;
            let demand = -2.0 * lj;
            let alt = rho * fj * fj - 2.0 * lj;
            let scale = li.amax().max(demand.abs() * gi.amax());
            printed[k].record((&li - &gi * demand).amax(), scale, p);
            variant[k].record((&li - &gi * alt).amax(), scale.max(alt.abs() * gi.amax()), p);
            factors[k].push(conformal_factor_estimate(chart, zeta.part(which), p)?.factor);
        }
    }
    report.verdict = if printed.iter().all(|t| t.passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    for (k, f) in factors.iter().enumerate() {
        let (mean, spread) = mean_spread(f);
        report.derive(format!("rho{}_mean", k + 1), mean);
        report.derive(format!("rho{}_spread", k + 1), spread);
    }
    let (mean, _) = mean_spread(&rhos);
    report.derive("product_factor_mean", mean);
    report.add_track(pre);
    let [p1, p2] = printed;
    let [v1, v2] = variant;
    for t in [p1, p2, v1, v2] {
        report.add_track(t);
    }
    Ok(report)
}

/// The two geodesic-equation components of a curve with velocity
/// `(zeta1, zeta2)` and coordinate acceleration `accel`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicResidual {
    pub first: DVector<f64>,
    pub second: DVector<f64>,
}

impl GeodesicResidual {
    pub fn max_abs(&self) -> f64 {
        self.first.amax().max(self.second.amax())
    }
}

/// * `D1_{zeta1} zeta1 + 2 zeta2(ln f2) zeta1 - (f1^2/f2^2) |zeta2|_2^2 grad1(ln f1)`
/// * `D2_{zeta2} zeta2 + 2 zeta1(ln f1) zeta2 - (f2^2/f1^2) |zeta1|_1^2 grad2(ln f2)`
///
/// `D_i` along the curve needs the curve's acceleration; norms use the
/// factor metrics.
pub fn geodesic_residual(
    w: &DoublyWarpedProduct,
    state: &CurveState,
    accel: &DVector<f64>,
) -> Result<GeodesicResidual> {
    if state.velocity.len() != w.dim() || accel.len() != w.dim() {
        return Err(Error::Dimension("velocity and acceleration must match the product".into()));
    }
    let p = &state.position;
    let (f1, f2) = w.warpings_at(p)?;
    let (v1, v2) = w.split(&state.velocity);
    let (a1, a2) = w.split(accel);
    let along = |chart: &Chart, v: &DVector<f64>, a: &DVector<f64>| -> Result<DVector<f64>> {
        let gamma = geometry::christoffel(chart, p)?;
        Ok(a + DVector::from_vec(gamma.contract(v.as_slice(), v.as_slice())))
    };
    let g1 = metric_at(w.m1(), p)?;
    let g2 = metric_at(w.m2(), p)?;
    let n1sq = (v1.transpose() * &g1 * &v1)[(0, 0)];
    let n2sq = (v2.transpose() * &g2 * &v2)[(0, 0)];
    let first = along(w.m1(), &v1, &a1)? + &v1 * (2.0 * w.log_derivative(Factor::Second, &v2, p)?)
        - gradient(w.m1(), w.f1(), p)? * (f1 / (f2 * f2) * n2sq);
    let second = along(w.m2(), &v2, &a2)? + &v2 * (2.0 * w.log_derivative(Factor::First, &v1, p)?)
        - gradient(w.m2(), w.f2(), p)? * (f2 / (f1 * f1) * n1sq);
    Ok(GeodesicResidual { first, second })
}

/// Accelerations of a sampled curve by central differences of velocity;
/// the result has one entry per interior state.
pub fn central_accelerations(path: &[CurveState], dt: f64) -> Vec<DVector<f64>> {
    path.windows(3)
        .map(|w| (&w[2].velocity - &w[0].velocity) / (2.0 * dt))
        .collect()
}

/// Integrates a geodesic of the product and reports the worst geodesic
/// residual over interior points.
pub fn geodesic_report(
    w: &DoublyWarpedProduct,
    start: &CurveState,
    dt: f64,
    steps: usize,
    tol: f64,
) -> Result<ClassificationReport> {
    let path = geometry::integrate_geodesic(w.chart(), start, dt, steps)?;
    curve_report(w, &path, &central_accelerations(&path, dt), tol)
}

/// Geodesic residuals along a given curve: `accels[k]` belongs to
/// `path[k + 1]`.
pub fn curve_report(
    w: &DoublyWarpedProduct,
    path: &[CurveState],
    accels: &[DVector<f64>],
    tol: f64,
) -> Result<ClassificationReport> {
    let mut report = ClassificationReport::new("geodesic", tol);
    let mut track = Track::new("geodesic residual", tol);
    let s0 = path.first().map(|s| s.speed_squared(w.chart())).transpose()?;
    let mut drift = Track::new("speed drift", tol).informational();
    for (state, a) in path.iter().skip(1).zip(accels) {
        let r = geodesic_residual(w, state, a)?;
        let scale = state.velocity.amax().powi(2).max(a.amax());
        track.record(r.max_abs(), scale, &state.position);
        if let Some(s0) = s0 {
            let s = state.speed_squared(w.chart())?;
            drift.record((s - s0).abs(), s0.abs(), &state.position);
        }
    }
    report.samples = accels.len();
    report.verdict = if track.passed {
        Verdict::Geodesic
    } else {
        Verdict::NotGeodesic
    };
    report.add_track(track);
    report.add_track(drift);
    Ok(report)
}

/// Checks the identity
/// `g(D_X zeta, zeta) = f2^2 g1(D1_{X1} zeta1, zeta1) + f1^2 g2(D2_{X2} zeta2, zeta2)
///  + f1 X1(f1) |zeta2|_2^2 + f2 X2(f2) |zeta1|_1^2`
/// and reports which sufficient conditions for constant length hold.
pub fn constant_length_report(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    x: &SplitVectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let points = w.draw(plan, &[zeta, x])?;
    let tol = plan.tol;
    let (zl, xl) = (zeta.lift(), x.lift());
    let mut identity = Track::new("identity", tol);
    let mut length = Track::new("g(D_X zeta, zeta)", tol).informational();
    let mut xf = Track::new("X_i(f_i)", tol).informational();
    let mut parallel = Track::new("D^i zeta_i", tol).informational();
    let mut factor_len = Track::new("g_i(D^i_{X_i} zeta_i, zeta_i)", tol).informational();
    for p in &points {
        let (f1, f2) = w.warpings_at(p)?;
        let g = metric_at(w.chart(), p)?;
        let z = zl.values_at(w.chart(), p)?;
        let dxz = covariant_derivative(w.chart(), &xl, &zl, p)?;
        let direct = (dxz.transpose() * &g * &z)[(0, 0)];

        let (z1, z2) = factor_values(w, zeta, p)?;
        let g1 = metric_at(w.m1(), p)?;
        let g2 = metric_at(w.m2(), p)?;
        let d1 = covariant_derivative(w.m1(), &x.part1, &zeta.part1, p)?;
        let d2 = covariant_derivative(w.m2(), &x.part2, &zeta.part2, p)?;
        let t1 = (d1.transpose() * &g1 * &z1)[(0, 0)];
        let t2 = (d2.transpose() * &g2 * &z2)[(0, 0)];
        let x1f1 = x.part1.apply(w.f1()).eval(p)?;
        let x2f2 = x.part2.apply(w.f2()).eval(p)?;
        let n1sq = (z1.transpose() * &g1 * &z1)[(0, 0)];
        let n2sq = (z2.transpose() * &g2 * &z2)[(0, 0)];
        let terms = [f2 * f2 * t1, f1 * f1 * t2, f1 * x1f1 * n2sq, f2 * x2f2 * n1sq];
        let rhs: f64 = terms.iter().sum();
        let scale = terms.iter().fold(direct.abs(), |m, t| m.max(t.abs()));
        identity.record((direct - rhs).abs(), scale, p);
        length.record(direct.abs(), scale, p);
        xf.record(x1f1.abs().max(x2f2.abs()), 0.0, p);
        let par = nabla(w.m1(), &zeta.part1, p)?
            .amax()
            .max(nabla(w.m2(), &zeta.part2, p)?.amax());
        parallel.record(par, 0.0, p);
        factor_len.record(t1.abs().max(t2.abs()), 0.0, p);
    }
    let mut report = ClassificationReport::new("constant_length", tol);
    report.samples = points.len();
    report.verdict = if identity.passed {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let cond1 = xf.passed && parallel.passed;
    let cond2 = xf.passed && factor_len.passed;
    report.derive("condition_parallel", f64::from(u8::from(cond1)));
    report.derive("condition_factor_length", f64::from(u8::from(cond2)));
    report.derive("constant_length", f64::from(u8::from(length.passed)));
    if (cond1 || cond2) && !length.passed {
        report.flag("a sufficient condition holds but g(D_X zeta, zeta) does not vanish");
    }
    for t in [identity, length, xf, parallel, factor_len] {
        report.add_track(t);
    }
    Ok(report)
}

/// Tolerance on `g(V, V) = 1` for unit tangents.
pub const UNIT_TOL: f64 = 1e-9;

/// `rho = 2[f2^2 g1(D1_{V1} zeta1, V1) + f1^2 g2(D2_{V2} zeta2, V2)
///  + f2 zeta2(f2) |V1|_1^2 + f1 zeta1(f1) |V2|_2^2]` for a unit tangent `v`
/// given in product coordinates.
pub fn conformal_factor_along_curve(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    v: &DVector<f64>,
    p: &Point,
) -> Result<f64> {
    zeta.check_on(w)?;
    if v.len() != w.dim() {
        return Err(Error::Dimension("tangent must have one entry per product coordinate".into()));
    }
    let norm = w.chart().inner(p, v, v)?;
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Precondition(format!("tangent is not unit: g(V, V) = {norm}")));
    }
    let (f1, f2) = w.warpings_at(p)?;
    let (v1, v2) = w.split(v);
    let g1 = metric_at(w.m1(), p)?;
    let g2 = metric_at(w.m2(), p)?;
    let d1 = covariant_derivative_along(w.m1(), &v1, &zeta.part1, p)?;
    let d2 = covariant_derivative_along(w.m2(), &v2, &zeta.part2, p)?;
    let q = |m: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * m * b)[(0, 0)];
    let z1f1 = zeta.part1.apply(w.f1()).eval(p)?;
    let z2f2 = zeta.part2.apply(w.f2()).eval(p)?;
    Ok(2.0
        * (f2 * f2 * q(&g1, &d1, &v1)
            + f1 * f1 * q(&g2, &d2, &v2)
            + f2 * z2f2 * q(&g1, &v1, &v1)
            + f1 * z1f1 * q(&g2, &v2, &v2)))
}

/// Along-curve factor against the trace estimate at every sample, for a
/// unit tangent obtained by normalizing `direction` (a split field) at each
/// point.
pub fn conformal_along_curve_report(
    w: &DoublyWarpedProduct,
    zeta: &SplitVectorField,
    direction: &SplitVectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    let points = w.draw(plan, &[zeta, direction])?;
    let tol = plan.tol;
    let lifted = zeta.lift();
    let dl = direction.lift();
    let mut conformal = Track::new("L g - rho g", tol).informational();
    let mut agree = Track::new("along-curve factor - trace factor", tol);
    let mut values = Vec::new();
    for p in &points {
        let v = dl.values_at(w.chart(), p)?;
        let nsq = w.chart().inner(p, &v, &v)?;
        if !(nsq > 0.0) {
            return Err(Error::Precondition("direction field is not spacelike".into()));
        }
        let v = v / nsq.sqrt();
        let rho = conformal_factor_along_curve(w, zeta, &v, p)?;
        let est = conformal_factor_estimate(w.chart(), &lifted, p)?;
        conformal.record(est.residual, est.scale, p);
        if geometry::within(est.residual, est.scale, tol) {
            agree.record((rho - est.factor).abs(), rho.abs().max(est.factor.abs()), p);
        }
        values.push(rho);
    }
    let mut report = ClassificationReport::new("conformal_along_curve", tol);
    report.samples = points.len();
    report.verdict = if agree.passed {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let (mean, spread) = mean_spread(&values);
    report.derive("factor_mean", mean);
    report.derive("factor_spread", spread);
    if agree.residuals.is_empty() {
        report.note("zeta is not conformal at any sample; nothing to compare");
    }
    report.add_track(agree);
    report.add_track(conformal);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn line(c: &str) -> Chart {
        Chart::euclidean(c, &[c])
    }

    fn hyperbolic() -> DoublyWarpedProduct {
        DoublyWarpedProduct::singly(line("t"), line("x"), parse("exp(t)").unwrap()).unwrap()
    }

    fn field(pairs: &[(&str, &str)]) -> VectorField {
        VectorField::parse(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn assembly() {
        let w = hyperbolic();
        let c = w.chart();
        assert_eq!(c.coords(), ["t", "x"]);
        let p = Point::new().with("t", 0.5).with("x", 0.0);
        let g = metric_at(c, &p).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert!((g[(1, 1)] - 1f64.exp()).abs() < 1e-15);
        let w = DoublyWarpedProduct::new(line("a"), line("b"), parse("2").unwrap(), parse("3").unwrap())
            .unwrap();
        let g = metric_at(w.chart(), &Point::new().with("a", 0.0).with("b", 0.0)).unwrap();
        assert_eq!((g[(0, 0)], g[(1, 1)]), (9.0, 4.0));
        assert_eq!(
            DoublyWarpedProduct::singly(line("t"), line("t"), ScalarExpr::one()).unwrap_err(),
            Error::CoordinateCollision("t".into())
        );
        assert!(DoublyWarpedProduct::singly(line("t"), line("x"), parse("x").unwrap()).is_err());
    }

    #[test]
    fn hyperbolic_connection() {
        let w = hyperbolic();
        let p = Point::new().with("t", 0.0).with("x", 1.0);
        let dt = SplitVectorField::coordinate(&w, 0);
        let dx = SplitVectorField::coordinate(&w, 1);
        let v = connection_closed_form(&w, &dx, &dx, &p).unwrap();
        assert_eq!((v[0], v[1]), (-1.0, 0.0));
        let v = connection_closed_form(&w, &dt, &dx, &p).unwrap();
        assert_eq!((v[0], v[1]), (0.0, 1.0));
    }

    #[test]
    fn diamonds() {
        let w = hyperbolic();
        let p = Point::new().with("t", 0.0).with("x", 0.0);
        assert!((f_diamond(&w, Factor::First, &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(f_diamond(&w, Factor::Second, &p).unwrap(), 0.0);
        // x^2 + y^2 on flat R^2 with a 3-dimensional partner: f Δf + 2 |grad f|^2.
        let plane = Chart::euclidean("p", &["x", "y"]);
        let f = parse("x^2+y^2").unwrap();
        let q = Point::new().with("x", 1.0).with("y", 0.0);
        assert!((diamond(&plane, &f, 3, &q).unwrap() - 12.0).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_ricci_and_lie() {
        let w = hyperbolic();
        let p = Point::new().with("t", 0.0).with("x", 0.3);
        let r = ricci_closed_form(&w, &p).unwrap();
        assert!((r + metric_at(w.chart(), &p).unwrap()).amax() < 1e-14);
        let zeta = SplitVectorField::new(field(&[("t", "1")]), VectorField::zero());
        let dx = SplitVectorField::coordinate(&w, 1);
        assert!((lie_split(&w, &zeta, &dx, &dx, &p).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn along_curve_needs_unit_tangent() {
        let w = DoublyWarpedProduct::singly(line("u"), line("v"), ScalarExpr::one()).unwrap();
        let zeta = SplitVectorField::new(field(&[("u", "u")]), field(&[("v", "v")]));
        let p = Point::new().with("u", 0.4).with("v", -0.2);
        let s = 0.5f64.sqrt();
        let v = DVector::from_vec(vec![s, s]);
        assert!((conformal_factor_along_curve(&w, &zeta, &v, &p).unwrap() - 2.0).abs() < 1e-14);
        let bad = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            conformal_factor_along_curve(&w, &zeta, &bad, &p),
            Err(Error::Precondition(_))
        ));
    }
}
