use nalgebra::DMatrix;

use super::calculus::{lie_derivative_metric, nabla};
use super::tensor::{inverse_metric_at, metric_at};
use super::{Chart, SamplePlan, VectorField};
use crate::error::Result;
use crate::expr::Point;
use crate::report::{within, ClassificationReport, Track, Verdict};

/// Trace estimate of a conformal factor at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalEstimate {
    /// `rho = tr(g^-1 L_zeta g) / n`, so that `L_zeta g = rho g` when conformal.
    pub factor: f64,
    /// Max-norm of `L_zeta g - rho g`.
    pub residual: f64,
    /// Largest magnitude entering the residual.
    pub scale: f64,
}

pub fn conformal_factor_estimate(
    chart: &Chart,
    zeta: &VectorField,
    p: &Point,
) -> Result<ConformalEstimate> {
    let g = metric_at(chart, p)?;
    let ginv = inverse_metric_at(chart, p)?;
    let l = lie_derivative_metric(chart, zeta, p)?;
    let factor = ginv.component_mul(&l.transpose()).sum() / chart.dim() as f64;
    let residual = (&l - &g * factor).amax();
    let scale = l.amax().max(factor.abs() * g.amax());
    Ok(ConformalEstimate {
        factor,
        residual,
        scale,
    })
}

/// Folds per-sample factors into a verdict. `conformal` says whether every
/// sample had `L g - rho g` within tolerance.
pub fn conformal_verdict(conformal: bool, factors: &[f64], tol: f64) -> Verdict {
    if !conformal {
        return Verdict::NotConformal;
    }
    if factors.iter().all(|f| within(f.abs(), 0.0, tol)) {
        return Verdict::Killing;
    }
    let (mean, spread) = mean_spread(factors);
    if within(spread, mean, tol) {
        Verdict::Homothetic
    } else {
        Verdict::Conformal
    }
}

/// Mean and half-range of the values.
pub(crate) fn mean_spread(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (mean, 0.5 * (hi - lo))
}

/// Accepts sample points where the metric is invertible and the given
/// fields evaluate.
pub(crate) fn accept_on(chart: &Chart, fields: &[&VectorField], p: &Point) -> Result<bool> {
    inverse_metric_at(chart, p)?;
    for f in fields {
        f.values_at(chart, p)?;
    }
    Ok(true)
}

/// `g(D_X zeta, X) = 0` for the frame and random probes at every sample.
pub fn killing_check(
    chart: &Chart,
    zeta: &VectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    zeta.check_on(chart)?;
    plan.require(chart.coords())?;
    let points = plan.draw(|p| accept_on(chart, &[zeta], p))?;
    let probes = plan.probes(chart.dim());
    let mut report = ClassificationReport::new("killing", plan.tol);
    let mut track = Track::new("g(D_X zeta, X)", plan.tol);
    for p in &points {
        let g = metric_at(chart, p)?;
        let m = nabla(chart, zeta, p)?;
        let gm = &g * &m;
        let abs: DMatrix<f64> = g.abs() * m.abs();
        track.begin_sample();
        for x in &probes {
            let r = (x.transpose() * &gm * x)[(0, 0)].abs();
            let s = (x.abs().transpose() * &abs * x.abs())[(0, 0)];
            track.push(r, s, p);
        }
    }
    report.samples = points.len();
    report.verdict = if track.passed {
        Verdict::Killing
    } else {
        Verdict::NotKilling
    };
    report.add_track(track);
    Ok(report)
}

/// Direct conformal classification from `L_zeta g` at every sample.
pub fn conformal_check(
    chart: &Chart,
    zeta: &VectorField,
    plan: &SamplePlan,
) -> Result<ClassificationReport> {
    zeta.check_on(chart)?;
    plan.require(chart.coords())?;
    let points = plan.draw(|p| accept_on(chart, &[zeta], p))?;
    conformal_check_at(chart, zeta, &points, plan.tol)
}

pub(crate) fn conformal_check_at(
    chart: &Chart,
    zeta: &VectorField,
    points: &[Point],
    tol: f64,
) -> Result<ClassificationReport> {
    let mut report = ClassificationReport::new("conformal", tol);
    let mut track = Track::new("L g - rho g", tol);
    let mut factors = Vec::with_capacity(points.len());
    for p in points {
        let est = conformal_factor_estimate(chart, zeta, p)?;
        track.record(est.residual, est.scale, p);
        factors.push(est.factor);
    }
    let (mean, spread) = mean_spread(&factors);
    report.samples = points.len();
    report.verdict = conformal_verdict(track.passed, &factors, tol);
    report.derive("factor_mean", mean);
    report.derive("factor_spread", spread);
    report.add_track(track);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(pairs: &[(&str, &str)]) -> VectorField {
        VectorField::parse(pairs.iter().copied()).unwrap()
    }

    fn plane_plan() -> SamplePlan {
        SamplePlan::new([("x", (-2.0, 2.0)), ("y", (-2.0, 2.0))], 10, 3)
    }

    #[test]
    fn killing_examples() {
        let plane = Chart::euclidean("r2", &["x", "y"]);
        let rot = killing_check(&plane, &field(&[("x", "-y"), ("y", "x")]), &plane_plan()).unwrap();
        assert_eq!(rot.verdict, Verdict::Killing);
        assert!(rot.worst_residual < 1e-10);
        let zero = killing_check(&plane, &VectorField::zero(), &plane_plan()).unwrap();
        assert_eq!(zero.verdict, Verdict::Killing);

        let line = Chart::euclidean("r", &["x"]);
        let plan = SamplePlan::new([("x", (-1.0, 1.0))], 5, 0);
        let dil = killing_check(&line, &field(&[("x", "x")]), &plan).unwrap();
        assert_eq!(dil.verdict, Verdict::NotKilling);
        // Probe d/dx gives exactly 1.
        assert!(dil.worst_residual >= 1.0);
    }

    #[test]
    fn factor_estimates() {
        let line = Chart::euclidean("r", &["x"]);
        let p = Point::new().with("x", 0.25);
        let e = conformal_factor_estimate(&line, &field(&[("x", "x")]), &p).unwrap();
        assert_eq!((e.factor, e.residual), (2.0, 0.0));

        let plane = Chart::euclidean("r2", &["x", "y"]);
        let q = Point::new().with("x", 0.5).with("y", 0.1);
        let e = conformal_factor_estimate(&plane, &field(&[("x", "-y"), ("y", "x")]), &q).unwrap();
        assert_eq!(e.factor, 0.0);
        let e = conformal_factor_estimate(&plane, &field(&[("x", "x")]), &q).unwrap();
        assert_eq!((e.factor, e.residual), (1.0, 1.0));
    }

    #[test]
    fn verdict_chain() {
        assert_eq!(conformal_verdict(false, &[2.0], 1e-8), Verdict::NotConformal);
        assert_eq!(conformal_verdict(true, &[0.0, 1e-12], 1e-8), Verdict::Killing);
        assert_eq!(conformal_verdict(true, &[2.0, 2.0], 1e-8), Verdict::Homothetic);
        assert_eq!(conformal_verdict(true, &[1.0, 2.0], 1e-8), Verdict::Conformal);
        let plane = Chart::euclidean("r2", &["x", "y"]);
        let conc = conformal_check(&plane, &field(&[("x", "x"), ("y", "y")]), &plane_plan()).unwrap();
        assert_eq!(conc.verdict, Verdict::Homothetic);
        assert_eq!(conc.derived["factor_mean"], 2.0);
    }
}
