use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{Check, CheckKind, FieldValue, Scenario};
use crate::error::{Error, Result};
use crate::expr::Point;
use crate::geometry::{CurveState, SamplePlan};
use crate::report::{ClassificationReport, SolitonCertificate, Track, Verdict};
use crate::soliton::{self, SolitonCase};
use crate::spacetime::{self, DoublyWarpedSpacetime, SpacetimeField};
use crate::warped::{self, DoublyWarpedProduct, SplitVectorField};

/// Command-line overrides. `None` keeps the scenario's value.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub name: String,
    pub gating: bool,
    pub passed: bool,
    pub worst: Option<f64>,
}

/// One row of the concurrent-family table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyOutcome {
    pub case: usize,
    pub h: String,
    pub k: String,
    pub sigma: String,
    pub f: String,
    pub field: String,
    pub instances: usize,
    pub passed: usize,
    pub worst_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub kind: String,
    pub target: Option<String>,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    /// `None` when the check raised an error.
    pub verdict: Option<Verdict>,
    pub expected: Option<Verdict>,
    /// `None` when no verdict was expected.
    pub matches: Option<bool>,
    pub worst_residual: Option<f64>,
    pub witness: Option<Point>,
    pub derived: BTreeMap<String, f64>,
    pub tracks: Vec<TrackSummary>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<FamilyOutcome>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub matched: usize,
    pub mismatched: usize,
    pub unchecked: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub engine_version: String,
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub summary: Summary,
}

impl RunReport {
    /// 0 when every check with an expected verdict matched it, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.mismatched > 0)
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn summarize(tracks: &[Track]) -> Vec<TrackSummary> {
    tracks
        .iter()
        .map(|t| TrackSummary {
            name: t.name.clone(),
            gating: t.gating,
            passed: t.passed,
            worst: finite(t.worst),
        })
        .collect()
}

struct Body {
    verdict: Verdict,
    worst: f64,
    witness: Option<Point>,
    derived: BTreeMap<String, f64>,
    tracks: Vec<Track>,
    flags: Vec<String>,
    notes: Vec<String>,
    families: Vec<FamilyOutcome>,
}

impl From<ClassificationReport> for Body {
    fn from(r: ClassificationReport) -> Body {
        Body {
            verdict: r.verdict,
            worst: r.worst_residual,
            witness: r.witness,
            derived: r.derived,
            tracks: r.tracks,
            flags: r.flags,
            notes: r.notes,
            families: Vec::new(),
        }
    }
}

impl From<SolitonCertificate> for Body {
    fn from(c: SolitonCertificate) -> Body {
        Body {
            verdict: c.verdict,
            worst: c.worst_residual,
            witness: c.witness,
            derived: c.derived,
            tracks: c.tracks,
            flags: c.flags,
            notes: c.notes,
            families: Vec::new(),
        }
    }
}

/// Runs every check in declaration order. Numeric problems inside a check
/// are reported on that check and never abort the run.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> RunReport {
    let mut summary = Summary::default();
    let mut checks = Vec::with_capacity(scenario.checks.len());
    for check in &scenario.checks {
        let seed = opts.seed.or(check.seed).unwrap_or(scenario.seed);
        let tol = opts
            .tol
            .or(check.tol)
            .or(scenario.tol)
            .unwrap_or(SamplePlan::DEFAULT_TOL);
        let samples = opts.samples.or(check.samples).unwrap_or(scenario.samples);
        let result = run_check(scenario, check, seed, tol, samples);
        let mut out = CheckOutcome {
            id: check.id.clone(),
            kind: check.kind.name().to_string(),
            target: check.target.clone(),
            seed,
            tol,
            samples,
            verdict: None,
            expected: check.expect,
            matches: None,
            worst_residual: None,
            witness: None,
            derived: BTreeMap::new(),
            tracks: Vec::new(),
            flags: Vec::new(),
            notes: Vec::new(),
            families: Vec::new(),
            error: None,
        };
        match result {
            Ok(body) => {
                out.verdict = Some(body.verdict);
                out.worst_residual = finite(body.worst);
                out.witness = body.witness;
                out.derived = body
                    .derived
                    .into_iter()
                    .filter(|(_, v)| v.is_finite())
                    .collect();
                out.tracks = summarize(&body.tracks);
                out.flags = body.flags;
                out.notes = body.notes;
                out.families = body.families;
            }
            Err(e) => {
                summary.errors += 1;
                out.error = Some(e.to_string());
            }
        }
        out.matches = check
            .expect
            .map(|e| out.verdict.is_some_and(|v| v.satisfies(e)));
        match out.matches {
            Some(true) => summary.matched += 1,
            Some(false) => summary.mismatched += 1,
            None => summary.unchecked += 1,
        }
        checks.push(out);
    }
    summary.total = checks.len();
    RunReport {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: scenario.name.clone(),
        seed: opts.seed.unwrap_or(scenario.seed),
        checks,
        summary,
    }
}

fn product<'a>(s: &'a Scenario, c: &Check) -> Result<(&'a DoublyWarpedProduct, &'a super::Bounds)> {
    let id = c.target.as_deref().unwrap_or_default();
    s.products
        .get(id)
        .map(|p| (&p.product, &p.bounds))
        .ok_or_else(|| Error::Invalid(format!("unknown product `{id}`")))
}

fn spacetime<'a>(s: &'a Scenario, c: &Check) -> Result<(&'a DoublyWarpedSpacetime, &'a super::Bounds)> {
    let id = c.target.as_deref().unwrap_or_default();
    s.spacetimes
        .get(id)
        .map(|p| (&p.spacetime, &p.bounds))
        .ok_or_else(|| Error::Invalid(format!("unknown space-time `{id}`")))
}

fn split<'a>(s: &'a Scenario, id: &str) -> Result<&'a SplitVectorField> {
    match s.fields.get(id).map(|f| &f.value) {
        Some(FieldValue::Split(f)) => Ok(f),
        _ => Err(Error::Invalid(format!("`{id}` is not a product field"))),
    }
}

fn st_field<'a>(s: &'a Scenario, id: &str) -> Result<&'a SpacetimeField> {
    match s.fields.get(id).map(|f| &f.value) {
        Some(FieldValue::Spacetime(f)) => Ok(f),
        _ => Err(Error::Invalid(format!("`{id}` is not a space-time field"))),
    }
}

fn plan(defaults: &super::Bounds, c: &Check, samples: usize, seed: u64, tol: f64) -> SamplePlan {
    let mut bounds = defaults.clone();
    bounds.extend(c.bounds.iter().map(|(k, v)| (k.clone(), *v)));
    SamplePlan::new(bounds, samples, seed).with_tol(tol)
}

fn param(c: &Check, name: &str, default: f64) -> f64 {
    c.params.get(name).copied().unwrap_or(default)
}

fn steps(c: &Check) -> Result<usize> {
    let s = param(c, "steps", 1000.0);
    if !(s >= 1.0 && s.fract() == 0.0 && s <= 1e7) {
        return Err(Error::Invalid(format!("steps must be a positive integer, got {s}")));
    }
    Ok(s as usize)
}

fn run_check(s: &Scenario, c: &Check, seed: u64, tol: f64, samples: usize) -> Result<Body> {
    use CheckKind as K;
    let body = match c.kind {
        K::ConnectionClosedForm
        | K::RicciClosedForm
        | K::LieSplit
        | K::ClassifyConformalProduct
        | K::KillingProjection
        | K::ConstantLength
        | K::ConformalAlongCurve => {
            let (w, defaults) = product(s, c)?;
            let plan = plan(defaults, c, samples, seed, tol);
            let fields = c.fields.iter().map(|id| split(s, id)).collect::<Result<Vec<_>>>()?;
            match c.kind {
                K::ConnectionClosedForm => {
                    let extra: Vec<SplitVectorField> = fields.into_iter().cloned().collect();
                    warped::connection_report(w, &extra, &plan)?
                }
                K::RicciClosedForm => warped::ricci_report(w, &plan)?,
                K::LieSplit => warped::lie_split_report(w, fields[0], &plan)?,
                K::ClassifyConformalProduct => warped::classify_conformal_product(w, fields[0], &plan)?,
                K::KillingProjection => warped::killing_projection(w, fields[0], &plan)?,
                K::ConstantLength => warped::constant_length_report(w, fields[0], fields[1], &plan)?,
                _ => warped::conformal_along_curve_report(w, fields[0], fields[1], &plan)?,
            }
            .into()
        }
        K::Geodesic => {
            let (w, _) = product(s, c)?;
            let coords = w.chart().coords();
            let position = Point::from_pairs(coords.iter().map(|k| (k.clone(), c.start[k])));
            let velocity = coords.iter().map(|k| c.velocity[k]).collect();
            let start = CurveState::new(position, velocity);
            warped::geodesic_report(w, &start, param(c, "dt", 1e-3), steps(c)?, tol)?.into()
        }
        K::Curve => {
            let (w, _) = product(s, c)?;
            let dt = param(c, "dt", 1e-3);
            let n = steps(c)?;
            let coords = w.chart().coords();
            let pos: Vec<_> = coords.iter().map(|k| c.curve[k].clone()).collect();
            let vel: Vec<_> = pos.iter().map(|e| e.diff("s")).collect();
            let acc: Vec<_> = vel.iter().map(|e| e.diff("s")).collect();
            let mut path = Vec::with_capacity(n + 1);
            let mut accels = Vec::with_capacity(n);
            for k in 0..=n {
                let at = Point::new().with("s", k as f64 * dt);
                let x = pos.iter().map(|e| e.eval(&at)).collect::<std::result::Result<Vec<_>, _>>()?;
                let v = vel.iter().map(|e| e.eval(&at)).collect::<std::result::Result<Vec<_>, _>>()?;
                path.push(CurveState::new(
                    Point::from_pairs(coords.iter().cloned().zip(x)),
                    v,
                ));
                if k > 0 {
                    let a = acc.iter().map(|e| e.eval(&at)).collect::<std::result::Result<Vec<_>, _>>()?;
                    accels.push(DVector::from_vec(a));
                }
            }
            warped::curve_report(w, &path, &accels, tol)?.into()
        }
        K::SolveConcurrent2d => {
            let solution = spacetime::solve_concurrent_2d();
            let instances = param(c, "instances", 5.0);
            if !(instances >= 1.0 && instances.fract() == 0.0 && instances <= 1e4) {
                return Err(Error::Invalid("instances must be a positive integer".into()));
            }
            let plan = plan(&BTreeMap::new(), c, samples, seed, tol);
            let certs = spacetime::certify_families(&solution, instances as usize, &plan)?;
            let mut report = ClassificationReport::new("solve_concurrent_2d", tol);
            let all = certs.len() == 3 && certs.iter().all(|k| k.passed == k.instances);
            report.verdict = if all {
                Verdict::Concurrent
            } else {
                Verdict::NotConcurrent
            };
            report.samples = samples;
            let worst = certs.iter().map(|k| k.worst_residual).fold(0.0, f64::max);
            report.worst_residual = worst;
            report.derive("families", certs.len() as f64);
            report.derive("instances", instances);
            report.derive(
                "factor_deviation",
                certs.iter().map(|k| k.factor_deviation).fold(0.0, f64::max),
            );
            for r in &solution.rejected {
                report.note(format!("rejected {}: {}", r.branch, r.reason));
            }
            let mut body: Body = report.into();
            body.families = certs
                .into_iter()
                .map(|k| FamilyOutcome {
                    case: k.family.case,
                    h: k.family.h,
                    k: k.family.k,
                    sigma: k.family.sigma,
                    f: k.family.f,
                    field: k.family.field,
                    instances: k.instances,
                    passed: k.passed,
                    worst_residual: finite(k.worst_residual),
                })
                .collect();
            body
        }
        _ => {
            let (st, defaults) = spacetime(s, c)?;
            let plan = plan(defaults, c, samples, seed, tol);
            let fields = c.fields.iter().map(|id| st_field(s, id)).collect::<Result<Vec<_>>>()?;
            let zeta = fields[0];
            let case = |lambda: f64| SolitonCase::new(st.clone(), zeta.clone(), lambda);
            match c.kind {
                K::LieSpacetime => spacetime::lie_spacetime_report(st, zeta, &plan)?.into(),
                K::TimelikeConformal => {
                    if !zeta.spatial.is_zero() {
                        return Err(Error::Invalid("timelike_conformal needs a field with no spatial part".into()));
                    }
                    spacetime::timelike_conformal_check(st, &zeta.h, &plan)?.into()
                }
                K::KillingDecomposition => spacetime::killing_decomposition_check(st, zeta, &plan)?.into(),
                K::ConformalAlongCurveSt => spacetime::conformal_along_curve_st_report(
                    st,
                    zeta,
                    fields[1],
                    param(c, "normalization", 1.0),
                    &plan,
                )?
                .into(),
                K::ConcurrentCheckSt => spacetime::concurrent_check_st(st, zeta, &plan)?.into(),
                K::Soliton => soliton::soliton_check(&case(param(c, "lambda", 0.0))?, &plan)?.into(),
                K::Th2 => soliton::th2_checks(&case(param(c, "lambda", 0.0))?, &plan)?.into(),
                K::HomotheticLambda => soliton::homothetic_lambda_report(
                    &case(param(c, "lambda", 0.0))?,
                    param(c, "c", 0.0),
                    &plan,
                )?
                .into(),
                K::EinsteinFactor => soliton::einstein_factor_check(
                    &case(param(c, "lambda", 0.0))?,
                    param(c, "rho", 0.0),
                    &plan,
                )?
                .into(),
                K::EinsteinConformalSoliton => soliton::einstein_conformal_soliton(
                    &case(0.0)?,
                    param(c, "mu", 0.0),
                    param(c, "rho", 0.0),
                    &plan,
                )?
                .into(),
                K::ProductSolitonLift => {
                    soliton::product_soliton_lift(&case(param(c, "lambda", 0.0))?, &plan)?.into()
                }
                _ => unreachable!("product and target-free kinds are handled above"),
            }
        }
    };
    Ok(body)
}
