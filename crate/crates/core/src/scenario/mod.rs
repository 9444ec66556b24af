//! TOML scenario files: charts, warped products, space-times, vector fields
//! and a list of checks to run against them.
//!
//! ```toml
//! name = "hyperbolic"
//! seed = 7
//!
//! [constants]
//! k = 1.0
//!
//! [[charts]]
//! id = "I"
//! coords = ["t"]
//! diagonal = ["1"]
//!
//! [[charts]]
//! id = "R"
//! coords = ["x"]
//! diagonal = ["1"]
//!
//! [[products]]
//! id = "H"
//! m1 = "I"
//! m2 = "R"
//! f1 = "exp(k*t)"
//! box = { t = [-1.0, 1.0], x = [-1.0, 1.0] }
//!
//! [[checks]]
//! id = "ricci"
//! kind = "ricci_closed_form"
//! target = "H"
//! expect = "pass"
//! ```
//!
//! Constants are substituted into every expression before anything else
//! happens. See [`CheckKind`] for the check kinds and their arguments.

mod emit;
mod kinds;
mod run;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse, ScalarExpr};
use crate::geometry::{Chart, VectorField};
use crate::report::Verdict;
use crate::spacetime::{DoublyWarpedSpacetime, SpacetimeField, DEFAULT_TIME};
use crate::warped::{DoublyWarpedProduct, SplitVectorField};

pub use emit::{emit, Format};
pub use kinds::{CheckKind, TargetKind};
pub use run::{run, CheckOutcome, FamilyOutcome, RunOptions, RunReport, Summary, TrackSummary};

/// Problems that make a scenario unusable. They map to exit status 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Syntax(String),
    #[error("{at}: {message}")]
    Expression { at: String, message: String },
    #[error("{at}: unknown {what} `{id}`")]
    Unresolved { at: String, what: &'static str, id: String },
    #[error("{at}: dimension mismatch: {message}")]
    Dimension { at: String, message: String },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
}

type Bounds = BTreeMap<String, (f64, f64)>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    name: Option<String>,
    seed: Option<u64>,
    samples: Option<usize>,
    tol: Option<f64>,
    #[serde(default)]
    constants: BTreeMap<String, f64>,
    #[serde(default)]
    charts: Vec<ChartDecl>,
    #[serde(default)]
    products: Vec<ProductDecl>,
    #[serde(default)]
    spacetimes: Vec<SpacetimeDecl>,
    #[serde(default)]
    fields: Vec<FieldDecl>,
    #[serde(default)]
    checks: Vec<CheckDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDecl {
    id: String,
    coords: Vec<String>,
    diagonal: Option<Vec<String>>,
    rows: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductDecl {
    id: String,
    m1: String,
    m2: String,
    f1: String,
    #[serde(default = "one")]
    f2: String,
    #[serde(default, rename = "box")]
    bounds: Bounds,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpacetimeDecl {
    id: String,
    base: String,
    f: String,
    sigma: String,
    time: Option<String>,
    interval: (f64, f64),
    #[serde(default, rename = "box")]
    bounds: Bounds,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDecl {
    id: String,
    on: String,
    components: Option<BTreeMap<String, String>>,
    part1: Option<BTreeMap<String, String>>,
    part2: Option<BTreeMap<String, String>>,
    h: Option<String>,
    spatial: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckDecl {
    id: String,
    kind: String,
    target: Option<String>,
    field: Option<String>,
    #[serde(default)]
    fields: Vec<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    #[serde(default)]
    start: BTreeMap<String, f64>,
    #[serde(default)]
    velocity: BTreeMap<String, f64>,
    #[serde(default)]
    curve: BTreeMap<String, String>,
    #[serde(default, rename = "box")]
    bounds: Bounds,
    samples: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    expect: Option<String>,
}

fn one() -> String {
    "1".into()
}

/// A vector field and the id of the chart, product or space-time it lives on.
#[derive(Clone, Debug)]
pub struct FieldDef {
    pub on: String,
    pub value: FieldValue,
}

#[derive(Clone, Debug)]
pub enum FieldValue {
    Chart(VectorField),
    Split(SplitVectorField),
    Spacetime(SpacetimeField),
}

#[derive(Clone, Debug)]
pub struct Product {
    pub product: DoublyWarpedProduct,
    pub bounds: Bounds,
}

#[derive(Clone, Debug)]
pub struct Spacetime {
    pub spacetime: DoublyWarpedSpacetime,
    pub bounds: Bounds,
}

/// A resolved check ready to run.
#[derive(Clone, Debug)]
pub struct Check {
    pub id: String,
    pub kind: CheckKind,
    pub target: Option<String>,
    pub fields: Vec<String>,
    pub params: BTreeMap<String, f64>,
    pub start: BTreeMap<String, f64>,
    pub velocity: BTreeMap<String, f64>,
    pub curve: BTreeMap<String, ScalarExpr>,
    pub bounds: Bounds,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub expect: Option<Verdict>,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub constants: BTreeMap<String, f64>,
    pub charts: BTreeMap<String, Chart>,
    pub products: BTreeMap<String, Product>,
    pub spacetimes: BTreeMap<String, Spacetime>,
    pub fields: BTreeMap<String, FieldDef>,
    pub checks: Vec<Check>,
}

pub const DEFAULT_SAMPLES: usize = 20;

/// Reads and validates a scenario file. The scenario name defaults to the
/// file stem.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    Scenario::from_toml(&text, stem)
}

impl Scenario {
    pub fn from_toml(text: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
        let file: File = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        Resolver::new(file.constants.clone()).resolve(file, default_name)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

struct Resolver {
    constants: BTreeMap<String, f64>,
}

fn invalid(at: &str, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid {
        at: at.to_string(),
        message: message.to_string(),
    }
}

fn unresolved(at: &str, what: &'static str, id: &str) -> ScenarioError {
    ScenarioError::Unresolved {
        at: at.to_string(),
        what,
        id: id.to_string(),
    }
}

fn unique<'a>(section: &str, ids: impl IntoIterator<Item = &'a String>) -> Result<(), ScenarioError> {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(invalid(&format!("{section}.{id}"), "duplicate id"));
        }
    }
    Ok(())
}

fn check_bounds(at: &str, bounds: &Bounds) -> Result<(), ScenarioError> {
    for (c, (lo, hi)) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(invalid(at, format!("box for `{c}` is not an interval")));
        }
    }
    Ok(())
}

/// Maps a library error to the scenario error it corresponds to.
fn lift(at: &str, e: crate::Error) -> ScenarioError {
    match e {
        crate::Error::Dimension(m) => ScenarioError::Dimension {
            at: at.to_string(),
            message: m,
        },
        crate::Error::UnknownCoordinate(c) => unresolved(at, "coordinate", &c),
        other => invalid(at, other),
    }
}

impl Resolver {
    fn new(constants: BTreeMap<String, f64>) -> Resolver {
        Resolver { constants }
    }

    fn expr(&self, at: &str, text: &str) -> Result<ScalarExpr, ScenarioError> {
        let e = parse(text).map_err(|e| ScenarioError::Expression {
            at: at.to_string(),
            message: e.to_string(),
        })?;
        Ok(e.bind_constants(&self.constants))
    }

    fn vector(
        &self,
        at: &str,
        comps: &BTreeMap<String, String>,
        chart: &Chart,
    ) -> Result<VectorField, ScenarioError> {
        let mut out = Vec::new();
        for (c, text) in comps {
            if chart.index_of(c).is_none() {
                return Err(unresolved(at, "coordinate", c));
            }
            out.push((c.clone(), self.expr(&format!("{at}.{c}"), text)?));
        }
        let field = VectorField::new(out);
        field.check_on(chart).map_err(|e| lift(at, e))?;
        Ok(field)
    }

    fn resolve(&self, file: File, default_name: &str) -> Result<Scenario, ScenarioError> {
        for (name, v) in &self.constants {
            if !v.is_finite() {
                return Err(invalid(&format!("constants.{name}"), "must be finite"));
            }
        }
        unique("charts", file.charts.iter().map(|c| &c.id))?;
        unique("products", file.products.iter().map(|c| &c.id))?;
        unique("spacetimes", file.spacetimes.iter().map(|c| &c.id))?;
        unique("fields", file.fields.iter().map(|c| &c.id))?;
        unique("checks", file.checks.iter().map(|c| &c.id))?;

        let mut charts = BTreeMap::new();
        for d in &file.charts {
            let at = format!("charts.{}", d.id);
            if let Some(c) = d.coords.iter().find(|c| self.constants.contains_key(*c)) {
                return Err(invalid(&at, format!("coordinate `{c}` shadows a constant")));
            }
            let n = d.coords.len();
            let chart = match (&d.diagonal, &d.rows) {
                (Some(diag), None) => {
                    if diag.len() != n {
                        return Err(ScenarioError::Dimension {
                            at,
                            message: format!("{} diagonal entries for {n} coordinates", diag.len()),
                        });
                    }
                    let diag = diag
                        .iter()
                        .enumerate()
                        .map(|(i, t)| self.expr(&format!("{at}.diagonal[{i}]"), t))
                        .collect::<Result<Vec<_>, _>>()?;
                    Chart::diagonal(d.id.clone(), d.coords.clone(), diag)
                }
                (None, Some(rows)) => {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(ScenarioError::Dimension {
                            at,
                            message: format!("metric rows must be {n}x{n}"),
                        });
                    }
                    let mut parsed = Vec::new();
                    for (i, row) in rows.iter().enumerate() {
                        parsed.push(
                            row.iter()
                                .enumerate()
                                .map(|(j, t)| self.expr(&format!("{at}.rows[{i}][{j}]"), t))
                                .collect::<Result<Vec<_>, _>>()?,
                        );
                    }
                    Chart::new(d.id.clone(), d.coords.clone(), parsed)
                }
                _ => return Err(invalid(&at, "give exactly one of `diagonal` or `rows`")),
            }
            .map_err(|e| lift(&at, e))?;
            charts.insert(d.id.clone(), chart);
        }

        let mut products = BTreeMap::new();
        for d in &file.products {
            let at = format!("products.{}", d.id);
            let m1 = charts.get(&d.m1).ok_or_else(|| unresolved(&at, "chart", &d.m1))?;
            let m2 = charts.get(&d.m2).ok_or_else(|| unresolved(&at, "chart", &d.m2))?;
            check_bounds(&at, &d.bounds)?;
            let product = DoublyWarpedProduct::new(
                m1.clone(),
                m2.clone(),
                self.expr(&format!("{at}.f1"), &d.f1)?,
                self.expr(&format!("{at}.f2"), &d.f2)?,
            )
            .map_err(|e| lift(&at, e))?;
            products.insert(
                d.id.clone(),
                Product {
                    product,
                    bounds: d.bounds.clone(),
                },
            );
        }

        let mut spacetimes = BTreeMap::new();
        for d in &file.spacetimes {
            let at = format!("spacetimes.{}", d.id);
            let base = charts.get(&d.base).ok_or_else(|| unresolved(&at, "chart", &d.base))?;
            check_bounds(&at, &d.bounds)?;
            let st = DoublyWarpedSpacetime::with_time(
                base.clone(),
                self.expr(&format!("{at}.f"), &d.f)?,
                self.expr(&format!("{at}.sigma"), &d.sigma)?,
                d.interval,
                d.time.as_deref().unwrap_or(DEFAULT_TIME),
            )
            .map_err(|e| lift(&at, e))?;
            spacetimes.insert(
                d.id.clone(),
                Spacetime {
                    spacetime: st,
                    bounds: d.bounds.clone(),
                },
            );
        }

        let mut fields = BTreeMap::new();
        for d in &file.fields {
            let at = format!("fields.{}", d.id);
            let value = if let Some(c) = charts.get(&d.on) {
                let comps = d
                    .components
                    .as_ref()
                    .ok_or_else(|| invalid(&at, "a chart field needs `components`"))?;
                FieldValue::Chart(self.vector(&format!("{at}.components"), comps, c)?)
            } else if let Some(p) = products.get(&d.on) {
                let w = &p.product;
                let empty = BTreeMap::new();
                let part1 = self.vector(&format!("{at}.part1"), d.part1.as_ref().unwrap_or(&empty), w.m1())?;
                let part2 = self.vector(&format!("{at}.part2"), d.part2.as_ref().unwrap_or(&empty), w.m2())?;
                let field = SplitVectorField::new(part1, part2);
                field.check_on(w).map_err(|e| lift(&at, e))?;
                FieldValue::Split(field)
            } else if let Some(s) = spacetimes.get(&d.on) {
                let st = &s.spacetime;
                let h = self.expr(&format!("{at}.h"), d.h.as_deref().unwrap_or("0"))?;
                let empty = BTreeMap::new();
                let spatial = self.vector(&format!("{at}.spatial"), d.spatial.as_ref().unwrap_or(&empty), st.base())?;
                let field = SpacetimeField::new(h, spatial);
                field.check_on(st).map_err(|e| lift(&at, e))?;
                FieldValue::Spacetime(field)
            } else {
                return Err(unresolved(&at, "chart, product or space-time", &d.on));
            };
            fields.insert(
                d.id.clone(),
                FieldDef {
                    on: d.on.clone(),
                    value,
                },
            );
        }

        let mut checks = Vec::new();
        for d in file.checks {
            checks.push(self.check(d, &products, &spacetimes, &fields)?);
        }

        Ok(Scenario {
            name: file.name.unwrap_or_else(|| default_name.to_string()),
            seed: file.seed.unwrap_or(0),
            samples: file.samples.unwrap_or(DEFAULT_SAMPLES),
            tol: file.tol,
            constants: self.constants.clone(),
            charts,
            products,
            spacetimes,
            fields,
            checks,
        })
    }

    fn check(
        &self,
        d: CheckDecl,
        products: &BTreeMap<String, Product>,
        spacetimes: &BTreeMap<String, Spacetime>,
        fields: &BTreeMap<String, FieldDef>,
    ) -> Result<Check, ScenarioError> {
        let at = format!("checks.{}", d.id);
        let kind = CheckKind::from_name(&d.kind).ok_or_else(|| unresolved(&at, "check kind", &d.kind))?;
        check_bounds(&at, &d.bounds)?;
        let coords: Vec<String> = match kind.target() {
            TargetKind::None => {
                if let Some(t) = &d.target {
                    return Err(invalid(&at, format!("`{}` takes no target, got `{t}`", kind.name())));
                }
                Vec::new()
            }
            TargetKind::Product => {
                let t = d.target.as_deref().ok_or_else(|| invalid(&at, "missing `target`"))?;
                let p = products.get(t).ok_or_else(|| unresolved(&at, "product", t))?;
                p.product.chart().coords().to_vec()
            }
            TargetKind::Spacetime => {
                let t = d.target.as_deref().ok_or_else(|| invalid(&at, "missing `target`"))?;
                let s = spacetimes.get(t).ok_or_else(|| unresolved(&at, "space-time", t))?;
                s.spacetime.chart().coords().to_vec()
            }
        };
        let mut ids: Vec<String> = d.field.into_iter().collect();
        ids.extend(d.fields);
        let (lo, hi) = kind.field_arity();
        if ids.len() < lo || ids.len() > hi {
            let want = if lo == hi { lo.to_string() } else { format!("{lo} to {hi}") };
            return Err(invalid(&at, format!("`{}` takes {want} field(s), got {}", kind.name(), ids.len())));
        }
        for id in &ids {
            let f = fields.get(id).ok_or_else(|| unresolved(&at, "field", id))?;
            if d.target.as_deref() != Some(f.on.as_str()) {
                return Err(invalid(&at, format!("field `{id}` lives on `{}`, not on the target", f.on)));
            }
        }
        for p in kind.required_params() {
            if !d.params.contains_key(*p) {
                return Err(invalid(&at, format!("missing parameter `{p}`")));
            }
        }
        for (k, v) in &d.params {
            if !kind.allowed_params().contains(&k.as_str()) {
                return Err(invalid(&at, format!("`{}` has no parameter `{k}`", kind.name())));
            }
            if !v.is_finite() {
                return Err(invalid(&at, format!("parameter `{k}` must be finite")));
            }
        }
        for c in d.start.keys().chain(d.velocity.keys()).chain(d.curve.keys()) {
            if !coords.contains(c) {
                return Err(unresolved(&at, "coordinate", c));
            }
        }
        let mut curve = BTreeMap::new();
        for (c, t) in &d.curve {
            let e = self.expr(&format!("{at}.curve.{c}"), t)?;
            if let Some(v) = e.vars().into_iter().find(|v| v != "s") {
                return Err(invalid(&at, format!("curve component `{c}` depends on `{v}`; use the parameter `s`")));
            }
            curve.insert(c.clone(), e);
        }
        match kind {
            CheckKind::Geodesic => {
                for c in &coords {
                    if !d.start.contains_key(c) || !d.velocity.contains_key(c) {
                        return Err(ScenarioError::Dimension {
                            at,
                            message: format!("`start` and `velocity` must cover `{c}`"),
                        });
                    }
                }
            }
            CheckKind::Curve => {
                if let Some(c) = coords.iter().find(|c| !curve.contains_key(*c)) {
                    return Err(ScenarioError::Dimension {
                        at,
                        message: format!("`curve` must give every coordinate, missing `{c}`"),
                    });
                }
            }
            _ => {}
        }
        let expect = d
            .expect
            .as_deref()
            .map(|e| Verdict::from_name(e).ok_or_else(|| unresolved(&at, "verdict", e)))
            .transpose()?;
        if let Some(t) = d.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(&at, "tol must be positive"));
            }
        }
        Ok(Check {
            id: d.id,
            kind,
            target: d.target,
            fields: ids,
            params: d.params,
            start: d.start,
            velocity: d.velocity,
            curve,
            bounds: d.bounds,
            samples: d.samples,
            seed: d.seed,
            tol: d.tol,
            expect,
        })
    }
}
