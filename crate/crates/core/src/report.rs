//! Residual reports shared by every check.
//!
//! A [`Track`] collects one residual per sample (or per sample and probe)
//! together with the magnitude of the quantities that produced it. A
//! residual passes when `residual <= tol * (1 + scale)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Killing,
    NotKilling,
    Homothetic,
    Conformal,
    NotConformal,
    Concurrent,
    NotConcurrent,
    Geodesic,
    NotGeodesic,
    Pass,
    Fail,
    PreconditionFailed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Killing => "killing",
            Verdict::NotKilling => "not_killing",
            Verdict::Homothetic => "homothetic",
            Verdict::Conformal => "conformal",
            Verdict::NotConformal => "not_conformal",
            Verdict::Concurrent => "concurrent",
            Verdict::NotConcurrent => "not_concurrent",
            Verdict::Geodesic => "geodesic",
            Verdict::NotGeodesic => "not_geodesic",
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::PreconditionFailed => "precondition_failed",
        }
    }

    pub fn from_name(name: &str) -> Option<Verdict> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).ok()
    }

    /// Every verdict in the Killing / homothetic / conformal chain counts as
    /// conformal.
    pub fn is_conformal(self) -> bool {
        matches!(
            self,
            Verdict::Killing | Verdict::Homothetic | Verdict::Conformal
        )
    }

    /// Whether `self` satisfies an expectation of `expected`. A Killing field
    /// satisfies "homothetic" and "conformal"; a homothetic one "conformal".
    pub fn satisfies(self, expected: Verdict) -> bool {
        match expected {
            Verdict::Conformal => self.is_conformal(),
            Verdict::Homothetic => matches!(self, Verdict::Killing | Verdict::Homothetic),
            other => self == other,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn within(residual: f64, scale: f64, tol: f64) -> bool {
    residual.is_finite() && residual <= tol * (1.0 + scale.abs())
}

/// One named family of residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub name: String,
    /// Tracks that do not gate are reported for comparison only.
    pub gating: bool,
    pub passed: bool,
    pub worst: f64,
    pub worst_scale: f64,
    pub worst_at: Option<Point>,
    /// Largest residual per sample.
    pub residuals: Vec<f64>,
    pub tol: f64,
}

impl Track {
    pub fn new(name: impl Into<String>, tol: f64) -> Track {
        Track {
            name: name.into(),
            gating: true,
            passed: true,
            worst: 0.0,
            worst_scale: 0.0,
            worst_at: None,
            residuals: Vec::new(),
            tol,
        }
    }

    pub fn informational(mut self) -> Track {
        self.gating = false;
        self
    }

    /// Starts a new sample; subsequent [`Track::push`] calls fold into it.
    pub fn begin_sample(&mut self) {
        self.residuals.push(0.0);
    }

    pub fn push(&mut self, residual: f64, scale: f64, at: &Point) {
        if self.residuals.is_empty() {
            self.begin_sample();
        }
        let slot = self.residuals.last_mut().expect("sample opened");
        if residual > *slot || residual.is_nan() {
            *slot = if residual.is_finite() { residual } else { f64::MAX };
        }
        if !within(residual, scale, self.tol) {
            self.passed = false;
        }
        let stored = if residual.is_finite() { residual } else { f64::MAX };
        if self.worst_at.is_none() || stored > self.worst {
            self.worst = stored;
            self.worst_scale = scale;
            self.worst_at = Some(at.clone());
        }
    }

    /// Records a single-residual sample.
    pub fn record(&mut self, residual: f64, scale: f64, at: &Point) {
        self.begin_sample();
        self.push(residual, scale, at);
    }
}

/// Outcome of a classification or verification check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub check: String,
    pub verdict: Verdict,
    pub tol: f64,
    pub samples: usize,
    /// Worst residual over the gating tracks.
    pub worst_residual: f64,
    pub witness: Option<Point>,
    pub tracks: Vec<Track>,
    pub derived: BTreeMap<String, f64>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    pub fn new(check: impl Into<String>, tol: f64) -> ClassificationReport {
        ClassificationReport {
            check: check.into(),
            verdict: Verdict::Pass,
            tol,
            samples: 0,
            worst_residual: 0.0,
            witness: None,
            tracks: Vec::new(),
            derived: BTreeMap::new(),
            flags: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn track(&self, name: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.name == name)
    }

    /// Whether the named track exists and passed.
    pub fn track_passed(&self, name: &str) -> bool {
        self.track(name).is_some_and(|t| t.passed)
    }

    pub fn add_track(&mut self, track: Track) {
        if track.gating && (self.witness.is_none() || track.worst > self.worst_residual) {
            self.worst_residual = track.worst;
            self.witness = track.worst_at.clone();
        }
        self.tracks.push(track);
    }

    /// Whether every gating track passed.
    pub fn gating_passed(&self) -> bool {
        self.tracks.iter().filter(|t| t.gating).all(|t| t.passed)
    }

    pub fn derive(&mut self, name: impl Into<String>, value: f64) {
        self.derived.insert(name.into(), value);
    }

    pub fn flag(&mut self, message: impl Into<String>) {
        self.flags.push(message.into());
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.notes.push(message.into());
    }
}

/// Outcome of a Ricci-soliton check. Residual norms are the metric-scaled
/// max norm `|A| / max(1, |g|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonCertificate {
    pub check: String,
    pub verdict: Verdict,
    pub passed: bool,
    pub tol: f64,
    pub samples: usize,
    pub worst_residual: f64,
    pub witness: Option<Point>,
    pub residual_norms: Vec<f64>,
    pub tracks: Vec<Track>,
    pub derived: BTreeMap<String, f64>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl SolitonCertificate {
    pub fn from_report(report: ClassificationReport, residual_norms: Vec<f64>) -> Self {
        let passed = report.verdict == Verdict::Pass;
        SolitonCertificate {
            check: report.check,
            verdict: report.verdict,
            passed,
            tol: report.tol,
            samples: report.samples,
            worst_residual: report.worst_residual,
            witness: report.witness,
            residual_norms,
            tracks: report.tracks,
            derived: report.derived,
            flags: report.flags,
            notes: report.notes,
        }
    }

    pub fn track(&self, name: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.name == name)
    }

    pub fn track_passed(&self, name: &str) -> bool {
        self.track(name).is_some_and(|t| t.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_names_round_trip() {
        for v in [
            Verdict::Killing,
            Verdict::NotConformal,
            Verdict::PreconditionFailed,
            Verdict::Concurrent,
        ] {
            assert_eq!(Verdict::from_name(v.as_str()), Some(v));
            assert_eq!(serde_json::to_string(&v).unwrap(), format!("\"{v}\""));
        }
        assert_eq!(Verdict::from_name("bogus"), None);
    }

    #[test]
    fn verdict_expectations() {
        assert!(Verdict::Killing.satisfies(Verdict::Conformal));
        assert!(Verdict::Homothetic.satisfies(Verdict::Conformal));
        assert!(!Verdict::Conformal.satisfies(Verdict::Homothetic));
        assert!(!Verdict::Conformal.satisfies(Verdict::Killing));
    }

    #[test]
    fn track_accumulates_worst() {
        let p = Point::new().with("x", 1.0);
        let q = Point::new().with("x", 2.0);
        let mut t = Track::new("r", 1e-8);
        t.record(1e-12, 0.0, &p);
        t.begin_sample();
        t.push(1e-10, 0.0, &q);
        t.push(5e-9, 1.0, &q);
        assert!(t.passed);
        assert_eq!(t.residuals, vec![1e-12, 5e-9]);
        assert_eq!(t.worst_at, Some(q.clone()));
        t.record(1.0, 0.0, &p);
        assert!(!t.passed);
        assert_eq!(t.worst, 1.0);
    }
}
