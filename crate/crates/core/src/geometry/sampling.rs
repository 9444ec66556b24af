use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Point;

/// Redraws allowed per sample before sampling gives up.
pub const MAX_REDRAWS: usize = 100;

/// Random probe vectors added to the coordinate frame.
const RANDOM_PROBES: usize = 8;

/// Stream separator so probe vectors never reuse the point stream.
const PROBE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seeded uniform sampling of a coordinate box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    #[serde(rename = "box")]
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
}

impl SamplePlan {
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn new<I, S>(bounds: I, count: usize, seed: u64) -> SamplePlan
    where
        I: IntoIterator<Item = (S, (f64, f64))>,
        S: Into<String>,
    {
        SamplePlan {
            bounds: bounds.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            count,
            seed,
            tol: SamplePlan::DEFAULT_TOL,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> SamplePlan {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> SamplePlan {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> SamplePlan {
        self.count = count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Invalid("sample count must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Invalid(format!("tolerance {} must be positive", self.tol)));
        }
        for (name, &(lo, hi)) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Invalid(format!("empty interval [{lo}, {hi}] for `{name}`")));
            }
        }
        Ok(())
    }

    /// Fails unless every name in `coords` has an interval.
    pub fn require<'a>(&self, coords: impl IntoIterator<Item = &'a String>) -> Result<()> {
        for c in coords {
            if !self.bounds.contains_key(c) {
                return Err(Error::Sampling(format!("no sampling interval for `{c}`")));
            }
        }
        Ok(())
    }

    /// Draws `count` points. A candidate is redrawn when `accept` returns
    /// `Ok(false)` or an error; after [`MAX_REDRAWS`] failed redraws for one
    /// sample the whole draw fails.
    pub fn draw<F>(&self, mut accept: F) -> Result<Vec<Point>>
    where
        F: FnMut(&Point) -> Result<bool>,
    {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut points = Vec::with_capacity(self.count);
        while points.len() < self.count {
            let mut last = String::from("rejected by the acceptance test");
            let mut found = None;
            for _ in 0..=MAX_REDRAWS {
                let p = Point::from_pairs(self.bounds.iter().map(|(name, &(lo, hi))| {
                    let v = if lo == hi { lo } else { rng.random_range(lo..hi) };
                    (name.clone(), v)
                }));
                match accept(&p) {
                    Ok(true) => {
                        found = Some(p);
                        break;
                    }
                    Ok(false) => {}
                    Err(e) => last = e.to_string(),
                }
            }
            match found {
                Some(p) => points.push(p),
                None => {
                    return Err(Error::Sampling(format!(
                        "sample {} exhausted {MAX_REDRAWS} redraws: {last}",
                        points.len()
                    )))
                }
            }
        }
        Ok(points)
    }

    /// Probe vectors for quantified checks in dimension `n`.
    pub fn probes(&self, n: usize) -> Vec<DVector<f64>> {
        probe_vectors(n, self.seed)
    }
}

/// The coordinate frame followed by 8 seeded random unit vectors.
pub fn probe_vectors(n: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PROBE_STREAM);
    while out.len() < n + RANDOM_PROBES {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 {
            out.push(v / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(seed: u64) -> SamplePlan {
        SamplePlan::new([("x", (0.0, 1.0)), ("y", (-2.0, 2.0))], 10, seed)
    }

    #[test]
    fn deterministic_and_in_box() {
        let a = plan(7).draw(|_| Ok(true)).unwrap();
        let b = plan(7).draw(|_| Ok(true)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, plan(8).draw(|_| Ok(true)).unwrap());
        for p in &a {
            let x = p.get("x").unwrap();
            let y = p.get("y").unwrap();
            assert!((0.0..1.0).contains(&x) && (-2.0..2.0).contains(&y));
        }
    }

    #[test]
    fn rejection_and_exhaustion() {
        let pts = plan(1).draw(|p| Ok(p.get("x").unwrap() > 0.5)).unwrap();
        assert!(pts.iter().all(|p| p.get("x").unwrap() > 0.5));
        let err = plan(1).draw(|_| Ok(false)).unwrap_err();
        assert!(matches!(err, Error::Sampling(_)));
    }

    #[test]
    fn invalid_plans() {
        assert!(plan(0).with_count(0).validate().is_err());
        assert!(plan(0).with_tol(0.0).validate().is_err());
        assert!(SamplePlan::new([("x", (1.0, 0.0))], 1, 0).validate().is_err());
    }

    #[test]
    fn probes_are_frame_plus_unit_vectors() {
        let p = probe_vectors(3, 42);
        assert_eq!(p.len(), 11);
        assert_eq!(p[1], DVector::from_vec(vec![0.0, 1.0, 0.0]));
        for v in &p[3..] {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(p, probe_vectors(3, 42));
    }
}
