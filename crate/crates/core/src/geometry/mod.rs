//! Chart-level tensor calculus computed directly from metric components.
//!
//! Nothing in here knows about warped products; it is the reference against
//! which the closed forms in [`crate::warped`], [`crate::spacetime`] and
//! [`crate::soliton`] are checked. The metric is never assumed positive
//! definite, only invertible, so Lorentzian charts go through the same code.

mod calculus;
mod classify;
mod geodesic;
mod sampling;
mod tensor;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Point, ScalarExpr};

pub use calculus::{
    covariant_derivative, covariant_derivative_along, gradient, hessian, laplacian, lie_bracket,
    lie_derivative_metric, lie_derivative_metric_covariant, nabla,
};
pub use classify::{
    conformal_check, conformal_factor_estimate, conformal_verdict, killing_check,
    ConformalEstimate,
};
pub(crate) use classify::{accept_on, mean_spread};
pub use geodesic::{geodesic_acceleration, geodesic_step, integrate_geodesic, CurveState};
pub use crate::report::within;
pub use sampling::{probe_vectors, SamplePlan, MAX_REDRAWS};
pub use tensor::{
    christoffel, inverse_metric_at, metric_at, ricci, riemann, Christoffel, MetricJet, Riemann,
    DET_EPS,
};

/// A coordinate patch with a symmetric metric built from expressions.
///
/// Only the upper triangle of the metric is stored. First and second
/// coordinate derivatives of every component are derived symbolically on
/// construction (second derivatives lazily) and reused by all operations.
#[derive(Clone, Debug)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    signature: Vec<i8>,
    metric: Vec<ScalarExpr>,
    d1: Vec<Vec<ScalarExpr>>,
    d2: OnceLock<Vec<Vec<ScalarExpr>>>,
}

fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Chart {
    /// Builds a chart from full metric rows. The rows must be square and
    /// symmetric up to structural equality of the expressions.
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        rows: Vec<Vec<ScalarExpr>>,
    ) -> Result<Chart> {
        let n = coords.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "metric must be {n}x{n} to match the coordinates"
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Invalid(format!(
                        "metric is not symmetric at ({}, {})",
                        coords[i], coords[j]
                    )));
                }
            }
        }
        let upper = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| rows[i][j].clone())
            .collect();
        Chart::from_upper(name, coords, upper)
    }

    pub fn diagonal(
        name: impl Into<String>,
        coords: Vec<String>,
        diagonal: Vec<ScalarExpr>,
    ) -> Result<Chart> {
        let n = coords.len();
        if diagonal.len() != n {
            return Err(Error::Dimension(format!(
                "{} diagonal entries for {n} coordinates",
                diagonal.len()
            )));
        }
        let mut rows = vec![vec![ScalarExpr::zero(); n]; n];
        for (i, d) in diagonal.into_iter().enumerate() {
            rows[i][i] = d;
        }
        Chart::new(name, coords, rows)
    }

    /// Flat Euclidean chart on the given coordinates.
    pub fn euclidean(name: impl Into<String>, coords: &[&str]) -> Chart {
        let coords: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
        let n = coords.len();
        Chart::diagonal(name, coords, vec![ScalarExpr::one(); n]).expect("valid flat chart")
    }

    fn from_upper(
        name: impl Into<String>,
        coords: Vec<String>,
        upper: Vec<ScalarExpr>,
    ) -> Result<Chart> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Dimension("a chart needs at least one coordinate".into()));
        }
        let unique: BTreeSet<&String> = coords.iter().collect();
        if unique.len() != n {
            return Err(Error::Invalid("duplicate coordinate names".into()));
        }
        for e in &upper {
            if let Some(v) = e.vars().into_iter().find(|v| !coords.contains(v)) {
                return Err(Error::UnknownCoordinate(v));
            }
        }
        let d1 = upper
            .iter()
            .map(|e| coords.iter().map(|c| e.diff(c)).collect())
            .collect();
        Ok(Chart {
            name: name.into(),
            signature: vec![1; n],
            coords,
            metric: upper,
            d1,
            d2: OnceLock::new(),
        })
    }

    /// Attaches per-coordinate sign hints. They are informational only.
    pub fn with_signature(mut self, signature: Vec<i8>) -> Result<Chart> {
        if signature.len() != self.dim() {
            return Err(Error::Dimension("signature length".into()));
        }
        self.signature = signature;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn index_of(&self, coord: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == coord)
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.metric[packed(self.dim(), i, j)]
    }

    fn d1(&self, i: usize, j: usize, k: usize) -> &ScalarExpr {
        &self.d1[packed(self.dim(), i, j)][k]
    }

    fn d2(&self, i: usize, j: usize, k: usize, l: usize) -> &ScalarExpr {
        let n = self.dim();
        let table = self.d2.get_or_init(|| {
            self.d1
                .iter()
                .map(|row| {
                    let mut out = vec![ScalarExpr::zero(); n * n];
                    for k in 0..n {
                        for l in k..n {
                            let e = row[k].diff(&self.coords[l]);
                            out[k * n + l] = e.clone();
                            out[l * n + k] = e;
                        }
                    }
                    out
                })
                .collect()
        });
        &table[packed(n, i, j)][k * n + l]
    }

    /// Vector of `p`'s values for this chart's coordinates, in order.
    pub fn coordinates_of(&self, p: &Point) -> Result<DVector<f64>> {
        let values = self
            .coords
            .iter()
            .map(|c| p.get(c).ok_or_else(|| Error::UnknownCoordinate(c.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(values))
    }

    /// Copy of `p` with this chart's coordinates overwritten by `x`.
    pub fn point_at(&self, base: &Point, x: &DVector<f64>) -> Point {
        let mut p = base.clone();
        for (c, v) in self.coords.iter().zip(x.iter()) {
            p.set(c.clone(), *v);
        }
        p
    }

    /// Quadratic form `g(a, b)` at `p`.
    pub fn inner(&self, p: &Point, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        let g = metric_at(self, p)?;
        Ok((a.transpose() * g * b)[(0, 0)])
    }
}

/// Vector field given by one expression per coordinate; missing components
/// are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorField {
    components: BTreeMap<String, ScalarExpr>,
}

impl VectorField {
    pub fn zero() -> VectorField {
        VectorField::default()
    }

    pub fn new<I, S>(components: I) -> VectorField
    where
        I: IntoIterator<Item = (S, ScalarExpr)>,
        S: Into<String>,
    {
        VectorField {
            components: components
                .into_iter()
                .map(|(k, v)| (k.into(), v))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Coordinate field `d/d coord`.
    pub fn coordinate(coord: &str) -> VectorField {
        VectorField::new([(coord, ScalarExpr::one())])
    }

    /// Parses `(coordinate, expression)` pairs.
    pub fn parse<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<VectorField> {
        let comps = pairs
            .into_iter()
            .map(|(c, e)| Ok((c.to_string(), crate::expr::parse(e)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField::new(comps))
    }

    pub fn components(&self) -> &BTreeMap<String, ScalarExpr> {
        &self.components
    }

    pub fn component(&self, coord: &str) -> ScalarExpr {
        self.components
            .get(coord)
            .cloned()
            .unwrap_or_else(ScalarExpr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Fails unless every component names a chart coordinate and only
    /// depends on the chart's coordinates.
    pub fn check_on(&self, chart: &Chart) -> Result<()> {
        for (c, e) in &self.components {
            if chart.index_of(c).is_none() {
                return Err(Error::UnknownCoordinate(c.clone()));
            }
            if let Some(v) = e.vars().into_iter().find(|v| chart.index_of(v).is_none()) {
                return Err(Error::UnknownCoordinate(v));
            }
        }
        Ok(())
    }

    pub fn values_at(&self, chart: &Chart, p: &Point) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(chart.dim());
        for (c, e) in &self.components {
            let i = chart
                .index_of(c)
                .ok_or_else(|| Error::UnknownCoordinate(c.clone()))?;
            out[i] = e.eval(p)?;
        }
        Ok(out)
    }

    /// `J[(k, i)] = d_i X^k`.
    pub fn jacobian_at(&self, chart: &Chart, p: &Point) -> Result<DMatrix<f64>> {
        let n = chart.dim();
        let mut out = DMatrix::zeros(n, n);
        for (c, e) in &self.components {
            let k = chart
                .index_of(c)
                .ok_or_else(|| Error::UnknownCoordinate(c.clone()))?;
            for (i, coord) in chart.coords().iter().enumerate() {
                out[(k, i)] = e.diff(coord).eval(p)?;
            }
        }
        Ok(out)
    }

    /// Derivative of a scalar along the field, `X(phi)`, as an expression.
    pub fn apply(&self, phi: &ScalarExpr) -> ScalarExpr {
        self.components
            .iter()
            .fold(ScalarExpr::zero(), |acc, (c, e)| acc.add(&e.mul(&phi.diff(c))))
    }

    pub fn scaled(&self, factor: &ScalarExpr) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .map(|(c, e)| (c.clone(), e.mul(factor))),
        )
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &VectorField) -> VectorField {
        let mut out = self.components.clone();
        for (c, e) in &other.components {
            let sum = out.get(c).map(|a| a.add(e)).unwrap_or_else(|| e.clone());
            out.insert(c.clone(), sum);
        }
        VectorField::new(out)
    }

    pub fn bind_constants(&self, constants: &BTreeMap<String, f64>) -> VectorField {
        VectorField::new(
            self.components
                .iter()
                .map(|(c, e)| (c.clone(), e.bind_constants(constants))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn packed_indexing_is_symmetric() {
        for n in 1..5 {
            let mut seen = BTreeSet::new();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(packed(n, i, j), packed(n, j, i));
                    if i <= j {
                        assert!(seen.insert(packed(n, i, j)));
                    }
                }
            }
            assert_eq!(seen.len(), n * (n + 1) / 2);
        }
    }

    #[test]
    fn rejects_asymmetric_and_foreign_metrics() {
        let coords = vec!["x".to_string(), "y".to_string()];
        let asym = vec![
            vec![ScalarExpr::one(), parse("x").unwrap()],
            vec![ScalarExpr::zero(), ScalarExpr::one()],
        ];
        assert!(Chart::new("a", coords.clone(), asym).is_err());
        let foreign = vec![parse("1+z^2").unwrap(), ScalarExpr::one()];
        assert_eq!(
            Chart::diagonal("b", coords, foreign).unwrap_err(),
            Error::UnknownCoordinate("z".into())
        );
    }

    #[test]
    fn field_validation() {
        let chart = Chart::euclidean("r2", &["x", "y"]);
        let ok = VectorField::parse([("x", "-y"), ("y", "x")]).unwrap();
        assert!(ok.check_on(&chart).is_ok());
        let bad = VectorField::parse([("z", "1")]).unwrap();
        assert!(bad.check_on(&chart).is_err());
        let bad = VectorField::parse([("x", "t")]).unwrap();
        assert!(bad.check_on(&chart).is_err());
    }
}
