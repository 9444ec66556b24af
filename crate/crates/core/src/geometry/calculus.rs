use nalgebra::{DMatrix, DVector};

use super::tensor::MetricJet;
use super::{Chart, VectorField};
use crate::error::Result;
use crate::expr::{Point, ScalarExpr};

fn partials(chart: &Chart, phi: &ScalarExpr, p: &Point) -> Result<DVector<f64>> {
    let values = chart
        .coords()
        .iter()
        .map(|c| phi.diff(c).eval(p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(DVector::from_vec(values))
}

/// `(grad phi)^i = g^{ij} d_j phi`.
pub fn gradient(chart: &Chart, phi: &ScalarExpr, p: &Point) -> Result<DVector<f64>> {
    let jet = MetricJet::at(chart, p)?;
    Ok(&jet.ginv * partials(chart, phi, p)?)
}

/// `H_{ij} = d_i d_j phi - Γ^k_{ij} d_k phi`.
pub fn hessian(chart: &Chart, phi: &ScalarExpr, p: &Point) -> Result<DMatrix<f64>> {
    let n = chart.dim();
    let gamma = MetricJet::at(chart, p)?.christoffel();
    let first: Vec<ScalarExpr> = chart.coords().iter().map(|c| phi.diff(c)).collect();
    let d1 = first
        .iter()
        .map(|e| e.eval(p))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut v = first[i].diff(&chart.coords()[j]).eval(p)?;
            for (k, dk) in d1.iter().enumerate() {
                v -= gamma.get(k, i, j) * dk;
            }
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

pub fn laplacian(chart: &Chart, phi: &ScalarExpr, p: &Point) -> Result<f64> {
    let ginv = MetricJet::at(chart, p)?.ginv;
    let h = hessian(chart, phi, p)?;
    Ok(ginv.component_mul(&h).sum())
}

/// The (1,1) tensor `D zeta` at `p`: entry `(k, i)` is `d_i zeta^k + Γ^k_{ij} zeta^j`,
/// so `D_X zeta = nabla * X`.
pub fn nabla(chart: &Chart, zeta: &VectorField, p: &Point) -> Result<DMatrix<f64>> {
    let n = chart.dim();
    let gamma = MetricJet::at(chart, p)?.christoffel();
    let z = zeta.values_at(chart, p)?;
    let mut m = zeta.jacobian_at(chart, p)?;
    for k in 0..n {
        for i in 0..n {
            m[(k, i)] += (0..n).map(|j| gamma.get(k, i, j) * z[j]).sum::<f64>();
        }
    }
    Ok(m)
}

/// `D_X zeta` at `p`.
pub fn covariant_derivative(
    chart: &Chart,
    x: &VectorField,
    zeta: &VectorField,
    p: &Point,
) -> Result<DVector<f64>> {
    Ok(nabla(chart, zeta, p)? * x.values_at(chart, p)?)
}

/// `D_v zeta` for a tangent vector `v` given numerically at `p`.
pub fn covariant_derivative_along(
    chart: &Chart,
    v: &DVector<f64>,
    zeta: &VectorField,
    p: &Point,
) -> Result<DVector<f64>> {
    Ok(nabla(chart, zeta, p)? * v)
}

/// `[zeta, v]^k = zeta^i d_i v^k - v^i d_i zeta^k`.
pub fn lie_bracket(
    chart: &Chart,
    zeta: &VectorField,
    v: &VectorField,
    p: &Point,
) -> Result<DVector<f64>> {
    let z = zeta.values_at(chart, p)?;
    let w = v.values_at(chart, p)?;
    Ok(v.jacobian_at(chart, p)? * z - zeta.jacobian_at(chart, p)? * w)
}

/// Coordinate form `zeta^k d_k g_{ij} + g_{kj} d_i zeta^k + g_{ik} d_j zeta^k`.
pub fn lie_derivative_metric(chart: &Chart, zeta: &VectorField, p: &Point) -> Result<DMatrix<f64>> {
    let jet = MetricJet::at(chart, p)?;
    let z = zeta.values_at(chart, p)?;
    let j = zeta.jacobian_at(chart, p)?;
    let mut out = j.transpose() * &jet.g + &jet.g * &j;
    for (k, dk) in jet.dg.iter().enumerate() {
        if z[k] != 0.0 {
            out += dk * z[k];
        }
    }
    Ok(out)
}

/// `(L_zeta g)(X, Y) = g(D_X zeta, Y) + g(X, D_Y zeta)`, built from [`nabla`].
pub fn lie_derivative_metric_covariant(
    chart: &Chart,
    zeta: &VectorField,
    p: &Point,
) -> Result<DMatrix<f64>> {
    let g = MetricJet::at(chart, p)?.g;
    let m = nabla(chart, zeta, p)?;
    Ok(m.transpose() * &g + &g * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    fn field(pairs: &[(&str, &str)]) -> VectorField {
        VectorField::parse(pairs.iter().copied()).unwrap()
    }

    fn sphere() -> Chart {
        Chart::diagonal(
            "s2",
            vec!["th".into(), "ph".into()],
            vec![parse("1").unwrap(), parse("sin(th)^2").unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn flat_scalar_calculus() {
        let c = Chart::euclidean("r2", &["x", "y"]);
        let p = Point::new().with("x", 0.3).with("y", -1.2);
        let phi = parse("x^2+y^2").unwrap();
        let g = gradient(&c, &phi, &p).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] + 2.4).abs() < 1e-15);
        assert!((laplacian(&c, &phi, &p).unwrap() - 4.0).abs() < 1e-14);
        let h = hessian(&c, &phi, &p).unwrap();
        assert!((h - DMatrix::identity(2, 2) * 2.0).amax() < 1e-15);
        let k = parse("7").unwrap();
        assert_eq!(gradient(&c, &k, &p).unwrap().amax(), 0.0);
        assert_eq!(laplacian(&c, &k, &p).unwrap(), 0.0);
    }

    #[test]
    fn sphere_eigenfunction() {
        let phi = parse("cos(th)").unwrap();
        for th in [PI / 2.0, 0.8, 2.0] {
            let p = Point::new().with("th", th).with("ph", 0.1);
            let l = laplacian(&sphere(), &phi, &p).unwrap();
            assert!((l + 2.0 * th.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn covariant_derivative_examples() {
        let line = Chart::euclidean("r", &["x"]);
        let p = Point::new().with("x", 1.7);
        let d = covariant_derivative(&line, &field(&[("x", "1")]), &field(&[("x", "x+3")]), &p)
            .unwrap();
        assert_eq!(d[0], 1.0);
        let d = covariant_derivative(&line, &field(&[("x", "1")]), &VectorField::zero(), &p)
            .unwrap();
        assert_eq!(d[0], 0.0);
        let q = Point::new().with("th", PI / 4.0).with("ph", 0.0);
        let phi = field(&[("ph", "1")]);
        let d = covariant_derivative(&sphere(), &phi, &phi, &q).unwrap();
        assert!((d[0] + 0.5).abs() < 1e-15 && d[1].abs() < 1e-15);
    }

    #[test]
    fn brackets() {
        let c = Chart::euclidean("r2", &["x", "y"]);
        let p = Point::new().with("x", 2.0).with("y", 5.0);
        let b = lie_bracket(&c, &field(&[("x", "1")]), &field(&[("y", "1")]), &p).unwrap();
        assert_eq!(b.amax(), 0.0);
        let b = lie_bracket(&c, &field(&[("x", "x")]), &field(&[("x", "1")]), &p).unwrap();
        assert_eq!((b[0], b[1]), (-1.0, 0.0));
        let z = field(&[("x", "x*y"), ("y", "sin(x)")]);
        assert_eq!(lie_bracket(&c, &z, &z, &p).unwrap().amax(), 0.0);
    }

    #[test]
    fn lie_derivative_examples() {
        let line = Chart::euclidean("r", &["x"]);
        let p = Point::new().with("x", -0.4);
        let l = lie_derivative_metric(&line, &field(&[("x", "x")]), &p).unwrap();
        assert_eq!(l[(0, 0)], 2.0);
        let plane = Chart::euclidean("r2", &["x", "y"]);
        let q = Point::new().with("x", 0.5).with("y", 1.5);
        let rot = field(&[("x", "-y"), ("y", "x")]);
        assert_eq!(lie_derivative_metric(&plane, &rot, &q).unwrap().amax(), 0.0);
        let z = field(&[("th", "sin(ph)"), ("ph", "th*cos(ph)")]);
        let r = Point::new().with("th", 1.0).with("ph", 0.3);
        let a = lie_derivative_metric(&sphere(), &z, &r).unwrap();
        let b = lie_derivative_metric_covariant(&sphere(), &z, &r).unwrap();
        assert!((a - b).amax() < 1e-12);
    }
}
