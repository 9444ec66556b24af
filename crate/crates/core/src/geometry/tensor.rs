use nalgebra::DMatrix;

use super::Chart;
use crate::error::{Error, Result};
use crate::expr::Point;

/// Metrics with `|det g| <= DET_EPS` at a point are treated as singular.
pub const DET_EPS: f64 = 1e-12;

pub fn metric_at(chart: &Chart, p: &Point) -> Result<DMatrix<f64>> {
    let n = chart.dim();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = chart.component(i, j).eval(p)?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

fn invert(chart: &Chart, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let det = g.determinant();
    if !det.is_finite() || det.abs() <= DET_EPS {
        return Err(Error::SingularMetric {
            chart: chart.name().to_string(),
            det,
        });
    }
    let inv = g.clone().try_inverse().ok_or_else(|| Error::SingularMetric {
        chart: chart.name().to_string(),
        det,
    })?;
    // Symmetrize away rounding asymmetry from the LU solve.
    Ok((&inv + inv.transpose()) * 0.5)
}

pub fn inverse_metric_at(chart: &Chart, p: &Point) -> Result<DMatrix<f64>> {
    invert(chart, &metric_at(chart, p)?)
}

/// Metric, inverse and first derivatives `dg[k] = d_k g` at one point.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
}

impl MetricJet {
    pub fn at(chart: &Chart, p: &Point) -> Result<MetricJet> {
        let n = chart.dim();
        let g = metric_at(chart, p)?;
        let ginv = invert(chart, &g)?;
        let mut dg = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                for (k, dk) in dg.iter_mut().enumerate() {
                    let v = chart.d1(i, j, k).eval(p)?;
                    dk[(i, j)] = v;
                    dk[(j, i)] = v;
                }
            }
        }
        Ok(MetricJet { g, ginv, dg })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn christoffel(&self) -> Christoffel {
        let n = self.dim();
        // Lowered symbols Γ_{l,ij}.
        let mut lower = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5
                        * (self.dg[i][(l, j)] + self.dg[j][(l, i)] - self.dg[l][(i, j)]);
                    lower[(l * n + i) * n + j] = v;
                    lower[(l * n + j) * n + i] = v;
                }
            }
        }
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    data[(k * n + i) * n + j] = (0..n)
                        .map(|l| self.ginv[(k, l)] * lower[(l * n + i) * n + j])
                        .sum();
                }
            }
        }
        Christoffel { n, data }
    }
}

/// Christoffel symbols `Γ^k_{ij}` of the Levi-Civita connection.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// `Γ^k_{ij} a^i b^j` for every `k`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        s += self.get(k, i, j) * a[i] * b[j];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn christoffel(chart: &Chart, p: &Point) -> Result<Christoffel> {
    Ok(MetricJet::at(chart, p)?.christoffel())
}

/// Riemann tensor `R^r_{s m v}` with
/// `R^r_{smv} = d_m Γ^r_{vs} - d_v Γ^r_{ms} + Γ^r_{ml} Γ^l_{vs} - Γ^r_{vl} Γ^l_{ms}`.
#[derive(Clone, Debug)]
pub struct Riemann {
    n: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, s: usize, m: usize, v: usize) -> f64 {
        let n = self.n;
        self.data[((r * n + s) * n + m) * n + v]
    }

    /// `Ric_{sv} = R^r_{srv}`; the unit round sphere gets `Ric = g`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |s, v| (0..n).map(|r| self.get(r, s, r, v)).sum())
    }
}

pub fn riemann(chart: &Chart, p: &Point) -> Result<Riemann> {
    let n = chart.dim();
    let jet = MetricJet::at(chart, p)?;
    let gamma = jet.christoffel();

    // d_m g^{kl} = -(g^-1 d_m g g^-1)^{kl}
    let dginv: Vec<DMatrix<f64>> = jet.dg.iter().map(|d| -(&jet.ginv * d * &jet.ginv)).collect();
    let mut d2 = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in i..n {
            for m in 0..n {
                for l in 0..n {
                    let v = chart.d2(i, j, m, l).eval(p)?;
                    d2[((i * n + j) * n + m) * n + l] = v;
                    d2[((j * n + i) * n + m) * n + l] = v;
                }
            }
        }
    }
    let d2g = |i: usize, j: usize, m: usize, l: usize| d2[((i * n + j) * n + m) * n + l];

    // dgamma[m][k][i][j] = d_m Γ^k_{ij}
    let mut dgamma = vec![0.0; n * n * n * n];
    for m in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut lower = vec![0.0; n];
                let mut dlower = vec![0.0; n];
                for l in 0..n {
                    lower[l] =
                        0.5 * (jet.dg[i][(l, j)] + jet.dg[j][(l, i)] - jet.dg[l][(i, j)]);
                    dlower[l] = 0.5 * (d2g(l, j, i, m) + d2g(l, i, j, m) - d2g(i, j, l, m));
                }
                for k in 0..n {
                    let v: f64 = (0..n)
                        .map(|l| dginv[m][(k, l)] * lower[l] + jet.ginv[(k, l)] * dlower[l])
                        .sum();
                    dgamma[((m * n + k) * n + i) * n + j] = v;
                    dgamma[((m * n + k) * n + j) * n + i] = v;
                }
            }
        }
    }
    let dg_at = |m: usize, k: usize, i: usize, j: usize| dgamma[((m * n + k) * n + i) * n + j];

    let mut data = vec![0.0; n * n * n * n];
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for v in 0..n {
                    let mut val = dg_at(m, r, v, s) - dg_at(v, r, m, s);
                    for l in 0..n {
                        val += gamma.get(r, m, l) * gamma.get(l, v, s)
                            - gamma.get(r, v, l) * gamma.get(l, m, s);
                    }
                    data[((r * n + s) * n + m) * n + v] = val;
                }
            }
        }
    }
    Ok(Riemann { n, data })
}

pub fn ricci(chart: &Chart, p: &Point) -> Result<DMatrix<f64>> {
    Ok(riemann(chart, p)?.ricci())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    fn sphere() -> Chart {
        Chart::diagonal(
            "s2",
            vec!["th".into(), "ph".into()],
            vec![parse("1").unwrap(), parse("sin(th)^2").unwrap()],
        )
        .unwrap()
    }

    fn hyperbolic() -> Chart {
        Chart::diagonal(
            "h2",
            vec!["t".into(), "x".into()],
            vec![parse("1").unwrap(), parse("exp(2*t)").unwrap()],
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn metric_and_inverse() {
        let p = Point::new().with("th", PI / 2.0).with("ph", 0.3);
        let g = metric_at(&sphere(), &p).unwrap();
        close(g[(1, 1)], 1.0, 1e-15);
        let flat = Chart::euclidean("r2", &["x", "y"]);
        let q = Point::new().with("x", 3.0).with("y", -1.0);
        assert_eq!(metric_at(&flat, &q).unwrap(), DMatrix::identity(2, 2));
        let lor = Chart::diagonal(
            "l",
            vec!["t".into(), "x".into()],
            vec![parse("-(2)^2").unwrap(), parse("1").unwrap()],
        )
        .unwrap();
        let g = metric_at(&lor, &q.clone().with("t", 0.0)).unwrap();
        assert_eq!(g[(0, 0)], -4.0);
        let p = Point::new().with("th", 1.1).with("ph", 0.0);
        let prod = metric_at(&sphere(), &p).unwrap() * inverse_metric_at(&sphere(), &p).unwrap();
        assert!((prod - DMatrix::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn singular_metric_is_an_error() {
        let p = Point::new().with("th", 0.0).with("ph", 0.0);
        assert!(matches!(
            inverse_metric_at(&sphere(), &p),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn christoffel_examples() {
        let p = Point::new().with("th", PI / 4.0).with("ph", 0.0);
        let c = christoffel(&sphere(), &p).unwrap();
        close(c.get(0, 1, 1), -0.5, 1e-15);
        let p = Point::new().with("t", 0.0).with("x", 2.0);
        let c = christoffel(&hyperbolic(), &p).unwrap();
        close(c.get(0, 1, 1), -1.0, 1e-15);
        close(c.get(1, 0, 1), 1.0, 1e-15);
        close(c.get(1, 1, 0), 1.0, 1e-15);
        let flat = Chart::euclidean("r3", &["a", "b", "c"]);
        let q = Point::from_pairs([("a", 1.0), ("b", 2.0), ("c", 3.0)]);
        assert_eq!(christoffel(&flat, &q).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn ricci_examples() {
        let th = PI / 3.0;
        let p = Point::new().with("th", th).with("ph", 0.4);
        let r = ricci(&sphere(), &p).unwrap();
        close(r[(0, 0)], 1.0, 1e-12);
        close(r[(1, 1)], th.sin().powi(2), 1e-12);
        close(r[(0, 1)], 0.0, 1e-12);
        for t in [-1.0, 0.0, 0.7] {
            let p = Point::new().with("t", t).with("x", 0.0);
            let r = ricci(&hyperbolic(), &p).unwrap();
            let g = metric_at(&hyperbolic(), &p).unwrap();
            assert!((r + g).amax() < 1e-10);
        }
    }
}
