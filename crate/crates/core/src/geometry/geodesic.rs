use nalgebra::DVector;

use super::tensor::christoffel;
use super::Chart;
use crate::error::{Error, Result};
use crate::expr::Point;

/// Position and coordinate velocity of a curve. `velocity` is ordered like
/// the chart's coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    pub position: Point,
    pub velocity: DVector<f64>,
}

impl CurveState {
    pub fn new(position: Point, velocity: Vec<f64>) -> CurveState {
        CurveState {
            position,
            velocity: DVector::from_vec(velocity),
        }
    }

    /// `g(v, v)` at the current position.
    pub fn speed_squared(&self, chart: &Chart) -> Result<f64> {
        chart.inner(&self.position, &self.velocity, &self.velocity)
    }
}

/// `a^k = -Γ^k_{ij} v^i v^j`.
pub fn geodesic_acceleration(chart: &Chart, state: &CurveState) -> Result<DVector<f64>> {
    let gamma = christoffel(chart, &state.position)?;
    let v = state.velocity.as_slice();
    Ok(-DVector::from_vec(gamma.contract(v, v)))
}

/// One classical Runge–Kutta step of the geodesic equation.
pub fn geodesic_step(chart: &Chart, state: &CurveState, dt: f64) -> Result<CurveState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Invalid(format!("step size {dt} must be positive")));
    }
    if state.velocity.len() != chart.dim() || state.velocity.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("velocity must be finite with one entry per coordinate".into()));
    }
    let x0 = chart.coordinates_of(&state.position)?;
    let v0 = &state.velocity;
    let at = |x: &DVector<f64>, v: &DVector<f64>| {
        let s = CurveState {
            position: chart.point_at(&state.position, x),
            velocity: v.clone(),
        };
        geodesic_acceleration(chart, &s)
    };
    let k1x = v0.clone();
    let k1v = at(&x0, v0)?;
    let x2 = &x0 + &k1x * (dt / 2.0);
    let k2x = v0 + &k1v * (dt / 2.0);
    let k2v = at(&x2, &k2x)?;
    let x3 = &x0 + &k2x * (dt / 2.0);
    let k3x = v0 + &k2v * (dt / 2.0);
    let k3v = at(&x3, &k3x)?;
    let x4 = &x0 + &k3x * dt;
    let k4x = v0 + &k3v * dt;
    let k4v = at(&x4, &k4x)?;
    let x = &x0 + (k1x + &k2x * 2.0 + &k3x * 2.0 + &k4x) * (dt / 6.0);
    let v = v0 + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
    Ok(CurveState {
        position: chart.point_at(&state.position, &x),
        velocity: v,
    })
}

/// `steps` RK4 steps; the result includes the initial state.
pub fn integrate_geodesic(
    chart: &Chart,
    start: &CurveState,
    dt: f64,
    steps: usize,
) -> Result<Vec<CurveState>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start.clone());
    for _ in 0..steps {
        let next = geodesic_step(chart, out.last().expect("nonempty"), dt)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn straight_line_in_flat_chart() {
        let c = Chart::euclidean("r2", &["x", "y"]);
        let s = CurveState::new(Point::new().with("x", 0.0).with("y", 1.0), vec![0.5, -1.0]);
        let n = geodesic_step(&c, &s, 0.1).unwrap();
        assert_eq!(n.velocity, s.velocity);
        assert!((n.position.get("x").unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn equator_stays_put() {
        let c = Chart::diagonal(
            "s2",
            vec!["th".into(), "ph".into()],
            vec![parse("1").unwrap(), parse("sin(th)^2").unwrap()],
        )
        .unwrap();
        let s = CurveState::new(Point::new().with("th", FRAC_PI_2).with("ph", 0.0), vec![0.0, 1.0]);
        let path = integrate_geodesic(&c, &s, 1e-3, 1000).unwrap();
        for st in &path {
            assert!((st.position.get("th").unwrap() - FRAC_PI_2).abs() < 1e-8);
        }
    }

    #[test]
    fn hyperbolic_time_ray() {
        let c = Chart::diagonal(
            "h2",
            vec!["t".into(), "x".into()],
            vec![parse("1").unwrap(), parse("exp(2*t)").unwrap()],
        )
        .unwrap();
        let s = CurveState::new(Point::new().with("t", 0.0).with("x", 0.7), vec![1.0, 0.0]);
        let path = integrate_geodesic(&c, &s, 1e-3, 500).unwrap();
        let last = path.last().unwrap();
        assert_eq!(last.position.get("x"), Some(0.7));
        assert!((last.position.get("t").unwrap() - 0.5).abs() < 1e-12);
        assert!(geodesic_step(&c, &s, 0.0).is_err());
    }
}
