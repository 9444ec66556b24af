//! Integrate a geodesic on the sphere with RK4 and check it against the
//! warped-product geodesic equations; then test a curve that is not one.

use std::f64::consts::PI;

use warpcert::geometry::{integrate_geodesic, Chart, CurveState};
use warpcert::parse;
use warpcert::warped::{central_accelerations, curve_report, geodesic_report, DoublyWarpedProduct};
use warpcert::Point;

fn main() -> warpcert::Result<()> {
    let w = DoublyWarpedProduct::singly(Chart::euclidean("th", &["th"]), Chart::euclidean("ph", &["ph"]), parse("sin(th)")?)?;
    let start = CurveState::new(Point::from_pairs([("th", 1.2), ("ph", 0.0)]), vec![0.3, 0.8]);

    let path = integrate_geodesic(w.chart(), &start, 0.01, 200)?;
    let (s0, s1) = (start.speed_squared(w.chart())?, path.last().unwrap().speed_squared(w.chart())?);
    println!("speed^2 drift over 200 steps: {:.2e}", (s1 - s0).abs());

    let r = geodesic_report(&w, &start, 0.01, 200, 1e-5)?;
    println!("RK4 geodesic:         {} (worst {:.2e})", r.verdict.as_str(), r.worst_residual);

    // th = pi/2 + 0.1 s, ph = s leaves the equator at an angle: not a geodesic.
    let dt = 0.01;
    let curve: Vec<CurveState> = (0..=100)
        .map(|i| {
            let s = i as f64 * dt;
            CurveState::new(Point::from_pairs([("th", PI / 2.0 + 0.1 * s), ("ph", s)]), vec![0.1, 1.0])
        })
        .collect();
    let r = curve_report(&w, &curve, &central_accelerations(&curve, dt), 1e-5)?;
    println!("tilted great-circle?: {} (worst {:.2e})", r.verdict.as_str(), r.worst_residual);
    Ok(())
}
