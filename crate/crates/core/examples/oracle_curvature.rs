//! Brute-force curvature of the round 2-sphere from its metric alone.

use std::f64::consts::PI;

use warpcert::geometry::{christoffel, metric_at, ricci, riemann, Chart};
use warpcert::{parse, Point};

fn main() -> warpcert::Result<()> {
    let s2 = Chart::diagonal("s2", vec!["th".into(), "ph".into()], vec![parse("1")?, parse("sin(th)^2")?])?;
    let p = Point::from_pairs([("th", PI / 3.0), ("ph", 0.4)]);

    let gamma = christoffel(&s2, &p)?;
    println!("Gamma^th_ph,ph = {:.12}  (-sin cos = {:.12})", gamma.get(0, 1, 1), -(PI / 3.0).sin() * (PI / 3.0).cos());
    println!("R_th,ph,th,ph  = {:.12}", riemann(&s2, &p)?.get(0, 1, 0, 1));

    // Ric = g on the unit sphere.
    let diff = ricci(&s2, &p)? - metric_at(&s2, &p)?;
    println!("|Ric - g|      = {:.3e}", diff.amax());
    Ok(())
}
