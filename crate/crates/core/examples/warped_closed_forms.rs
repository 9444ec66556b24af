//! Closed-form connection and Ricci tensor of a doubly warped product,
//! compared against the brute-force oracle on the assembled metric.

use warpcert::geometry::{Chart, SamplePlan};
use warpcert::parse;
use warpcert::warped::{connection_report, ricci_closed_form, ricci_report, DoublyWarpedProduct, SplitVectorField};
use warpcert::Point;

fn main() -> warpcert::Result<()> {
    // (e^u)^2 dv^2 + (1 + v^2)^2 du^2, i.e. f1 = e^u scales M2 and f2 = 1 + v^2 scales M1.
    let w = DoublyWarpedProduct::new(
        Chart::euclidean("u", &["u"]),
        Chart::euclidean("v", &["v"]),
        parse("exp(u)")?,
        parse("1+v^2")?,
    )?;
    println!("assembled metric: {:?}", (0..2).map(|i| w.chart().component(i, i).to_string()).collect::<Vec<_>>());

    let p = Point::from_pairs([("u", 0.3), ("v", -0.7)]);
    println!("closed-form Ric at p:\n{}", ricci_closed_form(&w, &p)?);

    let plan = SamplePlan::new([("u", (-1.0, 1.0)), ("v", (-1.5, 1.5))], 25, 7).with_tol(1e-8);
    let extra = [SplitVectorField::new(
        warpcert::VectorField::parse([("u", "u^2")])?,
        warpcert::VectorField::parse([("v", "sin(v)")])?,
    )];
    for r in [connection_report(&w, &extra, &plan)?, ricci_report(&w, &plan)?] {
        println!("{:<22} {:<5} worst {:.2e} over {} samples", r.check, r.verdict.as_str(), r.worst_residual, r.samples);
    }
    Ok(())
}
