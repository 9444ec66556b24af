//! Classifying vector fields on a warped product as Killing, homothetic,
//! conformal or none of these.

use warpcert::geometry::{Chart, SamplePlan, VectorField};
use warpcert::parse;
use warpcert::warped::{classify_conformal_product, DoublyWarpedProduct, SplitVectorField};

fn main() -> warpcert::Result<()> {
    // Flat plane in polar form: dr^2 + r^2 dph^2.
    let w = DoublyWarpedProduct::singly(Chart::euclidean("r", &["r"]), Chart::euclidean("ph", &["ph"]), parse("r")?)?;
    let plan = SamplePlan::new([("r", (0.5, 2.0)), ("ph", (0.0, 6.0))], 20, 1).with_tol(1e-8);

    let cases = [
        ("rotation d_ph", SplitVectorField::new(VectorField::zero(), VectorField::parse([("ph", "1")])?)),
        ("dilation r d_r", SplitVectorField::new(VectorField::parse([("r", "r")])?, VectorField::zero())),
        ("d_r", SplitVectorField::new(VectorField::parse([("r", "1")])?, VectorField::zero())),
    ];
    for (name, zeta) in &cases {
        let r = classify_conformal_product(&w, zeta, &plan)?;
        let rho = r.derived.get("rho_mean").map_or(String::new(), |v| format!("  rho ~ {v:.6}"));
        println!("{name:<16} {:<11}{rho}", r.verdict.as_str());
    }
    Ok(())
}
