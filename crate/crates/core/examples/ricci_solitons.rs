//! Ricci solitons on warped space-times: the Gaussian soliton on Minkowski
//! space and the reduced identities on de Sitter.

use warpcert::geometry::{Chart, SamplePlan, VectorField};
use warpcert::parse;
use warpcert::soliton::{fitted_lambda, homothetic_lambda_report, soliton_check, th2_checks, SolitonCase};
use warpcert::spacetime::{DoublyWarpedSpacetime, SpacetimeField};

fn main() -> warpcert::Result<()> {
    let plan = SamplePlan::new([("x", (-1.0, 1.0)), ("y", (-1.0, 1.0))], 20, 5).with_tol(1e-8);
    let r2 = Chart::euclidean("r2", &["x", "y"]);

    // Minkowski with zeta = t d_t + x d_x + y d_y: (1/2) L g = g, Ric = 0.
    let mink = DoublyWarpedSpacetime::new(r2.clone(), parse("1")?, parse("1")?, (-1.0, 1.0))?;
    let gauss = SpacetimeField::new(parse("t")?, VectorField::parse([("x", "x"), ("y", "y")])?);
    let case = SolitonCase::new(mink, gauss, 1.0)?;
    let cert = soliton_check(&case, &plan)?;
    println!("gaussian soliton: {} (worst {:.1e})", cert.verdict.as_str(), cert.worst_residual);
    let p = warpcert::Point::from_pairs([("t", 0.2), ("x", 0.3), ("y", 0.4)]);
    println!("fitted lambda at p: {:.12}", fitted_lambda(&case, &p)?.0);

    // de Sitter in flat slicing, steady with a Killing field: lambda = 2.
    let ds = DoublyWarpedSpacetime::new(r2, parse("1")?, parse("exp(t)")?, (-1.0, 1.0))?;
    let killing = SpacetimeField::new(parse("1")?, VectorField::parse([("x", "-x"), ("y", "-y")])?);
    let case = SolitonCase::new(ds, killing, 2.0)?;
    let th2 = th2_checks(&case, &plan)?;
    println!("reduced identities: {}", th2.verdict.as_str());
    for t in &th2.tracks {
        println!("  {:<28} {:<5} {:.2e}", t.name, if t.passed { "ok" } else { "off" }, t.worst);
    }
    for f in &th2.flags {
        println!("  flag: {f}");
    }
    let hl = homothetic_lambda_report(&case, 0.0, &plan)?;
    println!("homothetic lambda ~ {:.12}", hl.derived["lambda_predicted_mean"]);
    Ok(())
}
