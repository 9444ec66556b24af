//! Lie derivatives and conformal tests on a doubly warped space-time.

use warpcert::geometry::{Chart, SamplePlan, VectorField};
use warpcert::parse;
use warpcert::spacetime::{
    killing_decomposition_check, lie_spacetime_report, timelike_conformal_check, DoublyWarpedSpacetime,
    SpacetimeField,
};

fn main() -> warpcert::Result<()> {
    // -dt^2 + e^{2t}(dx^2 + dy^2): flat slicing of de Sitter.
    let st = DoublyWarpedSpacetime::new(Chart::euclidean("r2", &["x", "y"]), parse("1")?, parse("exp(t)")?, (-1.0, 1.0))?;
    let plan = SamplePlan::new([("x", (-1.0, 1.0)), ("y", (-1.0, 1.0))], 20, 3).with_tol(1e-8);

    let zeta = SpacetimeField::new(parse("1")?, VectorField::parse([("x", "-x"), ("y", "-y")])?);
    let lie = lie_spacetime_report(&st, &zeta, &plan)?;
    println!("Lie closed form vs oracle: {} ({:.1e})", lie.verdict.as_str(), lie.worst_residual);

    let k = killing_decomposition_check(&st, &zeta, &plan)?;
    println!("d_t - x d_x - y d_y: {}", k.verdict.as_str());

    // h d_t is conformal here only when h is proportional to sigma.
    for h in ["exp(t)", "1", "t"] {
        let r = timelike_conformal_check(&st, &parse(h)?, &plan)?;
        println!("h = {h:<7} {}", r.verdict.as_str());
    }
    Ok(())
}
