//! Concurrent vector fields on two-dimensional doubly warped space-times:
//! the three solution families, then a seeded certification of each.

use warpcert::geometry::SamplePlan;
use warpcert::spacetime::{certify_families, render_families, solve_concurrent_2d};

fn main() -> warpcert::Result<()> {
    let solution = solve_concurrent_2d();
    print!("{}", render_families(&solution));
    for r in &solution.rejected {
        println!("rejected {}: {}", r.branch, r.reason);
    }

    let plan = SamplePlan::new([("t", (2.0, 3.0))], 10, 42).with_tol(1e-8);
    for c in certify_families(&solution, 5, &plan)? {
        println!(
            "case {}: {}/{} certified, worst {:.1e}, |rho - 2| <= {:.1e}",
            c.family.case, c.passed, c.instances, c.worst_residual, c.factor_deviation
        );
    }
    Ok(())
}
