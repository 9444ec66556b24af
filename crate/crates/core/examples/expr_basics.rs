//! Parse, differentiate and evaluate a scalar expression.

use warpcert::{parse, Point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse("exp(t)*sin(x)^2 + x/3")?;
    let df = f.diff("x");
    println!("f      = {f}");
    println!("df/dx  = {df}");

    let p = Point::from_pairs([("t", 0.5), ("x", 1.2)]);
    println!("f(p)   = {:.12}", f.eval(&p)?);
    println!("f_x(p) = {:.12}", df.eval(&p)?);

    // Rendered expressions parse back to the same function.
    let back = parse(&df.to_string())?;
    assert_eq!(back.eval(&p)?, df.eval(&p)?);
    Ok(())
}
