use super::{Func, Node, ScalarExpr};

pub(super) fn diff(e: &ScalarExpr, var: &str) -> ScalarExpr {
    match e.node() {
        Node::Const(_) => ScalarExpr::zero(),
        Node::Var(name) if name == var => ScalarExpr::one(),
        Node::Var(_) => ScalarExpr::zero(),
        Node::Add(a, b) => diff(a, var).add(&diff(b, var)),
        Node::Sub(a, b) => diff(a, var).sub(&diff(b, var)),
        Node::Neg(a) => diff(a, var).neg(),
        Node::Mul(a, b) => diff(a, var).mul(b).add(&a.mul(&diff(b, var))),
        Node::Div(a, b) => {
            let da = diff(a, var);
            let db = diff(b, var);
            if db.is_zero() {
                return da.div(b);
            }
            da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
        }
        Node::Pow(a, r) => {
            let da = diff(a, var);
            if da.is_zero() {
                return ScalarExpr::zero();
            }
            let coeff = ScalarExpr::constant(r.to_f64());
            coeff.mul(&a.powr(r.minus_one())).mul(&da)
        }
        Node::Call(func, a) => {
            let da = diff(a, var);
            if da.is_zero() {
                return ScalarExpr::zero();
            }
            let outer = match func {
                Func::Sin => a.cos(),
                Func::Cos => a.sin().neg(),
                Func::Exp => e.clone(),
                Func::Ln => return da.div(a),
                Func::Sqrt => return da.div(&ScalarExpr::constant(2.0).mul(e)),
            };
            outer.mul(&da)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Point};

    fn at(name: &str, v: f64) -> Point {
        Point::new().with(name, v)
    }

    #[test]
    fn square() {
        let d = parse("x^2").unwrap().diff("x");
        assert_eq!(d.to_string(), "2.0*x");
    }

    #[test]
    fn exponential_at_origin() {
        let d = parse("exp(2*t)").unwrap().diff("t");
        assert_eq!(d.eval(&at("t", 0.0)).unwrap(), 2.0);
    }

    #[test]
    fn constant_and_foreign_variable() {
        assert!(parse("c").unwrap().diff("x").is_zero());
        assert!(parse("3.5").unwrap().diff("x").is_zero());
    }

    #[test]
    fn quotient_and_roots() {
        let d = parse("sqrt(x)/x").unwrap().diff("x");
        // d/dx x^{-1/2} = -1/2 x^{-3/2}
        let v = d.eval(&at("x", 4.0)).unwrap();
        assert!((v + 0.5 * 4f64.powf(-1.5)).abs() < 1e-15);
        let d = parse("ln(x^2+1)").unwrap().diff("x");
        assert!((d.eval(&at("x", 1.0)).unwrap() - 1.0).abs() < 1e-15);
    }
}
