//! Fixtures shared by the integration tests and the acceptance runner.

#![allow(dead_code)]

use std::f64::consts::PI;

use warpcert::geometry::{Chart, SamplePlan, VectorField};
use warpcert::warped::{DoublyWarpedProduct, SplitVectorField};
use warpcert::{parse, ScalarExpr};

pub fn e(text: &str) -> ScalarExpr {
    parse(text).unwrap()
}

pub fn line(c: &str) -> Chart {
    Chart::euclidean(c, &[c])
}

pub fn diagonal(name: &str, coords: &[&str], diag: &[&str]) -> Chart {
    Chart::diagonal(
        name,
        coords.iter().map(|c| c.to_string()).collect(),
        diag.iter().map(|d| e(d)).collect(),
    )
    .unwrap()
}

pub fn field(pairs: &[(&str, &str)]) -> VectorField {
    VectorField::parse(pairs.iter().copied()).unwrap()
}

pub fn split(a: &[(&str, &str)], b: &[(&str, &str)]) -> SplitVectorField {
    SplitVectorField::new(field(a), field(b))
}

/// A warped product with its sampling box and a few non-constant split
/// fields for probing.
pub struct Fixture {
    pub name: &'static str,
    pub product: DoublyWarpedProduct,
    pub bounds: Vec<(&'static str, (f64, f64))>,
    pub fields: Vec<SplitVectorField>,
}

impl Fixture {
    pub fn plan(&self, count: usize, seed: u64, tol: f64) -> SamplePlan {
        SamplePlan::new(self.bounds.iter().cloned(), count, seed).with_tol(tol)
    }
}

/// The five product fixtures used for the closed-form equivalence checks.
pub fn product_fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "direct product S2 x R",
            product: DoublyWarpedProduct::new(
                diagonal("s2", &["th", "ph"], &["1", "sin(th)^2"]),
                line("z"),
                e("1"),
                e("1"),
            )
            .unwrap(),
            bounds: vec![("th", (0.3, PI - 0.3)), ("ph", (0.0, 2.0 * PI)), ("z", (-2.0, 2.0))],
            fields: vec![
                split(&[("th", "sin(ph)"), ("ph", "cos(th)")], &[("z", "z^2")]),
                split(&[("ph", "1")], &[("z", "1")]),
            ],
        },
        Fixture {
            name: "hyperbolic I x_{e^t} R",
            product: DoublyWarpedProduct::singly(line("t"), line("x"), e("exp(t)")).unwrap(),
            bounds: vec![("t", (-1.0, 1.0)), ("x", (-2.0, 2.0))],
            fields: vec![split(&[("t", "t^2")], &[("x", "x")])],
        },
        Fixture {
            name: "sphere (0,pi) x_{sin th} S1",
            product: DoublyWarpedProduct::singly(line("th"), line("ph"), e("sin(th)")).unwrap(),
            bounds: vec![("th", (0.3, PI - 0.3)), ("ph", (0.0, 2.0 * PI))],
            fields: vec![split(&[("th", "cos(th)")], &[("ph", "sin(ph)")])],
        },
        Fixture {
            name: "doubly warped f1=e^u, f2=1+v^2",
            product: DoublyWarpedProduct::new(line("u"), line("v"), e("exp(u)"), e("1+v^2"))
                .unwrap(),
            bounds: vec![("u", (-1.0, 1.0)), ("v", (-1.5, 1.5))],
            fields: vec![split(&[("u", "u")], &[("v", "1+v")])],
        },
        Fixture {
            name: "1+2 doubly warped",
            product: DoublyWarpedProduct::new(
                line("s"),
                diagonal("m2", &["x", "y"], &["1", "1+x^2"]),
                e("2+sin(s)"),
                e("1+x^2+y^2/2"),
            )
            .unwrap(),
            bounds: vec![("s", (-2.0, 2.0)), ("x", (-1.0, 1.0)), ("y", (-1.0, 1.0))],
            fields: vec![
                split(&[("s", "s^2")], &[("x", "y"), ("y", "-x")]),
                split(&[("s", "1")], &[("x", "x*y")]),
            ],
        },
    ]
}
