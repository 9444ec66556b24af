//! Doubly warped products `M = _{f2}M1 x_{f1} M2` and doubly warped
//! space-times `_f I x_sigma M`.
//!
//! The crate has two independent routes to every geometric quantity:
//!
//! * [`geometry`] is a brute-force tensor calculus over a single coordinate
//!   chart. It knows nothing about warped products and serves as the oracle.
//! * [`warped`], [`spacetime`] and [`soliton`] evaluate the closed-form
//!   connection, curvature, Lie-derivative and soliton identities of warped
//!   geometry from factor-level data only.
//!
//! Checks sample points deterministically from a [`geometry::SamplePlan`],
//! compare the two routes and return residual reports. The [`scenario`]
//! module drives suites of such checks from TOML files.

pub mod error;
pub mod expr;
pub mod geometry;
pub mod report;
pub mod scenario;
pub mod soliton;
pub mod spacetime;
pub mod warped;

pub use error::{Error, Result};
pub use expr::{parse, Point, ScalarExpr};
pub use geometry::{Chart, SamplePlan, VectorField};
pub use report::{ClassificationReport, SolitonCertificate, Track, Verdict};
