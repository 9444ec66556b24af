/// What a check runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    None,
    Product,
    Spacetime,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::None => "-",
            TargetKind::Product => "product",
            TargetKind::Spacetime => "spacetime",
        }
    }
}

macro_rules! kinds {
    ($($variant:ident $name:literal $target:ident ($lo:literal, $hi:literal) [$($req:literal),*] [$($opt:literal),*] $doc:literal;)*) => {
        /// Check kinds accepted in scenario files. Each runs one operation of
        /// [`crate::warped`], [`crate::spacetime`] or [`crate::soliton`].
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum CheckKind {
            $(#[doc = $doc] $variant,)*
        }

        impl CheckKind {
            pub const ALL: &'static [CheckKind] = &[$(CheckKind::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(CheckKind::$variant => $name,)* }
            }

            pub fn target(self) -> TargetKind {
                match self { $(CheckKind::$variant => TargetKind::$target,)* }
            }

            /// Inclusive bounds on the number of fields.
            pub fn field_arity(self) -> (usize, usize) {
                match self { $(CheckKind::$variant => ($lo, $hi),)* }
            }

            pub fn required_params(self) -> &'static [&'static str] {
                match self { $(CheckKind::$variant => &[$($req),*],)* }
            }

            pub fn allowed_params(self) -> Vec<&'static str> {
                match self { $(CheckKind::$variant => vec![$($req,)* $($opt),*],)* }
            }

            pub fn description(self) -> &'static str {
                match self { $(CheckKind::$variant => $doc,)* }
            }
        }
    };
}

kinds! {
    ConnectionClosedForm "connection_closed_form" Product (0, 16) [] []
        "closed-form connection against the oracle on frame pairs and any given fields";
    RicciClosedForm "ricci_closed_form" Product (0, 0) [] []
        "closed-form Ricci tensor against the oracle";
    LieSplit "lie_split" Product (1, 1) [] []
        "split Lie derivative of the metric against the direct one";
    ClassifyConformalProduct "classify_conformal_product" Product (1, 1) [] []
        "conformal classification of a split field";
    KillingProjection "killing_projection" Product (1, 1) [] []
        "factor conformal factors of a Killing field";
    Geodesic "geodesic" Product (0, 0) [] ["dt", "steps"]
        "RK4 geodesic from `start`/`velocity`, split geodesic residuals";
    Curve "curve" Product (0, 0) [] ["dt", "steps"]
        "split geodesic residuals along `curve` (expressions in s)";
    ConstantLength "constant_length" Product (2, 2) [] []
        "D_X zeta identity and constant-length conditions for fields [zeta, X]";
    ConformalAlongCurve "conformal_along_curve" Product (2, 2) [] []
        "conformal factor along unit curves for fields [zeta, direction]";
    LieSpacetime "lie_spacetime" Spacetime (1, 1) [] []
        "space-time Lie derivative formula against the direct one";
    TimelikeConformal "timelike_conformal" Spacetime (1, 1) [] []
        "conformality of h d_t and the fit h = a sigma";
    KillingDecomposition "killing_decomposition" Spacetime (1, 1) [] []
        "Killing test with the time and space conditions";
    ConformalAlongCurveSt "conformal_along_curve_st" Spacetime (2, 2) ["normalization"] []
        "space-time conformal factor along curves for fields [zeta, V]";
    ConcurrentCheckSt "concurrent_check_st" Spacetime (1, 1) [] []
        "concurrency D_X zeta = X with the sufficient-condition checklist";
    SolveConcurrent2d "solve_concurrent_2d" None (0, 0) [] ["instances"]
        "solve the 2-dimensional concurrent system and certify each family";
    Soliton "soliton" Spacetime (1, 1) ["lambda"] []
        "direct soliton residual";
    Th2 "th2_checks" Spacetime (1, 1) ["lambda"] []
        "time and spatial identities implied by the soliton equation";
    HomotheticLambda "homothetic_lambda" Spacetime (1, 1) ["c"] ["lambda"]
        "lambda of a homothetic soliton with L g = 2c g";
    EinsteinFactor "einstein_factor" Spacetime (1, 1) ["lambda", "rho"] []
        "Einstein factor mu of the base for constant f";
    EinsteinConformalSoliton "einstein_conformal_soliton" Spacetime (1, 1) ["mu", "rho"] []
        "soliton condition for f = 1 over an Einstein base";
    ProductSolitonLift "product_soliton_lift" Spacetime (1, 1) ["lambda"] []
        "lift of a base soliton to f = sigma = 1";
}

impl CheckKind {
    pub fn from_name(name: &str) -> Option<CheckKind> {
        CheckKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in CheckKind::ALL {
            assert_eq!(CheckKind::from_name(k.name()), Some(*k));
        }
        assert_eq!(CheckKind::from_name("th2"), None);
    }
}
