//! A single selectable quantity: the MAP error or any implemented bound.

use std::fmt;

use crate::classic::{evaluate_classic, ClassicBound};
use crate::curve::format_sig;
use crate::error::Result;
use crate::expectation::{Estimate, ExpectationConfig};
use crate::holder::{general_bound_zeta1, general_bound_zeta2, HolderBound, PExponent, TermClass};
use crate::model::{map_error, HypothesisProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSpec {
    Map,
    Holder { kind: HolderBound, p: PExponent },
    /// General ζ-class bound with `ζ ≡ 1`.
    Zeta { class: TermClass, p: PExponent },
    Classic(ClassicBound),
}

impl BoundSpec {
    /// Identifier used on the command line and in CSV output.
    pub fn label(&self) -> String {
        match self {
            BoundSpec::Map => "map".into(),
            BoundSpec::Holder { kind, .. } => kind.name().into(),
            BoundSpec::Zeta { class: TermClass::First, .. } => "zeta1".into(),
            BoundSpec::Zeta { class: TermClass::Second, .. } => "zeta2".into(),
            BoundSpec::Classic(c) => format!("classic:{}", c.name()),
        }
    }

    pub fn params(&self) -> String {
        match self {
            BoundSpec::Map => String::new(),
            BoundSpec::Holder { p, .. } | BoundSpec::Zeta { p, .. } => format!("p={}", format_sig(p.value())),
            BoundSpec::Classic(c) => c.params(),
        }
    }

    pub fn is_upper(&self) -> bool {
        matches!(self, BoundSpec::Holder { kind, .. } if kind.is_upper())
    }

    /// Replace the exponent of a p-parameterised bound.
    pub fn with_p(self, p: PExponent) -> Option<Self> {
        match self {
            BoundSpec::Holder { kind, .. } => Some(BoundSpec::Holder { kind, p }),
            BoundSpec::Zeta { class, .. } => Some(BoundSpec::Zeta { class, p }),
            _ => None,
        }
    }

    /// Replace the `α` of a classic bound that has one.
    pub fn with_alpha(self, alpha: f64) -> Option<Self> {
        use ClassicBound::*;
        let c = match self {
            BoundSpec::Classic(c) => c,
            _ => return None,
        };
        let c = match c {
            JAlpha { .. } => JAlpha { alpha },
            Atlb { .. } => Atlb { alpha },
            Gmd1 { beta, .. } => Gmd1 { alpha, beta },
            Gmd2 { beta, .. } => Gmd2 { alpha, beta },
            _ => return None,
        };
        Some(BoundSpec::Classic(c))
    }

    pub fn evaluate(&self, problem: &HypothesisProblem, config: &ExpectationConfig) -> Result<Estimate> {
        match *self {
            BoundSpec::Map => map_error(problem, config),
            BoundSpec::Holder { kind, p } => kind.evaluate(problem, p, config),
            BoundSpec::Zeta { class: TermClass::First, p } => general_bound_zeta1(problem, p, |_| 1.0, config),
            BoundSpec::Zeta { class: TermClass::Second, p } => general_bound_zeta2(problem, p, |_| 1.0, config),
            BoundSpec::Classic(c) => evaluate_classic(problem, c, config),
        }
    }
}

impl fmt::Display for BoundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.label())
        } else {
            write!(f, "{} {}", self.label(), params)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_and_parameters() {
        let p = PExponent::new(2.0).unwrap();
        let b = BoundSpec::Holder { kind: HolderBound::B1, p };
        assert_eq!(b.to_string(), "b1 p=2");
        let g = BoundSpec::Classic(ClassicBound::Gmd1 { alpha: 1.0, beta: 2.0 });
        assert_eq!(g.to_string(), "classic:GMD1 alpha=1 beta=2");
        assert_eq!(BoundSpec::Map.to_string(), "map");
        let q = PExponent::new(1.5).unwrap();
        assert_eq!(b.with_p(q).unwrap().params(), "p=1.5");
        assert!(BoundSpec::Map.with_p(q).is_none());
        assert_eq!(
            BoundSpec::Classic(ClassicBound::Atlb { alpha: 5.0 }).with_alpha(1.0),
            Some(BoundSpec::Classic(ClassicBound::Atlb { alpha: 1.0 }))
        );
    }
}
