//! Earlier lower bounds on the MAP error, for comparison and cross-checks.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::curve::format_sig;
use crate::error::{Error, Result};
use crate::expectation::{expect, expect_given, Estimate, ExpectationConfig};
use crate::holder::{bound_b1, bound_b2, PExponent};
use crate::model::{map_error, HypothesisProblem};
use crate::numerics::{log_sum_exp, power_sum_pow};

const GAUSS_SIN_SCALE: f64 = 0.395;
const GAUSS_SIN_ALPHA: f64 = 1.8063;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicBound {
    /// `(1/8) e^{-J/2}` with the divergence `J` between the two conditional laws.
    Divergence,
    /// `E²[√(P₁P₂)] / (8 π₁ π₂)`.
    Blb1,
    /// `½ - ½ √(1 - 4 E²[√(P₁P₂)])`.
    Blb2,
    /// `½ - ½ √(1 - E[(4P₁P₂)^L])`, `L >= 1`.
    FDiv { l: f64 },
    /// `E[P₁P₂]`.
    Harmonic,
    /// `½ - ½ (E|P₁ - P₂|^α)^{1/α}`, `α >= 1`.
    JAlpha { alpha: f64 },
    /// `0.395 E[sin(πP₁) e^{-1.8063 (P₁ - ½)²}]`.
    GaussSin,
    /// `(1/α) E[ln((1 + e^{-α}) / (e^{-αP₁} + e^{-αP₂}))]`, `α > 0`.
    Atlb { alpha: f64 },
    /// `((M-1)/M) (1 - √((M S - 1)/(M - 1)))` with `S = E[Σ P_i²]`.
    Bayes1,
    /// `1 - √S`.
    Bayes2,
    /// `1 - E[√(Σ P_i²)]`.
    Bayes3,
    /// `½ - ½ S`.
    Quad,
    /// `((M-1)/M^{M-1}) (E[Π P_i^{1/M}])^M`.
    Matusita,
    /// `1 - G^{1/(αβ)}`, `G = E[(Σ P_i^β)^α]`, `α > 0`, `β > 1`, `1/α <= β`.
    Gmd1 { alpha: f64, beta: f64 },
    /// `1 - G`, `α > 0`, `1 < β <= 1/α`.
    Gmd2 { alpha: f64, beta: f64 },
}

impl ClassicBound {
    /// Parameter-free members plus the default parameterised ones.
    pub fn catalog() -> Vec<ClassicBound> {
        use ClassicBound::*;
        vec![
            Divergence,
            Blb1,
            Blb2,
            FDiv { l: 1.0 },
            Harmonic,
            JAlpha { alpha: 1.0 },
            JAlpha { alpha: 2.0 },
            GaussSin,
            Atlb { alpha: 5.0 },
            Bayes1,
            Bayes2,
            Bayes3,
            Quad,
            Matusita,
            Gmd1 { alpha: 1.0, beta: 2.0 },
            Gmd2 { alpha: 0.5, beta: 2.0 },
        ]
    }

    pub fn name(&self) -> &'static str {
        use ClassicBound::*;
        match self {
            Divergence => "Divergence",
            Blb1 => "BLB1",
            Blb2 => "BLB2",
            FDiv { .. } => "FDiv",
            Harmonic => "Harmonic",
            JAlpha { .. } => "JAlpha",
            GaussSin => "GaussSin",
            Atlb { .. } => "ATLB",
            Bayes1 => "Bayes1",
            Bayes2 => "Bayes2",
            Bayes3 => "Bayes3",
            Quad => "Quad",
            Matusita => "Matusita",
            Gmd1 { .. } => "GMD1",
            Gmd2 { .. } => "GMD2",
        }
    }

    /// `key=value` list, space separated; empty when there are no parameters.
    pub fn params(&self) -> String {
        use ClassicBound::*;
        match *self {
            FDiv { l } => format!("L={}", format_sig(l)),
            JAlpha { alpha } | Atlb { alpha } => format!("alpha={}", format_sig(alpha)),
            Gmd1 { alpha, beta } | Gmd2 { alpha, beta } => {
                format!("alpha={} beta={}", format_sig(alpha), format_sig(beta))
            }
            _ => String::new(),
        }
    }

    /// Whether the bound is only defined for two hypotheses.
    pub fn binary_only(&self) -> bool {
        use ClassicBound::*;
        matches!(
            self,
            Divergence | Blb1 | Blb2 | FDiv { .. } | Harmonic | JAlpha { .. } | GaussSin | Atlb { .. }
        )
    }

    /// Whether the bound also requires equal priors.
    pub fn needs_equal_priors(&self) -> bool {
        matches!(self, ClassicBound::Divergence | ClassicBound::Blb1)
    }

    /// Whether the bound is defined for this problem.
    pub fn applicable(&self, problem: &HypothesisProblem) -> bool {
        self.check_problem(problem).is_ok() && self.check_params().is_ok()
    }

    pub fn check_params(&self) -> Result<()> {
        use ClassicBound::*;
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        match *self {
            FDiv { l } if !(l.is_finite() && l >= 1.0) => bad("L", l, "must be at least 1"),
            JAlpha { alpha } if !(alpha.is_finite() && alpha >= 1.0) => {
                bad("alpha", alpha, "must be at least 1")
            }
            Atlb { alpha } if !(alpha.is_finite() && alpha > 0.0) => bad("alpha", alpha, "must be positive"),
            Gmd1 { alpha, beta } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    bad("alpha", alpha, "must be positive")
                } else if !(beta.is_finite() && beta > 1.0 && 1.0 / alpha <= beta) {
                    bad("beta", beta, "must satisfy beta > 1 and beta >= 1/alpha")
                } else {
                    Ok(())
                }
            }
            Gmd2 { alpha, beta } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    bad("alpha", alpha, "must be positive")
                } else if !(beta.is_finite() && beta > 1.0 && beta <= 1.0 / alpha) {
                    bad("beta", beta, "must satisfy 1 < beta <= 1/alpha")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn check_problem(&self, problem: &HypothesisProblem) -> Result<()> {
        let m = problem.num_hypotheses();
        if self.binary_only() && m != 2 {
            return Err(Error::Unsupported(format!("{} needs M = 2, got M = {m}", self.name())));
        }
        if self.needs_equal_priors() && !problem.priors().is_uniform() {
            return Err(Error::Unsupported(format!("{} needs equal priors", self.name())));
        }
        Ok(())
    }
}

impl fmt::Display for ClassicBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{} {}", self.name(), params)
        }
    }
}

/// Evaluate one classic bound.
pub fn evaluate_classic(
    problem: &HypothesisProblem,
    spec: ClassicBound,
    config: &ExpectationConfig,
) -> Result<Estimate> {
    use ClassicBound::*;
    spec.check_params()?;
    spec.check_problem(problem)?;
    let m = problem.num_hypotheses() as f64;
    match spec {
        Divergence => divergence(problem, config),
        Blb1 => {
            let bc = bhattacharyya(problem, config)?;
            let pi = problem.priors().as_slice();
            let denom = 8.0 * pi[0] * pi[1];
            Ok(bc.transformed(bc.value * bc.value / denom, 2.0 * bc.value / denom))
        }
        Blb2 => {
            let bc = bhattacharyya(problem, config)?;
            Ok(bc.map_value(|b| 0.5 - 0.5 * (1.0 - 4.0 * b * b).max(0.0).sqrt()))
        }
        FDiv { l } => {
            let e = expect(problem, |_, p| (4.0 * p[0] * p[1]).powf(l), config)?;
            Ok(e.map_value(|v| 0.5 - 0.5 * (1.0 - v).max(0.0).sqrt()))
        }
        Harmonic => expect(problem, |_, p| p[0] * p[1], config),
        JAlpha { alpha } => {
            let e = expect(problem, |_, p| (p[0] - p[1]).abs().powf(alpha), config)?;
            if alpha == 1.0 {
                Ok(e.transformed(0.5 - 0.5 * e.value, 0.5))
            } else {
                Ok(e.map_value(|j| 0.5 - 0.5 * j.max(0.0).powf(1.0 / alpha)))
            }
        }
        GaussSin => expect(
            problem,
            |_, p| {
                let d = p[0] - 0.5;
                GAUSS_SIN_SCALE * (std::f64::consts::PI * p[0]).sin() * (-GAUSS_SIN_ALPHA * d * d).exp()
            },
            config,
        ),
        Atlb { alpha } => {
            let head = (-alpha).exp().ln_1p();
            expect(
                problem,
                |_, p| (head - log_sum_exp(&[-alpha * p[0], -alpha * p[1]])) / alpha,
                config,
            )
        }
        Bayes1 => {
            let s = squared_norm(problem, config)?;
            Ok(s.map_value(|s| {
                let inner = ((m * s - 1.0) / (m - 1.0)).clamp(0.0, 1.0);
                (m - 1.0) / m * (1.0 - inner.sqrt())
            }))
        }
        Bayes2 => {
            let s = squared_norm(problem, config)?;
            Ok(s.map_value(|s| 1.0 - s.sqrt()))
        }
        Bayes3 => expect(problem, |_, p| 1.0 - power_sum_pow(p, 2.0, 0.5), config),
        Quad => {
            let s = squared_norm(problem, config)?;
            Ok(s.transformed(0.5 - 0.5 * s.value, 0.5))
        }
        Matusita => {
            let e = expect(
                problem,
                |_, p| {
                    let log_mean: f64 = p.iter().map(|v| v.ln()).sum::<f64>() / m;
                    log_mean.exp()
                },
                config,
            )?;
            let log_scale = (m - 1.0).ln() - (m - 1.0) * m.ln();
            Ok(e.map_value(|a| (log_scale + m * a.ln()).exp()))
        }
        Gmd1 { alpha, beta } => {
            let g = general_mean_distance(problem, alpha, beta, config)?;
            Ok(g.map_value(|g| 1.0 - g.powf(1.0 / (alpha * beta))))
        }
        Gmd2 { alpha, beta } => {
            let g = general_mean_distance(problem, alpha, beta, config)?;
            Ok(g.transformed(1.0 - g.value, 1.0))
        }
    }
}

fn bhattacharyya(problem: &HypothesisProblem, config: &ExpectationConfig) -> Result<Estimate> {
    expect(problem, |_, p| (p[0] * p[1]).sqrt(), config)
}

fn squared_norm(problem: &HypothesisProblem, config: &ExpectationConfig) -> Result<Estimate> {
    expect(problem, |_, p| p.iter().map(|v| v * v).sum(), config)
}

fn general_mean_distance(
    problem: &HypothesisProblem,
    alpha: f64,
    beta: f64,
    config: &ExpectationConfig,
) -> Result<Estimate> {
    expect(problem, |_, p| power_sum_pow(p, beta, alpha), config)
}

/// `J = E[ln L | θ₁] - E[ln L | θ₂]` with `L = f(x|θ₁)/f(x|θ₂)`. With equal
/// priors `ln L` is the posterior log ratio. A zero posterior of positive
/// conditional mass makes `J` infinite and the bound 0.
fn divergence(problem: &HypothesisProblem, config: &ExpectationConfig) -> Result<Estimate> {
    let infinite = AtomicBool::new(false);
    let log_ratio = |_, p: &[f64]| {
        let v = p[0].ln() - p[1].ln();
        if v.is_finite() {
            v
        } else {
            infinite.store(true, Ordering::Relaxed);
            0.0
        }
    };
    let first = expect_given(problem, 0, log_ratio, config)?;
    let second = expect_given(problem, 1, log_ratio, config)?;
    if infinite.load(Ordering::Relaxed) {
        return Ok(Estimate::degenerate(0.0, first.evaluations + second.evaluations));
    }
    let j = first.value - second.value;
    let value = 0.125 * (-j / 2.0).exp();
    let slope = -value / 2.0;
    Ok(Estimate::combined(value, (&first, slope), (&second, -slope)))
}

/// One row of a bound comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub name: String,
    pub params: String,
    pub result: Result<Estimate>,
}

impl ComparisonRow {
    pub fn value(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|e| e.value)
    }
}

/// Evaluate the MAP error, `B_p^(1)` and `B_p^(2)` at each `p`, and every
/// classic bound in `specs`. Rows are sorted by value, largest first; failed
/// entries keep their error and go last.
pub fn compare_all(
    problem: &HypothesisProblem,
    specs: &[ClassicBound],
    p_values: &[f64],
    config: &ExpectationConfig,
) -> Vec<ComparisonRow> {
    let mut rows = vec![ComparisonRow {
        name: "map".into(),
        params: String::new(),
        result: map_error(problem, config),
    }];
    for &p in p_values {
        let pe = PExponent::new(p);
        rows.push(ComparisonRow {
            name: "b1".into(),
            params: format!("p={}", format_sig(p)),
            result: pe.clone().and_then(|pe| bound_b1(problem, pe, config)),
        });
        rows.push(ComparisonRow {
            name: "b2".into(),
            params: format!("p={}", format_sig(p)),
            result: pe.and_then(|pe| bound_b2(problem, pe, config)),
        });
    }
    for spec in specs {
        rows.push(ComparisonRow {
            name: spec.name().into(),
            params: spec.params(),
            result: evaluate_classic(problem, *spec, config),
        });
    }
    rows.sort_by(|a, b| match (a.value(), b.value()) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiscreteProblem, PriorVector};

    fn cfg() -> ExpectationConfig {
        ExpectationConfig::default()
    }

    fn uniform_posteriors(m: usize) -> HypothesisProblem {
        DiscreteProblem::new(PriorVector::uniform(m).unwrap(), vec![vec![0.3; m], vec![0.7; m]])
            .unwrap()
            .into()
    }

    fn binary() -> HypothesisProblem {
        DiscreteProblem::new(
            PriorVector::uniform(2).unwrap(),
            vec![vec![0.6, 0.1], vec![0.3, 0.3], vec![0.1, 0.6]],
        )
        .unwrap()
        .into()
    }

    #[test]
    fn blb2_is_tight_on_uniform_posteriors() {
        let v = evaluate_classic(&uniform_posteriors(2), ClassicBound::Blb2, &cfg()).unwrap().value;
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bayes2_on_ternary_uniform() {
        let v = evaluate_classic(&uniform_posteriors(3), ClassicBound::Bayes2, &cfg()).unwrap().value;
        assert!((v - (1.0 - 3f64.powf(-0.5))).abs() < 1e-12);
    }

    #[test]
    fn binary_only_bounds_reject_ternary() {
        for spec in ClassicBound::catalog().into_iter().filter(|s| s.binary_only()) {
            let r = evaluate_classic(&uniform_posteriors(3), spec, &cfg());
            match r {
                Err(Error::Unsupported(msg)) => assert!(msg.contains(spec.name())),
                other => panic!("{spec}: {other:?}"),
            }
        }
    }

    #[test]
    fn parameter_ranges() {
        let pr = binary();
        for spec in [
            ClassicBound::FDiv { l: 0.5 },
            ClassicBound::JAlpha { alpha: 0.5 },
            ClassicBound::Atlb { alpha: 0.0 },
            ClassicBound::Gmd1 { alpha: 0.25, beta: 2.0 },
            ClassicBound::Gmd2 { alpha: 1.0, beta: 2.0 },
        ] {
            assert!(
                matches!(evaluate_classic(&pr, spec, &cfg()), Err(Error::InvalidParameter { .. })),
                "{spec}"
            );
        }
    }

    #[test]
    fn unequal_priors_are_rejected_where_needed() {
        let pr: HypothesisProblem = DiscreteProblem::new(
            PriorVector::new(vec![0.2, 0.8]).unwrap(),
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap()
        .into();
        assert!(matches!(evaluate_classic(&pr, ClassicBound::Blb1, &cfg()), Err(Error::Unsupported(_))));
        assert!(evaluate_classic(&pr, ClassicBound::Blb2, &cfg()).is_ok());
    }

    #[test]
    fn divergence_hand_value() {
        // Likelihoods (0.6,0.3,0.1) vs (0.1,0.3,0.6): J = 2·0.5·ln 6.
        let v = evaluate_classic(&binary(), ClassicBound::Divergence, &cfg()).unwrap().value;
        let j = 0.5 * 6f64.ln() * 2.0;
        assert!((v - 0.125 * (-j / 2.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn divergence_degenerates_on_disjoint_supports() {
        let pr: HypothesisProblem = DiscreteProblem::new(
            PriorVector::uniform(2).unwrap(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
        .into();
        let e = evaluate_classic(&pr, ClassicBound::Divergence, &cfg()).unwrap();
        assert!(e.degenerate && e.value == 0.0);
    }

    #[test]
    fn bayes1_matches_jalpha_two() {
        let pr = binary();
        let a = evaluate_classic(&pr, ClassicBound::Bayes1, &cfg()).unwrap().value;
        let b = evaluate_classic(&pr, ClassicBound::JAlpha { alpha: 2.0 }, &cfg()).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn matusita_uniform_posteriors() {
        // ((M-1)/M^{M-1}) (1/M)^M for constant posteriors 1/M.
        for m in 2..6 {
            let v = evaluate_classic(&uniform_posteriors(m), ClassicBound::Matusita, &cfg()).unwrap().value;
            let mf = m as f64;
            assert!((v - (mf - 1.0) / mf.powf(2.0 * mf - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn atlb_and_gauss_sin_sit_below_map() {
        let pr = binary();
        let map = map_error(&pr, &cfg()).unwrap().value;
        for spec in [ClassicBound::GaussSin, ClassicBound::Atlb { alpha: 25.0 }] {
            let v = evaluate_classic(&pr, spec, &cfg()).unwrap().value;
            assert!(v <= map + 1e-12, "{spec}: {v} > {map}");
        }
    }

    #[test]
    fn comparison_is_sorted_and_keeps_failures() {
        let rows = compare_all(
            &uniform_posteriors(2),
            &ClassicBound::catalog(),
            &[2.0, 0.5],
            &cfg(),
        );
        let values: Vec<f64> = rows.iter().filter_map(|r| r.value()).collect();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        assert!((values[0] - 0.5).abs() < 1e-12);
        assert!(values.iter().all(|&v| v <= 0.5 + 1e-12));
        let failed = rows.iter().filter(|r| r.result.is_err()).count();
        assert_eq!(failed, 2);
        assert!(rows.last().unwrap().result.is_err());
    }
}
