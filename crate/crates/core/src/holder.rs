//! Lower bounds on the MAP error obtained from Hölder and reverse Hölder
//! inequalities, their tightest members, Jensen simplifications, the two
//! related upper bounds, and the detector-independence identity.
//!
//! Power sums `Σ_i P_i^r` are evaluated in the log domain: with `p` close to
//! one the exponents `1/(1-p)` and `p/(p-1)` run into the thousands.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::OnceLock;

use crate::curve::BoundCurve;
use crate::error::{Error, Result};
use crate::expectation::{expect, Estimate, ExpectationConfig};
use crate::model::{DiscreteProblem, HypothesisProblem, Observation};
use crate::numerics::{log_power_sum, power_sum_pow, stable_sum};

/// Largest accepted exponent; beyond it the bounds sit at their `p → ∞`
/// limits to double precision.
pub const MAX_P: f64 = 64.0;

/// Hölder exponent `p`, with `1 < p <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 && p <= MAX_P {
            Ok(Self(p))
        } else {
            Err(Error::InvalidParameter {
                name: "p",
                value: p,
                reason: "must satisfy 1 < p <= 64",
            })
        }
    }

    /// `p = q/(q-1)`, the conjugate parameterisation.
    pub fn from_q(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q,
                reason: "must be greater than 1",
            });
        }
        Self::new(q / (q - 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `p/(p-1)`.
    pub fn conjugate(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }
}

/// Integrand of the first tightest bound at one posterior vector:
/// `(M-1)^p (Σ_i P_i^{1/(1-p)})^{1-p}`. Zero posteriors give 0.
pub fn b1_integrand(post: &[f64], p: PExponent) -> f64 {
    let p = p.value();
    let m = post.len() as f64;
    (m - 1.0).powf(p) * power_sum_pow(post, 1.0 / (1.0 - p), 1.0 - p)
}

/// Integrand of the second tightest bound: `1 - (Σ_i P_i^{p/(p-1)})^{(p-1)/p}`.
pub fn b2_integrand(post: &[f64], p: PExponent) -> f64 {
    let r = p.conjugate();
    1.0 - power_sum_pow(post, r, 1.0 / r)
}

/// `B_p^(1) = (M-1)^p E[(Σ_i P(θ_i|x)^{1/(1-p)})^{1-p}]`.
pub fn bound_b1(problem: &HypothesisProblem, p: PExponent, config: &ExpectationConfig) -> Result<Estimate> {
    expect(problem, |_, post| b1_integrand(post, p), config)
}

/// `B_p^(2) = 1 - E[(Σ_i P(θ_i|x)^{p/(p-1)})^{(p-1)/p}]`.
pub fn bound_b2(problem: &HypothesisProblem, p: PExponent, config: &ExpectationConfig) -> Result<Estimate> {
    expect(problem, |_, post| b2_integrand(post, p), config)
}

/// Jensen-simplified first bound `(M-1)^p (E[Σ_i P^{1/(1-p)}])^{1-p}`.
///
/// A zero posterior at a point of positive mass makes the inner expectation
/// infinite; the bound is then 0 and flagged degenerate.
pub fn bound_jb1(problem: &HypothesisProblem, p: PExponent, config: &ExpectationConfig) -> Result<Estimate> {
    let pv = p.value();
    let r = 1.0 / (1.0 - pv);
    let infinite = AtomicBool::new(false);
    let inner = expect(
        problem,
        |_, post| {
            let s = power_sum_logs(post, r).exp();
            if s.is_finite() {
                s
            } else {
                infinite.store(true, Ordering::Relaxed);
                0.0
            }
        },
        config,
    )?;
    if infinite.load(Ordering::Relaxed) || !inner.value.is_finite() {
        return Ok(Estimate::degenerate(0.0, inner.evaluations));
    }
    let scale = (problem.num_hypotheses() as f64 - 1.0).powf(pv);
    Ok(inner.map_value(|s| scale * s.powf(1.0 - pv)))
}

/// Jensen-simplified second bound `1 - (E[Σ_i P^{p/(p-1)}])^{(p-1)/p}`.
pub fn bound_jb2(problem: &HypothesisProblem, p: PExponent, config: &ExpectationConfig) -> Result<Estimate> {
    let r = p.conjugate();
    let inner = expect(problem, |_, post| power_sum_logs(post, r).exp(), config)?;
    Ok(inner.map_value(|s| 1.0 - s.powf(1.0 / r)))
}

fn power_sum_logs(post: &[f64], r: f64) -> f64 {
    let mut logs = smallvec::SmallVec::<[f64; 8]>::with_capacity(post.len());
    logs.extend(post.iter().map(|v| v.ln()));
    log_power_sum(&logs, r)
}

/// Records the first negative ζ value seen during an expectation.
struct ZetaGuard(OnceLock<(String, f64)>);

impl ZetaGuard {
    fn new() -> Self {
        Self(OnceLock::new())
    }

    fn eval<Z: Fn(Observation) -> f64>(&self, zeta: &Z, x: Observation) -> f64 {
        let z = zeta(x);
        if z < 0.0 {
            let _ = self.0.set((x.to_string(), z));
            0.0
        } else {
            z
        }
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some((x, value)) => Err(Error::NegativeZeta { x, value }),
            None => Ok(()),
        }
    }
}

/// First general class:
/// `(M-1)^p E^p[ζ] E^{1-p}[ζ^{p/(p-1)} Σ_i P^{1/(1-p)}]` for any `ζ >= 0`.
pub fn general_bound_zeta1<Z>(
    problem: &HypothesisProblem,
    p: PExponent,
    zeta: Z,
    config: &ExpectationConfig,
) -> Result<Estimate>
where
    Z: Fn(Observation) -> f64 + Sync,
{
    let pv = p.value();
    let r = 1.0 / (1.0 - pv);
    let guard = ZetaGuard::new();
    let first = expect(problem, |x, _| guard.eval(&zeta, x), config)?;
    let infinite = AtomicBool::new(false);
    let second = expect(
        problem,
        |x, post| {
            let z = guard.eval(&zeta, x);
            if z == 0.0 {
                return 0.0;
            }
            let log_term = p.conjugate() * z.ln() + power_sum_logs(post, r);
            let v = log_term.exp();
            if v.is_finite() {
                v
            } else {
                infinite.store(true, Ordering::Relaxed);
                0.0
            }
        },
        config,
    )?;
    guard.check()?;
    if infinite.load(Ordering::Relaxed) || !second.value.is_finite() {
        return Ok(Estimate::degenerate(0.0, first.evaluations + second.evaluations));
    }
    let scale = (problem.num_hypotheses() as f64 - 1.0).powf(pv);
    let (a, b) = (first.value, second.value);
    let value = scale * a.powf(pv) * b.powf(1.0 - pv);
    let da = scale * pv * a.powf(pv - 1.0) * b.powf(1.0 - pv);
    let db = scale * (1.0 - pv) * a.powf(pv) * b.powf(-pv);
    Ok(Estimate::combined(value, (&first, da), (&second, db)))
}

/// Second general class:
/// `1 - E^{1/p}[ζ] E^{(p-1)/p}[ζ^{1/(1-p)} Σ_i P^{p/(p-1)}]` for any `ζ >= 0`.
///
/// A ζ vanishing where the posterior sum is positive sends the second factor
/// to infinity; the (valid, vacuous) value `-inf` is returned, flagged.
pub fn general_bound_zeta2<Z>(
    problem: &HypothesisProblem,
    p: PExponent,
    zeta: Z,
    config: &ExpectationConfig,
) -> Result<Estimate>
where
    Z: Fn(Observation) -> f64 + Sync,
{
    let pv = p.value();
    let r = p.conjugate();
    let guard = ZetaGuard::new();
    let first = expect(problem, |x, _| guard.eval(&zeta, x), config)?;
    let infinite = AtomicBool::new(false);
    let second = expect(
        problem,
        |x, post| {
            let z = guard.eval(&zeta, x);
            let v = (z.ln() / (1.0 - pv) + power_sum_logs(post, r)).exp();
            if v.is_finite() {
                v
            } else {
                infinite.store(true, Ordering::Relaxed);
                0.0
            }
        },
        config,
    )?;
    guard.check()?;
    if infinite.load(Ordering::Relaxed) || !second.value.is_finite() {
        return Ok(Estimate::degenerate(f64::NEG_INFINITY, first.evaluations + second.evaluations));
    }
    let (a, b) = (first.value, second.value);
    let value = 1.0 - a.powf(1.0 / pv) * b.powf(1.0 / r);
    let da = -(1.0 / pv) * a.powf(1.0 / pv - 1.0) * b.powf(1.0 / r);
    let db = -(1.0 / r) * a.powf(1.0 / pv) * b.powf(1.0 / r - 1.0);
    Ok(Estimate::combined(value, (&first, da), (&second, db)))
}

/// Binary upper bound `2^{p-1} E[(Σ_{i=1,2} P^{1/(1-p)})^{1-p}]`.
pub fn upper_renyi(problem: &HypothesisProblem, p: PExponent, config: &ExpectationConfig) -> Result<Estimate> {
    if problem.num_hypotheses() != 2 {
        return Err(Error::Unsupported(format!(
            "upper_renyi is defined for binary problems, got M = {}",
            problem.num_hypotheses()
        )));
    }
    let pv = p.value();
    let inner = expect(problem, |_, post| power_sum_pow(post, 1.0 / (1.0 - pv), 1.0 - pv), config)?;
    let factor = 2f64.powf(pv - 1.0);
    Ok(inner.transformed(factor * inner.value, factor))
}

/// General-mean-distance upper bound
/// `1 - M^{(1-p)/p} E[(Σ_i P^{p/(p-1)})^{(p-1)/p}]`.
pub fn upper_gmd3(problem: &HypothesisProblem, p: PExponent, config: &ExpectationConfig) -> Result<Estimate> {
    let r = p.conjugate();
    let pv = p.value();
    let inner = expect(problem, |_, post| power_sum_pow(post, r, 1.0 / r), config)?;
    let factor = (problem.num_hypotheses() as f64).powf((1.0 - pv) / pv);
    Ok(inner.transformed(1.0 - factor * inner.value, factor))
}

/// Which side of the Hölder pair a detector-term check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermClass {
    /// `E[|u·v_1|]`, predicted `(M-1) E[ζ]`.
    First,
    /// `E[|(1-u)·v_2|]`, predicted `E[ζ]`.
    Second,
}

/// Evaluate the detector-dependent numerator term directly, with
/// `v(x, θ_i) = ζ(x) / P(θ_i|x)` and `u = 1{θ̂(x) ≠ θ}`, next to the value
/// predicted independently of the detector. Returns `(direct, predicted)`.
pub fn detector_term_check<D, Z>(
    problem: &DiscreteProblem,
    detector: D,
    zeta: Z,
    class: TermClass,
) -> Result<(f64, f64)>
where
    D: Fn(Observation) -> usize,
    Z: Fn(Observation) -> f64,
{
    let hp = HypothesisProblem::Discrete(problem.clone());
    let m = problem.priors().len();
    let mut direct = Vec::new();
    let mut zeta_mass = Vec::new();
    for n in 0..problem.alphabet_len() {
        let x = Observation::Symbol(n);
        let post = hp.posterior(x)?;
        if !post.is_defined() {
            continue;
        }
        if let Some(i) = post.values.iter().position(|&v| v <= 0.0) {
            return Err(Error::Precondition(format!(
                "posterior of hypothesis {i} vanishes at symbol `{}` with positive mass",
                problem.labels()[n]
            )));
        }
        let z = zeta(x);
        if z < 0.0 {
            return Err(Error::NegativeZeta {
                x: problem.labels()[n].clone(),
                value: z,
            });
        }
        let decision = detector(x);
        if decision >= m {
            return Err(Error::InvalidConfig(format!(
                "detector chose hypothesis {decision} of {m}"
            )));
        }
        for (i, &pi) in post.values.iter().enumerate() {
            let joint = post.marginal * pi;
            let v = z / pi;
            let u = if decision != i { 1.0 } else { 0.0 };
            let factor = match class {
                TermClass::First => u,
                TermClass::Second => 1.0 - u,
            };
            direct.push(joint * (factor * v).abs());
        }
        zeta_mass.push(post.marginal * z);
    }
    let expected_zeta = stable_sum(zeta_mass);
    let predicted = match class {
        TermClass::First => (m as f64 - 1.0) * expected_zeta,
        TermClass::Second => expected_zeta,
    };
    Ok((stable_sum(direct), predicted))
}

/// The p-parameterised bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderBound {
    B1,
    B2,
    Jb1,
    Jb2,
    UpperRenyi,
    UpperGmd3,
}

impl HolderBound {
    pub const ALL: [HolderBound; 6] = [
        HolderBound::B1,
        HolderBound::B2,
        HolderBound::Jb1,
        HolderBound::Jb2,
        HolderBound::UpperRenyi,
        HolderBound::UpperGmd3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HolderBound::B1 => "b1",
            HolderBound::B2 => "b2",
            HolderBound::Jb1 => "jb1",
            HolderBound::Jb2 => "jb2",
            HolderBound::UpperRenyi => "upper-renyi",
            HolderBound::UpperGmd3 => "upper-gmd3",
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, HolderBound::UpperRenyi | HolderBound::UpperGmd3)
    }

    pub fn evaluate(
        self,
        problem: &HypothesisProblem,
        p: PExponent,
        config: &ExpectationConfig,
    ) -> Result<Estimate> {
        match self {
            HolderBound::B1 => bound_b1(problem, p, config),
            HolderBound::B2 => bound_b2(problem, p, config),
            HolderBound::Jb1 => bound_jb1(problem, p, config),
            HolderBound::Jb2 => bound_jb2(problem, p, config),
            HolderBound::UpperRenyi => upper_renyi(problem, p, config),
            HolderBound::UpperGmd3 => upper_gmd3(problem, p, config),
        }
    }
}

/// Evaluate one bound over a grid of exponents. Points that fail are kept
/// in the curve as errors.
pub fn p_sweep(
    problem: &HypothesisProblem,
    kind: HolderBound,
    grid: &[f64],
    config: &ExpectationConfig,
) -> Result<BoundCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("p grid is empty".into()));
    }
    let mut curve = BoundCurve::new("p");
    for &p in grid {
        let result = PExponent::new(p).and_then(|p| kind.evaluate(problem, p, config));
        curve.push(p, kind.name(), result);
    }
    Ok(curve)
}
