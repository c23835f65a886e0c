//! Ziv-Zakai lower bounds on the mean-square error of a scalar Bayesian
//! estimator, built from binary detection problems between `φ` and `φ + h`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::density::{Density, Interval};
use crate::error::{Error, Result};
use crate::expectation::{density_mass, integration_window, Estimate, ExpectationConfig};
use crate::holder::{bound_b1, bound_b2, PExponent, TermClass};
use crate::model::{map_error, ContinuousProblem, HypothesisProblem, PriorVector, DENSITY_CHECK_TOL};
use crate::numerics::{linspace, CompensatedSum};

/// Prior tail mass left outside the φ window.
pub const PRIOR_TRUNCATION_MASS: f64 = 1e-8;

type ConditionalPdf = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Law of the observation given the parameter.
#[derive(Clone)]
pub enum ConditionalModel {
    /// `x = φ + n` with `n` drawn from the given density.
    Additive(Density),
    /// Arbitrary `f(x | φ)`, called as `pdf(x, φ)`, on a fixed `x` support.
    Custom { pdf: ConditionalPdf, support: Interval },
}

impl fmt::Debug for ConditionalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionalModel::Additive(d) => f.debug_tuple("Additive").field(d).finish(),
            ConditionalModel::Custom { support, .. } => {
                f.debug_struct("Custom").field("support", support).finish_non_exhaustive()
            }
        }
    }
}

impl ConditionalModel {
    /// `f(· | φ)` as a density in `x`.
    pub fn at(&self, phi: f64) -> Density {
        match self {
            ConditionalModel::Additive(noise) => noise.shifted(phi),
            ConditionalModel::Custom { pdf, support } => {
                let pdf = Arc::clone(pdf);
                Density::custom(move |x| pdf(x, phi), *support)
            }
        }
    }
}

/// Scalar Bayesian estimation model: prior `f_φ` and conditional `f(x|φ)`.
#[derive(Debug, Clone)]
pub struct EstimationProblem {
    prior: Density,
    conditional: ConditionalModel,
    window: Interval,
}

impl EstimationProblem {
    /// Checks that the prior integrates to one and that the conditional is a
    /// density in `x` at five probe values of `φ` across the prior window.
    pub fn new(prior: Density, conditional: ConditionalModel) -> Result<Self> {
        check_mass(&prior, 0)?;
        let window = integration_window(&[&prior], PRIOR_TRUNCATION_MASS)?;
        match &conditional {
            ConditionalModel::Additive(noise) => check_mass(noise, 1)?,
            ConditionalModel::Custom { .. } => {
                for phi in linspace(window.lo, window.hi, 5) {
                    check_mass(&conditional.at(phi), 1)?;
                }
            }
        }
        Ok(Self {
            prior,
            conditional,
            window,
        })
    }

    pub fn prior(&self) -> &Density {
        &self.prior
    }

    pub fn conditional(&self) -> &ConditionalModel {
        &self.conditional
    }

    /// φ interval holding all but [`PRIOR_TRUNCATION_MASS`] of the prior.
    pub fn prior_window(&self) -> Interval {
        self.window
    }
}

fn check_mass(d: &Density, index: usize) -> Result<()> {
    let integral = density_mass(d, DENSITY_CHECK_TOL)?;
    if (integral - 1.0).abs() > DENSITY_CHECK_TOL {
        return Err(Error::DensityNotNormalized {
            index,
            integral,
            tolerance: DENSITY_CHECK_TOL,
        });
    }
    Ok(())
}

/// Binary test between `φ` and `φ + h` with priors proportional to
/// `f_φ(φ)` and `f_φ(φ + h)`.
pub fn detection_subproblem(est: &EstimationProblem, phi: f64, h: f64) -> Result<ContinuousProblem> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "must be positive",
        });
    }
    let f0 = est.prior.pdf(phi);
    let f1 = est.prior.pdf(phi + h);
    let total = f0 + f1;
    if !(total > 0.0) {
        return Err(Error::DegeneratePoint { phi, h });
    }
    let p0 = f0 / total;
    ContinuousProblem::with_validation(
        PriorVector::new(vec![p0, 1.0 - p0])?,
        vec![est.conditional.at(phi), est.conditional.at(phi + h)],
        None,
    )
}

/// Nonincreasing envelope: each value becomes the maximum of itself and
/// everything to its right.
pub fn valley_fill(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = samples.to_vec();
    let mut running = f64::NEG_INFINITY;
    for s in out.iter_mut().rev() {
        running = running.max(s.1);
        s.1 = running;
    }
    out
}

/// Discretisation of the outer (`h`) and inner (`φ`) integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct ZzlbGrid {
    pub h_values: Vec<f64>,
    pub phi_window: Interval,
    pub phi_step: f64,
}

impl ZzlbGrid {
    pub fn new(h_values: Vec<f64>, phi_window: Interval, phi_step: f64) -> Result<Self> {
        let grid = Self {
            h_values,
            phi_window,
            phi_step,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `h_k = k·h_step` up to the width of the prior window, and the prior
    /// window itself for `φ`.
    pub fn uniform(est: &EstimationProblem, h_step: f64, phi_step: f64) -> Result<Self> {
        if !(h_step > 0.0 && h_step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "h_step",
                value: h_step,
                reason: "must be positive",
            });
        }
        let window = est.prior_window();
        let n = (window.width() / h_step).floor() as usize;
        let h_values = (1..=n).map(|k| k as f64 * h_step).collect();
        Self::new(h_values, window, phi_step)
    }

    /// Same grid with both steps halved.
    pub fn refined(&self) -> Self {
        let mut h_values = Vec::with_capacity(2 * self.h_values.len());
        let mut prev = 0.0;
        for &h in &self.h_values {
            h_values.push(0.5 * (prev + h));
            h_values.push(h);
            prev = h;
        }
        Self {
            h_values,
            phi_window: self.phi_window,
            phi_step: 0.5 * self.phi_step,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h_values.is_empty() {
            return Err(Error::InvalidConfig("h grid is empty".into()));
        }
        if !self.h_values.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(Error::InvalidConfig("h values must be positive".into()));
        }
        if !self.h_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("h values must be strictly increasing".into()));
        }
        if !(self.phi_step > 0.0 && self.phi_step.is_finite()) {
            return Err(Error::InvalidConfig(format!("phi step must be positive, got {}", self.phi_step)));
        }
        if !self.phi_window.is_finite() {
            return Err(Error::InvalidConfig("phi window must be finite".into()));
        }
        Ok(())
    }
}

type CustomProvider = Arc<dyn Fn(&HypothesisProblem, &ExpectationConfig) -> Result<f64> + Send + Sync>;

/// Source of the detection error (or a lower bound on it) at each `(φ, h)`.
#[derive(Clone)]
pub enum PminProvider {
    ExactMap,
    B1(PExponent),
    B2(PExponent),
    /// Any lower bound on the MAP error of a binary problem.
    Custom(CustomProvider),
}

impl fmt::Debug for PminProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PminProvider::ExactMap => write!(f, "ExactMap"),
            PminProvider::B1(p) => write!(f, "B1({})", p.value()),
            PminProvider::B2(p) => write!(f, "B2({})", p.value()),
            PminProvider::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PminProvider {
    fn evaluate(&self, problem: &HypothesisProblem, config: &ExpectationConfig) -> Result<Estimate> {
        match self {
            PminProvider::ExactMap => map_error(problem, config),
            PminProvider::B1(p) => bound_b1(problem, *p, config),
            PminProvider::B2(p) => bound_b2(problem, *p, config),
            PminProvider::Custom(f) => f(problem, config).map(|v| Estimate::exact(v, 1)),
        }
    }
}

/// Sampled inner integral, its valley-filled envelope, and the bound.
#[derive(Debug, Clone)]
pub struct ZzlbProfile {
    pub h: Vec<f64>,
    pub inner: Vec<f64>,
    pub filled: Vec<f64>,
    pub bound: Estimate,
}

/// `½ ∫ V{∫ (f_φ(φ) + f_φ(φ+h)) P(φ, φ+h) dφ} h dh`, trapezoidal in both
/// variables, with the valley filling applied to the sampled inner integral.
pub fn zzlb_profile(
    est: &EstimationProblem,
    provider: &PminProvider,
    grid: &ZzlbGrid,
    config: &ExpectationConfig,
) -> Result<ZzlbProfile> {
    grid.validate()?;
    config.validate()?;
    let inner: Vec<(f64, usize, f64)> = grid
        .h_values
        .par_iter()
        .map(|&h| inner_integral(est, provider, grid, h, config))
        .collect::<Result<_>>()?;

    let samples: Vec<(f64, f64)> = grid.h_values.iter().zip(&inner).map(|(&h, v)| (h, v.0)).collect();
    let filled = valley_fill(&samples);

    let mut total = CompensatedSum::new();
    let mut tol = 0.0;
    let (mut prev_h, mut prev_f) = (0.0, 0.0);
    for (i, &(h, v)) in filled.iter().enumerate() {
        let f = v * h;
        total.add(0.5 * (h - prev_h) * (f + prev_f));
        let next_h = filled.get(i + 1).map_or(h, |s| s.0);
        tol += 0.5 * (next_h - prev_h) * h * inner[i].2;
        prev_h = h;
        prev_f = f;
    }
    let evaluations: usize = inner.iter().map(|v| v.1).sum();
    let bound = Estimate {
        value: 0.5 * total.value(),
        std_error: None,
        evaluations: evaluations.max(1),
        achieved_tol: 0.5 * tol,
        degenerate: false,
    };
    Ok(ZzlbProfile {
        h: grid.h_values.clone(),
        inner: samples.iter().map(|s| s.1).collect(),
        filled: filled.iter().map(|s| s.1).collect(),
        bound,
    })
}

/// Returns `(value, evaluations, accumulated tolerance)`.
fn inner_integral(
    est: &EstimationProblem,
    provider: &PminProvider,
    grid: &ZzlbGrid,
    h: f64,
    config: &ExpectationConfig,
) -> Result<(f64, usize, f64)> {
    let lo = grid.phi_window.lo - h;
    let hi = grid.phi_window.hi;
    let n = ((hi - lo) / grid.phi_step).ceil().max(1.0) as usize + 1;
    let step = (hi - lo) / (n - 1) as f64;
    let mut sum = CompensatedSum::new();
    let mut evaluations = 0;
    let mut tol = 0.0;
    for (k, phi) in linspace(lo, hi, n).into_iter().enumerate() {
        let weight = est.prior.pdf(phi) + est.prior.pdf(phi + h);
        if weight == 0.0 {
            continue;
        }
        let sub: HypothesisProblem = detection_subproblem(est, phi, h)?.into();
        let e = provider.evaluate(&sub, config).map_err(|err| Error::ProviderFailure {
            phi,
            h,
            message: err.to_string(),
        })?;
        let trap = if k == 0 || k == n - 1 { 0.5 * step } else { step };
        sum.add(trap * weight * e.value);
        evaluations += e.evaluations;
        tol += trap * weight * e.achieved_tol;
    }
    Ok((sum.value(), evaluations, tol))
}

pub fn zzlb(
    est: &EstimationProblem,
    provider: &PminProvider,
    grid: &ZzlbGrid,
    config: &ExpectationConfig,
) -> Result<Estimate> {
    zzlb_profile(est, provider, grid, config).map(|p| p.bound)
}

/// `C_p^(1)` (`TermClass::First`) or `C_p^(2)` (`TermClass::Second`): the
/// bound with the tightest Hölder lower bound as detection-error provider.
pub fn c_bound(
    est: &EstimationProblem,
    p: PExponent,
    which: TermClass,
    grid: &ZzlbGrid,
    config: &ExpectationConfig,
) -> Result<Estimate> {
    let provider = match which {
        TermClass::First => PminProvider::B1(p),
        TermClass::Second => PminProvider::B2(p),
    };
    zzlb(est, &provider, grid, config)
}
