//! M-ary hypothesis-testing problems: priors, observation laws, posteriors,
//! and the exact error of the MAP detector.

use std::fmt;

use rand::Rng;

use crate::density::{Density, Interval};
use crate::error::{Error, Result};
use crate::expectation::{self, Estimate, ExpectationConfig};

const PRIOR_SUM_TOL: f64 = 1e-12;
const LIKELIHOOD_SUM_TOL: f64 = 1e-12;

/// Default tolerance for the construction-time normalisation check.
pub const DENSITY_CHECK_TOL: f64 = 1e-6;

/// A-priori hypothesis probabilities `P(θ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector(Vec<f64>);

impl PriorVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidPriors(format!(
                "need at least two hypotheses, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidPriors(format!("weight {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::InvalidPriors(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.0.len() as f64;
        self.0.iter().all(|w| (w - u).abs() <= PRIOR_SUM_TOL)
    }
}

/// Finite-alphabet problem: `likelihoods[n][i] = P(x_n | θ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProblem {
    priors: PriorVector,
    likelihoods: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl DiscreteProblem {
    /// `likelihoods` is the N×M matrix with one row per alphabet symbol.
    pub fn new(priors: PriorVector, likelihoods: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..likelihoods.len()).map(|n| n.to_string()).collect();
        Self::with_labels(priors, likelihoods, labels)
    }

    pub fn with_labels(
        priors: PriorVector,
        likelihoods: Vec<Vec<f64>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let m = priors.len();
        if likelihoods.is_empty() {
            return Err(Error::InvalidLikelihoods("alphabet is empty".into()));
        }
        if labels.len() != likelihoods.len() {
            return Err(Error::InvalidLikelihoods(format!(
                "{} labels for {} symbols",
                labels.len(),
                likelihoods.len()
            )));
        }
        for (n, row) in likelihoods.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidLikelihoods(format!(
                    "row {n} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidLikelihoods(format!("entry {v} in row {n} is not a probability")));
            }
        }
        for i in 0..m {
            let total: f64 = likelihoods.iter().map(|row| row[i]).sum();
            if (total - 1.0).abs() > LIKELIHOOD_SUM_TOL {
                return Err(Error::InvalidLikelihoods(format!(
                    "column {i} sums to {total}, not 1"
                )));
            }
        }
        Ok(Self {
            priors,
            likelihoods,
            labels,
        })
    }

    /// Build from one probability mass function per hypothesis.
    pub fn from_columns(priors: PriorVector, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidLikelihoods("hypotheses have different alphabet sizes".into()));
        }
        let rows = (0..n).map(|k| columns.iter().map(|c| c[k]).collect()).collect();
        Self::new(priors, rows)
    }

    /// Random problem with `m` hypotheses over `n` symbols; priors and every
    /// likelihood column are normalised i.i.d. exponential weights.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Result<Self> {
        let mut simplex = |k: usize| -> Vec<f64> {
            let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        };
        let priors = PriorVector::new(simplex(m))?;
        let columns: Vec<Vec<f64>> = (0..m).map(|_| simplex(n)).collect();
        Self::from_columns(priors, columns)
    }

    pub fn priors(&self) -> &PriorVector {
        &self.priors
    }

    pub fn likelihoods(&self) -> &[Vec<f64>] {
        &self.likelihoods
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn alphabet_len(&self) -> usize {
        self.likelihoods.len()
    }
}

/// Scalar continuous observation with one density per hypothesis.
#[derive(Debug, Clone)]
pub struct ContinuousProblem {
    priors: PriorVector,
    densities: Vec<Density>,
    support: Interval,
}

impl ContinuousProblem {
    /// Build and check that every density integrates to one within
    /// [`DENSITY_CHECK_TOL`].
    pub fn new(priors: PriorVector, densities: Vec<Density>) -> Result<Self> {
        Self::with_validation(priors, densities, Some(DENSITY_CHECK_TOL))
    }

    /// `tolerance = None` skips the normalisation check.
    pub fn with_validation(
        priors: PriorVector,
        densities: Vec<Density>,
        tolerance: Option<f64>,
    ) -> Result<Self> {
        if densities.len() != priors.len() {
            return Err(Error::InvalidConfig(format!(
                "{} densities for {} priors",
                densities.len(),
                priors.len()
            )));
        }
        let support = densities
            .iter()
            .map(Density::support)
            .reduce(|a, b| a.hull(&b))
            .expect("at least two densities");
        let problem = Self {
            priors,
            densities,
            support,
        };
        if let Some(tol) = tolerance {
            for (index, d) in problem.densities.iter().enumerate() {
                let integral = expectation::density_mass(d, tol)?;
                if (integral - 1.0).abs() > tol {
                    return Err(Error::DensityNotNormalized {
                        index,
                        integral,
                        tolerance: tol,
                    });
                }
            }
        }
        Ok(problem)
    }

    /// Restrict the integration support hint.
    pub fn with_support(mut self, support: Interval) -> Self {
        self.support = support;
        self
    }

    pub fn priors(&self) -> &PriorVector {
        &self.priors
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    pub fn support(&self) -> Interval {
        self.support
    }
}

#[derive(Debug, Clone)]
pub enum HypothesisProblem {
    Discrete(DiscreteProblem),
    Continuous(ContinuousProblem),
}

impl From<DiscreteProblem> for HypothesisProblem {
    fn from(p: DiscreteProblem) -> Self {
        HypothesisProblem::Discrete(p)
    }
}

impl From<ContinuousProblem> for HypothesisProblem {
    fn from(p: ContinuousProblem) -> Self {
        HypothesisProblem::Continuous(p)
    }
}

/// One observation: a symbol index for discrete problems, a real otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Symbol(usize),
    Value(f64),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Symbol(n) => write!(f, "symbol #{n}"),
            Observation::Value(x) => write!(f, "{x}"),
        }
    }
}

/// Posterior probabilities `P(θ_i | x)` at one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorVector {
    pub values: Vec<f64>,
    /// Marginal pmf or pdf of the observation.
    pub marginal: f64,
}

impl PosteriorVector {
    /// `false` at zero-marginal points, where `values` are NaN.
    pub fn is_defined(&self) -> bool {
        self.marginal > 0.0
    }
}

impl HypothesisProblem {
    pub fn num_hypotheses(&self) -> usize {
        self.priors().len()
    }

    pub fn priors(&self) -> &PriorVector {
        match self {
            HypothesisProblem::Discrete(p) => &p.priors,
            HypothesisProblem::Continuous(p) => &p.priors,
        }
    }

    /// Likelihood `f(x | θ_i)` of one hypothesis.
    pub fn likelihood(&self, hypothesis: usize, x: Observation) -> Result<f64> {
        match (self, x) {
            (HypothesisProblem::Discrete(p), Observation::Symbol(n)) => p
                .likelihoods
                .get(n)
                .map(|row| row[hypothesis])
                .ok_or_else(|| Error::InvalidObservation(x.to_string())),
            (HypothesisProblem::Continuous(p), Observation::Value(v)) if !v.is_nan() => {
                Ok(p.densities[hypothesis].pdf(v))
            }
            _ => Err(Error::InvalidObservation(x.to_string())),
        }
    }

    /// Fill `joint[i] = P(θ_i) f(x|θ_i)` and return the marginal.
    pub(crate) fn joint_into(&self, x: Observation, joint: &mut [f64]) -> Result<f64> {
        let priors = self.priors().as_slice();
        let mut marginal = 0.0;
        for (i, slot) in joint.iter_mut().enumerate() {
            *slot = if priors[i] == 0.0 {
                0.0
            } else {
                priors[i] * self.likelihood(i, x)?
            };
            marginal += *slot;
        }
        Ok(marginal)
    }

    pub fn posterior(&self, x: Observation) -> Result<PosteriorVector> {
        posterior(self, x)
    }

    pub fn map_error(&self, config: &ExpectationConfig) -> Result<Estimate> {
        map_error(self, config)
    }
}

/// Bayes rule at one observation. Zero-marginal points come back flagged
/// (`is_defined() == false`) rather than as an error.
pub fn posterior(problem: &HypothesisProblem, x: Observation) -> Result<PosteriorVector> {
    let mut joint = vec![0.0; problem.num_hypotheses()];
    let marginal = problem.joint_into(x, &mut joint)?;
    if marginal > 0.0 {
        for v in &mut joint {
            *v /= marginal;
        }
    } else {
        joint.iter_mut().for_each(|v| *v = f64::NAN);
    }
    Ok(PosteriorVector {
        values: joint,
        marginal,
    })
}

/// Exact minimum probability of error, `1 - E[max_i P(θ_i|x)]`.
///
/// The integrand is `1 - max` rather than `max` so that mass lost to window
/// truncation does not bias the result.
pub fn map_error(problem: &HypothesisProblem, config: &ExpectationConfig) -> Result<Estimate> {
    expectation::expect(
        problem,
        |_, post: &[f64]| 1.0 - post.iter().cloned().fold(0.0, f64::max),
        config,
    )
}
