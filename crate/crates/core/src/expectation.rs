//! Expectations of posterior functionals under the marginal law of the
//! observation: exact summation, adaptive quadrature, or stratified Monte
//! Carlo.

use std::cell::Cell;
use std::str::FromStr;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use smallvec::SmallVec;

use crate::density::{Density, Interval};
use crate::error::{Error, Result};
use crate::model::{ContinuousProblem, DiscreteProblem, HypothesisProblem, Observation};
use crate::numerics::CompensatedSum;
use crate::quadrature::{integrate, Quadrature, QuadratureOptions};

type Buf = SmallVec<[f64; 8]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact summation over a finite alphabet.
    ExactDiscrete,
    /// Adaptive Gauss-Kronrod over a truncated window. On discrete problems
    /// this is the same exact summation.
    Quadrature,
    /// Stratified sampling, one stratum per hypothesis.
    MonteCarlo,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "exact-discrete" => Ok(Method::ExactDiscrete),
            "quadrature" | "quad" => Ok(Method::Quadrature),
            "monte-carlo" | "mc" | "montecarlo" => Ok(Method::MonteCarlo),
            other => Err(Error::InvalidConfig(format!("unknown expectation method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Marginal mass allowed outside the integration window.
    pub truncation_mass: f64,
}

impl Default for ExpectationConfig {
    fn default() -> Self {
        Self {
            method: Method::Quadrature,
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_subdivisions: 2000,
            mc_samples: 100_000,
            seed: 0,
            truncation_mass: 1e-10,
        }
    }
}

impl ExpectationConfig {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            method: Method::MonteCarlo,
            mc_samples: samples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("abs_tol", self.abs_tol)?;
        positive("rel_tol", self.rel_tol)?;
        positive("truncation_mass", self.truncation_mass)?;
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be positive".into()));
        }
        if self.mc_samples < 100 {
            return Err(Error::InvalidConfig(format!(
                "mc_samples must be at least 100, got {}",
                self.mc_samples
            )));
        }
        Ok(())
    }

    fn quadrature_options(&self) -> QuadratureOptions {
        QuadratureOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            initial_panels: 16,
        }
    }
}

/// A computed value with error metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Standard error; present only for Monte Carlo estimates.
    pub std_error: Option<f64>,
    pub evaluations: usize,
    pub achieved_tol: f64,
    /// Set when the value is a continuity limit (an infinite inner
    /// expectation collapsed the bound to its trivial value).
    pub degenerate: bool,
}

impl Estimate {
    pub fn exact(value: f64, evaluations: usize) -> Self {
        Self {
            value,
            std_error: None,
            evaluations: evaluations.max(1),
            achieved_tol: 0.0,
            degenerate: false,
        }
    }

    /// Replace the value by `value = f(self.value)` with local slope `slope`,
    /// propagating the error metadata to first order.
    pub fn transformed(&self, value: f64, slope: f64) -> Self {
        Self {
            value,
            std_error: self.std_error.map(|s| s * slope.abs()),
            evaluations: self.evaluations,
            achieved_tol: self.achieved_tol * slope.abs(),
            degenerate: self.degenerate,
        }
    }

    /// Merge metadata of an estimate built from two expectations, treating
    /// their errors as independent.
    pub fn combined(value: f64, a: (&Estimate, f64), b: (&Estimate, f64)) -> Self {
        let std_error = match (a.0.std_error, b.0.std_error) {
            (Some(sa), Some(sb)) => Some(((sa * a.1).powi(2) + (sb * b.1).powi(2)).sqrt()),
            _ => None,
        };
        Self {
            value,
            std_error,
            evaluations: a.0.evaluations + b.0.evaluations,
            achieved_tol: a.0.achieved_tol * a.1.abs() + b.0.achieved_tol * b.1.abs(),
            degenerate: a.0.degenerate || b.0.degenerate,
        }
    }

    /// Apply a smooth transform to the value, with the slope estimated by a
    /// central difference.
    pub fn map_value<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        let value = f(self.value);
        let delta = 1e-6 * self.value.abs().max(1e-6);
        let slope = (f(self.value + delta) - f(self.value - delta)) / (2.0 * delta);
        let mut out = self.transformed(value, if slope.is_finite() { slope } else { 1.0 });
        if !slope.is_finite() {
            out.std_error = out.std_error.map(|_| f64::INFINITY);
        }
        out
    }

    pub fn degenerate(value: f64, evaluations: usize) -> Self {
        Self {
            degenerate: true,
            ..Self::exact(value, evaluations)
        }
    }
}

/// `E[g(x, P(θ_1|x), …, P(θ_M|x))]` under the marginal of `x`.
///
/// `g` receives the observation and the posterior vector. Points with zero
/// marginal contribute nothing. `g` may return infinities; a NaN is an
/// error naming the offending observation.
pub fn expect<G>(problem: &HypothesisProblem, g: G, config: &ExpectationConfig) -> Result<Estimate>
where
    G: Fn(Observation, &[f64]) -> f64 + Sync,
{
    config.validate()?;
    match (problem, config.method) {
        (HypothesisProblem::Discrete(d), Method::ExactDiscrete | Method::Quadrature) => {
            exact_sum(problem, d, None, &g)
        }
        (HypothesisProblem::Continuous(_), Method::ExactDiscrete) => Err(Error::Unsupported(
            "exact summation needs a discrete problem".into(),
        )),
        (HypothesisProblem::Continuous(c), Method::Quadrature) => {
            quadrature(problem, c, None, &g, config)
        }
        (_, Method::MonteCarlo) => monte_carlo(problem, None, &g, config),
    }
}

/// `E[g | θ_i]`: the same functional averaged under one hypothesis' law.
pub fn expect_given<G>(
    problem: &HypothesisProblem,
    hypothesis: usize,
    g: G,
    config: &ExpectationConfig,
) -> Result<Estimate>
where
    G: Fn(Observation, &[f64]) -> f64 + Sync,
{
    config.validate()?;
    if hypothesis >= problem.num_hypotheses() {
        return Err(Error::InvalidConfig(format!(
            "hypothesis index {hypothesis} out of range"
        )));
    }
    match (problem, config.method) {
        (HypothesisProblem::Discrete(d), Method::ExactDiscrete | Method::Quadrature) => {
            exact_sum(problem, d, Some(hypothesis), &g)
        }
        (HypothesisProblem::Continuous(_), Method::ExactDiscrete) => Err(Error::Unsupported(
            "exact summation needs a discrete problem".into(),
        )),
        (HypothesisProblem::Continuous(c), Method::Quadrature) => {
            quadrature(problem, c, Some(hypothesis), &g, config)
        }
        (_, Method::MonteCarlo) => monte_carlo(problem, Some(hypothesis), &g, config),
    }
}

/// Posterior at `x` written into `post`; returns the weight the point carries
/// (marginal, or the conditional likelihood when `given` is set).
#[inline]
fn weight_and_posterior(
    problem: &HypothesisProblem,
    x: Observation,
    given: Option<usize>,
    post: &mut [f64],
) -> Result<f64> {
    let marginal = problem.joint_into(x, post)?;
    if marginal <= 0.0 {
        return Ok(0.0);
    }
    let weight = match given {
        None => marginal,
        Some(i) => problem.likelihood(i, x)?,
    };
    for v in post.iter_mut() {
        *v /= marginal;
    }
    Ok(weight)
}

fn exact_sum<G>(
    problem: &HypothesisProblem,
    d: &DiscreteProblem,
    given: Option<usize>,
    g: &G,
) -> Result<Estimate>
where
    G: Fn(Observation, &[f64]) -> f64,
{
    let mut post: Buf = SmallVec::from_elem(0.0, problem.num_hypotheses());
    let mut acc = CompensatedSum::new();
    let mut magnitude = 0.0;
    for n in 0..d.alphabet_len() {
        let x = Observation::Symbol(n);
        let w = weight_and_posterior(problem, x, given, &mut post)?;
        if w == 0.0 {
            continue;
        }
        let v = g(x, &post);
        if v.is_nan() {
            return Err(Error::NanIntegrand(d.labels()[n].clone()));
        }
        acc.add(w * v);
        magnitude += (w * v).abs();
    }
    Ok(Estimate {
        value: acc.value(),
        std_error: None,
        evaluations: d.alphabet_len(),
        achieved_tol: f64::EPSILON * magnitude,
        degenerate: false,
    })
}

fn quadrature<G>(
    problem: &HypothesisProblem,
    c: &ContinuousProblem,
    given: Option<usize>,
    g: &G,
    config: &ExpectationConfig,
) -> Result<Estimate>
where
    G: Fn(Observation, &[f64]) -> f64,
{
    let priors = c.priors().as_slice();
    let active: Vec<&Density> = match given {
        Some(i) => vec![&c.densities()[i]],
        None => c
            .densities()
            .iter()
            .zip(priors)
            .filter(|(_, &p)| p > 0.0)
            .map(|(d, _)| d)
            .collect(),
    };
    let window = integration_window(&active, config.truncation_mass)?;
    let nan_at: Cell<Option<f64>> = Cell::new(None);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let mut post: Buf = SmallVec::from_elem(0.0, problem.num_hypotheses());
    let post_cell = std::cell::RefCell::new(&mut post);
    let integrand = |x: f64| -> f64 {
        let mut post = post_cell.borrow_mut();
        let obs = Observation::Value(x);
        let w = match weight_and_posterior(problem, obs, given, &mut post[..]) {
            Ok(w) => w,
            Err(e) => {
                failure.set(Some(e));
                return 0.0;
            }
        };
        if w == 0.0 {
            return 0.0;
        }
        let v = g(obs, &post[..]);
        if v.is_nan() {
            if nan_at.get().is_none() {
                nan_at.set(Some(x));
            }
            return 0.0;
        }
        w * v
    };
    let breaks = breakpoints(c, &window);
    let q = integrate_pieces(&integrand, window, &breaks, c.support(), &config.quadrature_options());
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if let Some(x) = nan_at.get() {
        return Err(Error::NanIntegrand(x.to_string()));
    }
    if !q.converged {
        return Err(Error::NonConvergence {
            value: q.value,
            achieved_tol: q.abs_error,
            evaluations: q.evaluations,
        });
    }
    Ok(Estimate {
        value: q.value,
        std_error: None,
        evaluations: q.evaluations.max(1),
        achieved_tol: q.abs_error,
        degenerate: false,
    })
}

/// Grid resolution used to locate decision-boundary crossings.
const BOUNDARY_SCAN_POINTS: usize = 256;

/// Interior points of `window` where the integrand may have a kink: known
/// non-smooth points of the densities, and crossings where the hypothesis
/// with the largest joint density changes (located by a grid scan followed
/// by bisection).
fn breakpoints(c: &ContinuousProblem, window: &Interval) -> Vec<f64> {
    let priors = c.priors().as_slice();
    let dens = c.densities();
    let argmax = |x: f64| -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, (d, p)) in dens.iter().zip(priors).enumerate() {
            let v = p * d.pdf(x);
            if v > best.1 {
                best = (i, v);
            }
        }
        best.0
    };
    let inside = |x: f64| x > window.lo && x < window.hi;
    let mut out: Vec<f64> = dens.iter().flat_map(Density::kinks).filter(|&x| inside(x)).collect();
    let grid = crate::numerics::linspace(window.lo, window.hi, BOUNDARY_SCAN_POINTS);
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let ia = argmax(a);
        if argmax(b) == ia {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if argmax(mid) == ia {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out.retain(|&x| inside(x));
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    out
}

/// [`integrate_on_support`] piecewise between `breaks`, with the absolute
/// tolerance shared evenly among the pieces.
pub(crate) fn integrate_pieces<F: Fn(f64) -> f64>(
    f: &F,
    window: Interval,
    breaks: &[f64],
    support: Interval,
    opts: &QuadratureOptions,
) -> Quadrature {
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(window.lo);
    edges.extend(breaks.iter().copied().filter(|&b| b > window.lo && b < window.hi));
    edges.push(window.hi);
    let pieces = edges.len() - 1;
    let piece_opts = QuadratureOptions {
        abs_tol: opts.abs_tol / pieces as f64,
        ..*opts
    };
    let mut total = Quadrature {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
        converged: true,
    };
    let mut sum = CompensatedSum::new();
    for e in edges.windows(2) {
        let piece = Interval { lo: e[0], hi: e[1] };
        let q = integrate_on_support(f, piece, support, &piece_opts);
        sum.add(q.value);
        total.abs_error += q.abs_error;
        total.evaluations += q.evaluations;
        total.converged &= q.converged;
    }
    total.value = sum.value();
    total
}

/// Integrate over `window ∩ support`. Infinite support directions are
/// mapped with `x = a ± t/(1-t)` before the window truncates them.
pub(crate) fn integrate_on_support<F: Fn(f64) -> f64>(
    f: F,
    window: Interval,
    support: Interval,
    opts: &QuadratureOptions,
) -> Quadrature {
    let iv = window.intersect(&support);
    if !(iv.lo < iv.hi) {
        return Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let lo_open = support.lo == f64::NEG_INFINITY;
    let hi_open = support.hi == f64::INFINITY;
    let half = QuadratureOptions {
        abs_tol: 0.5 * opts.abs_tol,
        ..*opts
    };
    match (lo_open, hi_open) {
        (false, false) => integrate(&f, iv.lo, iv.hi, opts),
        (false, true) => mapped(&f, iv.lo, 1.0, iv.hi - iv.lo, opts),
        (true, false) => mapped(&f, iv.hi, -1.0, iv.hi - iv.lo, opts),
        (true, true) => {
            let mid = 0.5 * (iv.lo + iv.hi);
            let right = mapped(&f, mid, 1.0, iv.hi - mid, &half);
            let left = mapped(&f, mid, -1.0, mid - iv.lo, &half);
            Quadrature {
                value: left.value + right.value,
                abs_error: left.abs_error + right.abs_error,
                evaluations: left.evaluations + right.evaluations,
                converged: left.converged && right.converged,
            }
        }
    }
}

/// `∫_0^extent f(anchor + dir·s) ds` with `s = t/(1-t)`.
fn mapped<F: Fn(f64) -> f64>(
    f: &F,
    anchor: f64,
    dir: f64,
    extent: f64,
    opts: &QuadratureOptions,
) -> Quadrature {
    let t_max = extent / (1.0 + extent);
    integrate(
        |t: f64| {
            let one_minus = 1.0 - t;
            let s = t / one_minus;
            f(anchor + dir * s) / (one_minus * one_minus)
        },
        0.0,
        t_max,
        opts,
    )
}

/// Smallest window holding all but `mass` of the mixture of `densities`,
/// each component allowed `mass / M` outside.
pub fn integration_window(densities: &[&Density], mass: f64) -> Result<Interval> {
    let per = mass / densities.len().max(1) as f64;
    let mut hull: Option<Interval> = None;
    for d in densities {
        let w = match d.tail_window(per) {
            Some(w) => w,
            None => doubling_window(d, per)?,
        };
        hull = Some(match hull {
            Some(h) => h.hull(&w),
            None => w,
        });
    }
    hull.ok_or_else(|| Error::InvalidConfig("no densities to integrate".into()))
}

/// Expand a window by doubling until the mass gained in the last expansion
/// drops below `mass`.
fn doubling_window(d: &Density, mass: f64) -> Result<Interval> {
    let support = d.support();
    let opts = QuadratureOptions {
        abs_tol: mass * 1e-2,
        rel_tol: 1e-10,
        max_subdivisions: 4000,
        initial_panels: 8,
    };
    let anchor = match (support.lo.is_finite(), support.hi.is_finite()) {
        (true, _) => support.lo,
        (false, true) => support.hi,
        (false, false) => 0.0,
    };
    let window_at = |w: f64| {
        Interval {
            lo: anchor - w,
            hi: anchor + w,
        }
        .intersect(&support)
    };
    let mut width = 1.0;
    let mut current = window_at(width);
    for _ in 0..64 {
        let next = window_at(2.0 * width);
        let left = integrate(|x| d.pdf(x), next.lo, current.lo, &opts).value;
        let right = integrate(|x| d.pdf(x), current.hi, next.hi, &opts).value;
        current = next;
        width *= 2.0;
        if left + right < mass {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence {
        value: f64::NAN,
        achieved_tol: f64::INFINITY,
        evaluations: 0,
    })
}

/// Total mass of a density over its support (truncation window at 1e-10).
pub fn density_mass(d: &Density, tol: f64) -> Result<f64> {
    let window = integration_window(&[d], 1e-10)?;
    let opts = QuadratureOptions {
        abs_tol: tol * 1e-2,
        rel_tol: tol * 1e-2,
        max_subdivisions: 4000,
        initial_panels: 16,
    };
    let q = integrate_on_support(|x| d.pdf(x), window, d.support(), &opts);
    if !q.converged {
        return Err(Error::NonConvergence {
            value: q.value,
            achieved_tol: q.abs_error,
            evaluations: q.evaluations,
        });
    }
    Ok(q.value)
}

fn stratum_rng(seed: u64, stratum: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stratum as u64);
    rng
}

fn draw(
    problem: &HypothesisProblem,
    hypothesis: usize,
    rng: &mut ChaCha8Rng,
    table: Option<&WeightedIndex<f64>>,
) -> Result<Observation> {
    match problem {
        HypothesisProblem::Discrete(_) => Ok(Observation::Symbol(
            table.expect("discrete sampling table").sample(rng),
        )),
        HypothesisProblem::Continuous(c) => c.densities()[hypothesis]
            .sample(rng)
            .map(Observation::Value)
            .ok_or(Error::MissingSampler(hypothesis)),
    }
}

fn symbol_table(problem: &HypothesisProblem, hypothesis: usize) -> Result<Option<WeightedIndex<f64>>> {
    match problem {
        HypothesisProblem::Discrete(d) => WeightedIndex::new(d.likelihoods().iter().map(|row| row[hypothesis]))
            .map(Some)
            .map_err(|e| Error::InvalidLikelihoods(e.to_string())),
        HypothesisProblem::Continuous(_) => Ok(None),
    }
}

struct Stratum {
    weight: f64,
    mean: f64,
    variance: f64,
    n: usize,
}

fn monte_carlo<G>(
    problem: &HypothesisProblem,
    given: Option<usize>,
    g: &G,
    config: &ExpectationConfig,
) -> Result<Estimate>
where
    G: Fn(Observation, &[f64]) -> f64 + Sync,
{
    let priors = problem.priors().as_slice();
    let plan: Vec<(usize, f64, usize)> = match given {
        Some(i) => vec![(i, 1.0, config.mc_samples)],
        None => priors
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (i, p, ((config.mc_samples as f64 * p).round() as usize).max(2)))
            .collect(),
    };
    let strata: Vec<Result<Stratum>> = plan
        .par_iter()
        .map(|&(i, weight, n)| {
            let mut rng = stratum_rng(config.seed, i);
            let table = symbol_table(problem, i)?;
            let mut post: Buf = SmallVec::from_elem(0.0, problem.num_hypotheses());
            // Welford running moments.
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for k in 0..n {
                let x = draw(problem, i, &mut rng, table.as_ref())?;
                let marginal = problem.joint_into(x, &mut post)?;
                let v = if marginal > 0.0 {
                    post.iter_mut().for_each(|p| *p /= marginal);
                    g(x, &post)
                } else {
                    0.0
                };
                if v.is_nan() {
                    return Err(Error::NanIntegrand(x.to_string()));
                }
                let delta = v - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (v - mean);
            }
            Ok(Stratum {
                weight,
                mean,
                variance: m2 / (n - 1) as f64,
                n,
            })
        })
        .collect();
    let mut value = CompensatedSum::new();
    let mut var = 0.0;
    let mut evaluations = 0;
    for s in strata {
        let s = s?;
        value.add(s.weight * s.mean);
        var += s.weight * s.weight * s.variance / s.n as f64;
        evaluations += s.n;
    }
    let se = var.sqrt();
    Ok(Estimate {
        value: value.value(),
        std_error: Some(se),
        evaluations,
        achieved_tol: se,
        degenerate: false,
    })
}

/// `n` i.i.d. draws from the marginal: hypothesis by prior, then the
/// observation from that hypothesis' law. Deterministic in `seed`.
pub fn sample_marginal(problem: &HypothesisProblem, n: usize, seed: u64) -> Result<Vec<Observation>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = problem.num_hypotheses();
    if let HypothesisProblem::Continuous(c) = problem {
        if let Some(i) = (0..m).find(|&i| c.priors().as_slice()[i] > 0.0 && !c.densities()[i].has_sampler()) {
            return Err(Error::MissingSampler(i));
        }
    }
    let hyp = WeightedIndex::new(problem.priors().as_slice().iter().copied())
        .map_err(|e| Error::InvalidPriors(e.to_string()))?;
    let tables = (0..m)
        .map(|i| symbol_table(problem, i))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let i = hyp.sample(&mut rng);
            draw(problem, i, &mut rng, tables[i].as_ref())
        })
        .collect()
}
