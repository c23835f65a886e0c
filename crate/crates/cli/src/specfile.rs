//! Problem specification files and built-in examples.
//!
//! ```text
//! # binary exponential test
//! [problem]
//! kind = continuous
//! M = 2
//! priors = 1/2, 1/2
//! h1 = exponential(0.5)
//! h2 = exponential(1)
//!
//! [expectation]
//! method = quadrature
//! rel_tol = 1e-9
//!
//! [bounds]
//! map
//! b1 p=2
//! classic:BLB2
//! ```
//!
//! Discrete problems list one probability vector per hypothesis over the
//! alphabet (`h1 = 0.2, 0.3, 0.5`) and may name the symbols with `labels`.
//! An `[estimation]` section (`prior = gaussian(0, 1)`, `noise = gaussian(1)`)
//! describes an additive-noise model for the `zzlb` command.

use std::collections::HashMap;

use errbound::builtin;
use errbound::zzlb::ConditionalModel;
use errbound::{
    BoundSpec, ContinuousProblem, Density, DiscreteProblem, EstimationProblem, ExpectationConfig,
    HypothesisProblem, Interval, PriorVector, Trig,
};

use crate::error::{CliError, CliResult};
use crate::tokens::{parse_bounds, parse_number, split_leading_assignments};

/// Where a problem came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File,
    Example { name: String, params: Vec<(String, f64)> },
}

/// Everything a command needs from its problem argument.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub source: Source,
    pub problem: Option<HypothesisProblem>,
    pub estimation: Option<EstimationProblem>,
    pub config: ExpectationConfig,
    pub bounds: Vec<BoundSpec>,
}

/// Resolve `example:NAME` or read a spec file, then append the bounds given
/// as trailing tokens.
pub fn load(spec: &str, tokens: &[String]) -> CliResult<Loaded> {
    if let Some(name) = spec.strip_prefix("example:") {
        let (params, rest) = split_leading_assignments(tokens).map_err(CliError::Usage)?;
        let mut loaded = example(name, &params)?;
        loaded.bounds = parse_bounds(rest).map_err(CliError::Usage)?;
        return Ok(loaded);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::usage(format!("cannot read spec file `{spec}`: {e}")))?;
    let mut loaded = parse_spec(&text)?;
    if tokens.first().is_some_and(|t| t.contains('=')) {
        return Err(CliError::usage("key=value parameters only apply to built-in examples"));
    }
    loaded
        .bounds
        .extend(parse_bounds(tokens).map_err(CliError::Usage)?);
    Ok(loaded)
}

pub const EXAMPLES: [&str; 3] = ["exponential", "ternary", "linear-gaussian"];

/// Build a named example with `key=value` parameters.
pub fn example(name: &str, params: &[(String, f64)]) -> CliResult<Loaded> {
    let allowed: &[(&str, f64)] = match name {
        "exponential" => &[("lambda2", 1.0)],
        "ternary" => &[],
        "linear-gaussian" => &[("sigma_phi", 1.0), ("sigma_n", 1.0)],
        _ => {
            return Err(CliError::usage(format!(
                "unknown example `{name}`; available: {}",
                EXAMPLES.join(", ")
            )))
        }
    };
    let mut values: HashMap<&str, f64> = allowed.iter().copied().collect();
    for (k, v) in params {
        match values.get_mut(k.as_str()) {
            Some(slot) => *slot = *v,
            None => return Err(CliError::usage(format!("example `{name}` has no parameter `{k}`"))),
        }
    }
    let usage = |e: errbound::Error| CliError::usage(format!("example `{name}`: {e}"));
    let (problem, estimation) = match name {
        "exponential" => (Some(builtin::exponential(values["lambda2"]).map_err(usage)?.into()), None),
        "ternary" => (Some(builtin::ternary().map_err(usage)?.into()), None),
        _ => (
            None,
            Some(builtin::linear_gaussian(values["sigma_phi"], values["sigma_n"]).map_err(usage)?),
        ),
    };
    Ok(Loaded {
        source: Source::Example {
            name: name.to_string(),
            params: params.to_vec(),
        },
        problem,
        estimation,
        config: ExpectationConfig::default(),
        bounds: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Problem,
    Expectation,
    Bounds,
    Estimation,
}

/// `key -> (line, value)` for one section.
type Entries = HashMap<String, (usize, String)>;

/// Parse the text of a spec file.
pub fn parse_spec(text: &str) -> CliResult<Loaded> {
    let mut section = None;
    let mut headers: HashMap<Section, usize> = HashMap::new();
    let mut entries: HashMap<Section, Entries> = HashMap::new();
    let mut bounds = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let s = match name.trim() {
                "problem" => Section::Problem,
                "expectation" => Section::Expectation,
                "bounds" => Section::Bounds,
                "estimation" => Section::Estimation,
                other => return Err(CliError::parse(line_no, format!("unknown section [{other}]"))),
            };
            if headers.insert(s, line_no).is_some() {
                return Err(CliError::parse(line_no, format!("section [{}] repeated", name.trim())));
            }
            section = Some(s);
            continue;
        }
        match section {
            None => return Err(CliError::parse(line_no, "content before the first section")),
            Some(Section::Bounds) => {
                let tokens: Vec<String> = line.split_whitespace().map(String::from).collect();
                bounds.extend(parse_bounds(&tokens).map_err(|e| CliError::parse(line_no, e))?);
            }
            Some(s) => {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| CliError::parse(line_no, format!("expected key = value, got `{line}`")))?;
                let key = k.trim().to_string();
                let map = entries.entry(s).or_default();
                if map.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
                    return Err(CliError::parse(line_no, format!("key `{key}` repeated")));
                }
            }
        }
    }

    let problem = match entries.remove(&Section::Problem) {
        Some(e) => Some(build_problem(e, headers[&Section::Problem])?),
        None => None,
    };
    let config = match entries.remove(&Section::Expectation) {
        Some(e) => build_config(e, headers[&Section::Expectation])?,
        None => ExpectationConfig::default(),
    };
    let estimation = match entries.remove(&Section::Estimation) {
        Some(e) => Some(build_estimation(e, headers[&Section::Estimation])?),
        None => None,
    };
    Ok(Loaded {
        source: Source::File,
        problem,
        estimation,
        config,
        bounds,
    })
}

fn take<'a>(e: &'a mut Entries, key: &str, header: usize) -> CliResult<(usize, String)> {
    e.remove(key)
        .ok_or_else(|| CliError::parse(header, format!("missing key `{key}`")))
}

fn reject_leftovers(e: &Entries) -> CliResult<()> {
    if let Some((k, (line, _))) = e.iter().min_by_key(|(_, (line, _))| *line) {
        return Err(CliError::parse(*line, format!("unknown key `{k}`")));
    }
    Ok(())
}

fn number_list(line: usize, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| parse_number(t).map_err(|e| CliError::parse(line, e)))
        .collect()
}

fn build_problem(mut e: Entries, header: usize) -> CliResult<HypothesisProblem> {
    let (kind_line, kind) = take(&mut e, "kind", header)?;
    let (prior_line, priors) = take(&mut e, "priors", header)?;
    let priors = number_list(prior_line, &priors)?;
    let m = priors.len();
    if let Some((line, declared)) = e.remove("M") {
        let declared: usize = declared
            .parse()
            .map_err(|_| CliError::parse(line, format!("bad M `{declared}`")))?;
        if declared != m {
            return Err(CliError::parse(line, format!("M = {declared} but {m} priors given")));
        }
    }
    let priors = PriorVector::new(priors).map_err(|err| CliError::parse(prior_line, err.to_string()))?;
    let mut hyps = Vec::with_capacity(m);
    for i in 1..=m {
        hyps.push(take(&mut e, &format!("h{i}"), header)?);
    }
    let problem: HypothesisProblem = match kind.as_str() {
        "discrete" => {
            let columns = hyps
                .iter()
                .map(|(line, s)| number_list(*line, s))
                .collect::<CliResult<Vec<_>>>()?;
            let n = columns[0].len();
            if let Some((line, _)) = hyps.iter().zip(&columns).find(|(_, c)| c.len() != n).map(|(h, _)| h) {
                return Err(CliError::parse(*line, format!("expected {n} probabilities")));
            }
            let mut problem = DiscreteProblem::from_columns(priors, columns)
                .map_err(|err| CliError::parse(hyps[0].0, err.to_string()))?;
            if let Some((line, labels)) = e.remove("labels") {
                let labels: Vec<String> = labels.split(',').map(|l| l.trim().to_string()).collect();
                problem = DiscreteProblem::with_labels(problem.priors().clone(), problem.likelihoods().to_vec(), labels)
                    .map_err(|err| CliError::parse(line, err.to_string()))?;
            }
            problem.into()
        }
        "continuous" => {
            let densities = hyps
                .iter()
                .map(|(line, s)| parse_family(*line, s))
                .collect::<CliResult<Vec<_>>>()?;
            let mut problem = ContinuousProblem::new(priors, densities)
                .map_err(|err| CliError::parse(header, err.to_string()))?;
            if let Some((line, s)) = e.remove("support") {
                problem = problem.with_support(parse_interval(line, &s)?);
            }
            problem.into()
        }
        other => {
            return Err(CliError::parse(
                kind_line,
                format!("kind must be discrete or continuous, got `{other}`"),
            ))
        }
    };
    reject_leftovers(&e)?;
    Ok(problem)
}

fn parse_interval(line: usize, s: &str) -> CliResult<Interval> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::parse(line, format!("expected lo:hi, got `{s}`")))?;
    let lo = parse_number(lo).map_err(|e| CliError::parse(line, e))?;
    let hi = parse_number(hi).map_err(|e| CliError::parse(line, e))?;
    Interval::new(lo, hi).map_err(|e| CliError::parse(line, e.to_string()))
}

/// `exponential(rate)`, `gaussian(mean, std)` or `gaussian(std)`,
/// `uniform(lo, hi)`, and the trigonometric-Laplace forms `cos2-exp`,
/// `sin2-exp` (`cos²(x/2)`, `sin²(x/2)`) and `sin2x-exp` (`sin²(x)`), each
/// with an optional scale (normalised when omitted).
pub fn parse_family(line: usize, s: &str) -> CliResult<Density> {
    let err = |msg: String| CliError::parse(line, msg);
    let s = s.trim();
    let open = s.find('(').ok_or_else(|| err(format!("expected family(args), got `{s}`")))?;
    let body = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| err(format!("missing `)` in `{s}`")))?;
    let name = s[..open].trim();
    let args: Vec<f64> = if body.trim().is_empty() {
        Vec::new()
    } else {
        number_list(line, body)?
    };
    let arity = |n: &[usize]| {
        if n.contains(&args.len()) {
            Ok(())
        } else {
            Err(err(format!("`{name}` takes {n:?} arguments, got {}", args.len())))
        }
    };
    let lib = |r: errbound::Result<Density>| r.map_err(|e| err(e.to_string()));
    match name {
        "exponential" => {
            arity(&[1])?;
            lib(Density::exponential(args[0]))
        }
        "gaussian" => {
            arity(&[1, 2])?;
            if args.len() == 1 {
                lib(Density::gaussian(0.0, args[0]))
            } else {
                lib(Density::gaussian(args[0], args[1]))
            }
        }
        "uniform" => {
            arity(&[2])?;
            lib(Density::uniform(args[0], args[1]))
        }
        "cos2-exp" | "sin2-exp" | "sin2x-exp" => {
            arity(&[0, 1])?;
            let (trig, freq) = match name {
                "cos2-exp" => (Trig::Cos, 0.5),
                "sin2-exp" => (Trig::Sin, 0.5),
                _ => (Trig::Sin, 1.0),
            };
            lib(Density::trig_exp(trig, freq, args.first().copied()))
        }
        other => Err(err(format!("unknown family `{other}`"))),
    }
}

fn build_config(mut e: Entries, _header: usize) -> CliResult<ExpectationConfig> {
    let mut c = ExpectationConfig::default();
    let mut keys: Vec<(String, (usize, String))> = e.drain().collect();
    keys.sort_by_key(|(_, (line, _))| *line);
    for (key, (line, value)) in keys {
        let num = || parse_number(&value).map_err(|m| CliError::parse(line, m));
        let int = || {
            value
                .parse::<u64>()
                .map_err(|_| CliError::parse(line, format!("expected an integer, got `{value}`")))
        };
        match key.as_str() {
            "method" => c.method = value.parse().map_err(|err: errbound::Error| CliError::parse(line, err.to_string()))?,
            "abs_tol" => c.abs_tol = num()?,
            "rel_tol" => c.rel_tol = num()?,
            "truncation_mass" => c.truncation_mass = num()?,
            "max_subdivisions" => c.max_subdivisions = int()? as usize,
            "mc_samples" => c.mc_samples = int()? as usize,
            "seed" => c.seed = int()?,
            other => return Err(CliError::parse(line, format!("unknown key `{other}`"))),
        }
        c.validate().map_err(|err| CliError::parse(line, err.to_string()))?;
    }
    Ok(c)
}

fn build_estimation(mut e: Entries, header: usize) -> CliResult<EstimationProblem> {
    let (prior_line, prior) = take(&mut e, "prior", header)?;
    let (noise_line, noise) = take(&mut e, "noise", header)?;
    reject_leftovers(&e)?;
    let prior = parse_family(prior_line, &prior)?;
    let noise = parse_family(noise_line, &noise)?;
    EstimationProblem::new(prior, ConditionalModel::Additive(noise))
        .map_err(|err| CliError::parse(header, err.to_string()))
}
