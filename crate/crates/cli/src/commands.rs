use std::io::Write;

use errbound::{
    builtin, format_sig, BoundCurve, BoundSpec, DiscreteProblem, HolderBound, HypothesisProblem,
    PExponent, PminProvider, PriorVector, ZzlbGrid,
};

use crate::error::{CliError, CliResult};
use crate::specfile::{Loaded, Source};
use crate::tokens::parse_number;

/// Below this exponent the bounds are numerically degenerate.
const P_WARN: f64 = 1.001;

/// `lo:hi:n`, `n` points including both ends.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("grid must be lo:hi:n, got `{s}`")));
    }
    let lo = parse_number(parts[0]).map_err(CliError::Usage)?;
    let hi = parse_number(parts[1]).map_err(CliError::Usage)?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("grid size must be a count, got `{}`", parts[2])))?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::usage(format!("grid ends must be finite, got `{s}`")));
    }
    Ok(errbound::numerics::linspace(lo, hi, n))
}

fn require_problem(loaded: &Loaded) -> CliResult<&HypothesisProblem> {
    loaded
        .problem
        .as_ref()
        .ok_or_else(|| CliError::usage("this command needs a hypothesis-testing problem"))
}

fn require_bounds(loaded: &Loaded) -> CliResult<&[BoundSpec]> {
    if loaded.bounds.is_empty() {
        return Err(CliError::usage("no bounds requested"));
    }
    Ok(&loaded.bounds)
}

/// One row per bound: `name,params,value,std_error,evaluations`.
pub fn eval<W: Write>(loaded: &Loaded, out: &mut W) -> CliResult<()> {
    let problem = require_problem(loaded)?;
    let bounds = require_bounds(loaded)?;
    writeln!(out, "name,params,value,std_error,evaluations")?;
    for b in bounds {
        let e = b.evaluate(problem, &loaded.config).map_err(|source| CliError::Numerical {
            bound: b.to_string(),
            source,
        })?;
        writeln!(
            out,
            "{},{},{},{},{}",
            b.label(),
            b.params(),
            format_sig(e.value),
            e.std_error.map(format_sig).unwrap_or_default(),
            e.evaluations
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    P,
    Q,
    Lambda2,
    Alpha,
    Posterior,
}

impl Axis {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "p" => Ok(Axis::P),
            "q" => Ok(Axis::Q),
            "lambda2" => Ok(Axis::Lambda2),
            "alpha" => Ok(Axis::Alpha),
            "posterior" => Ok(Axis::Posterior),
            other => Err(CliError::usage(format!(
                "unknown sweep axis `{other}`; use p, q, lambda2, alpha or posterior"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::Q => "q",
            Axis::Lambda2 => "lambda2",
            Axis::Alpha => "alpha",
            Axis::Posterior => "posterior",
        }
    }
}

/// Evaluate every requested bound at each grid value of `axis`. Failed
/// points leave empty cells and a warning; a bound that fails everywhere is
/// a numerical error.
pub fn sweep<W: Write>(loaded: &Loaded, axis: Axis, grid: &[f64], out: &mut W, warn: &mut dyn Write) -> CliResult<()> {
    let bounds = require_bounds(loaded)?;
    if grid.is_empty() {
        return Err(CliError::usage("sweep grid is empty"));
    }
    match axis {
        Axis::P | Axis::Q => {
            if !bounds.iter().any(|b| b.with_p(PExponent::new(2.0).expect("valid")).is_some()) {
                return Err(CliError::usage(format!("no requested bound depends on {}", axis.name())));
            }
        }
        Axis::Alpha => {
            if !bounds.iter().any(|b| b.with_alpha(1.0).is_some()) {
                return Err(CliError::usage("no requested bound has an alpha parameter"));
            }
        }
        Axis::Lambda2 => {
            if !matches!(&loaded.source, Source::Example { name, .. } if name == "exponential") {
                return Err(CliError::usage("the lambda2 axis needs example:exponential"));
            }
        }
        Axis::Posterior => {}
    }
    if axis != Axis::Posterior && axis != Axis::Lambda2 {
        require_problem(loaded)?;
    }

    let mut curve = BoundCurve::new(axis.name());
    for &x in grid {
        let (problem, specs) = point(loaded, axis, x, bounds, warn)?;
        for (b, spec) in bounds.iter().zip(specs) {
            let name = match axis {
                Axis::P | Axis::Q | Axis::Alpha => b.label(),
                _ => b.to_string(),
            };
            let result = match (&problem, &spec) {
                (Ok(pr), Ok(s)) => s.evaluate(pr, &loaded.config),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            if let Err(e) = &result {
                writeln!(warn, "warning: {name} at {}={}: {e}", axis.name(), format_sig(x))?;
            }
            curve.push(x, name, result);
        }
    }
    curve.write_csv(&mut *out)?;
    for b in bounds {
        let name = match axis {
            Axis::P | Axis::Q | Axis::Alpha => b.label(),
            _ => b.to_string(),
        };
        let pts: Vec<_> = curve.points.iter().filter(|p| p.bound == name).collect();
        if !pts.is_empty() && pts.iter().all(|p| p.result.is_err()) {
            let source = pts[0].result.clone().expect_err("all failed");
            return Err(CliError::Numerical { bound: name, source });
        }
    }
    Ok(())
}

type PointSetup = (errbound::Result<HypothesisProblem>, Vec<errbound::Result<BoundSpec>>);

fn point(loaded: &Loaded, axis: Axis, x: f64, bounds: &[BoundSpec], warn: &mut dyn Write) -> CliResult<PointSetup> {
    let same = || bounds.iter().map(|b| Ok(*b)).collect::<Vec<_>>();
    Ok(match axis {
        Axis::P | Axis::Q => {
            let p = if axis == Axis::P {
                PExponent::new(x)
            } else {
                PExponent::from_q(x)
            };
            if let Ok(pe) = p {
                if pe.value() < P_WARN {
                    writeln!(warn, "warning: p = {} is below {P_WARN}; the bounds are numerically degenerate here", format_sig(pe.value()))?;
                }
            }
            let specs = bounds
                .iter()
                .map(|b| match b.with_p(PExponent::new(2.0).expect("valid")) {
                    Some(_) => p.clone().map(|pe| b.with_p(pe).expect("has p")),
                    None => Ok(*b),
                })
                .collect();
            (Ok(require_problem(loaded)?.clone()), specs)
        }
        Axis::Alpha => {
            let specs = bounds.iter().map(|b| Ok(b.with_alpha(x).unwrap_or(*b))).collect();
            (Ok(require_problem(loaded)?.clone()), specs)
        }
        Axis::Lambda2 => (builtin::exponential(x).map(Into::into), same()),
        Axis::Posterior => (posterior_problem(x), same()),
    })
}

/// Binary problem with a single observation whose posterior is `(π, 1-π)`.
fn posterior_problem(pi: f64) -> errbound::Result<HypothesisProblem> {
    let priors = PriorVector::new(vec![pi, 1.0 - pi])?;
    Ok(DiscreteProblem::new(priors, vec![vec![1.0, 1.0]])?.into())
}

pub struct ZzlbOptions {
    pub h_grid: Option<Vec<f64>>,
    pub h_step: f64,
    pub phi_step: f64,
}

/// Rows `h,inner,filled` followed by `zzlb,,<bound>`.
pub fn zzlb<W: Write>(loaded: &Loaded, opts: &ZzlbOptions, out: &mut W) -> CliResult<()> {
    let est = loaded
        .estimation
        .as_ref()
        .ok_or_else(|| CliError::usage("zzlb needs an [estimation] section or example:linear-gaussian"))?;
    let (provider, label) = match loaded.bounds.as_slice() {
        [] | [BoundSpec::Map] => (PminProvider::ExactMap, "zzlb map".to_string()),
        [b @ BoundSpec::Holder { kind: HolderBound::B1, p }] => (PminProvider::B1(*p), format!("zzlb {b}")),
        [b @ BoundSpec::Holder { kind: HolderBound::B2, p }] => (PminProvider::B2(*p), format!("zzlb {b}")),
        _ => return Err(CliError::usage("zzlb takes one provider: map, b1 p=.. or b2 p=..")),
    };
    let grid = match &opts.h_grid {
        Some(h) if h.is_empty() => return Err(CliError::usage("h grid is empty")),
        Some(h) => ZzlbGrid::new(h.clone(), est.prior_window(), opts.phi_step),
        None => ZzlbGrid::uniform(est, opts.h_step, opts.phi_step),
    }
    .map_err(|e| CliError::usage(e.to_string()))?;
    let profile = errbound::zzlb::zzlb_profile(est, &provider, &grid, &loaded.config)
        .map_err(|source| CliError::Numerical { bound: label, source })?;
    writeln!(out, "h,inner,filled")?;
    for i in 0..profile.h.len() {
        writeln!(
            out,
            "{},{},{}",
            format_sig(profile.h[i]),
            format_sig(profile.inner[i]),
            format_sig(profile.filled[i])
        )?;
    }
    writeln!(out, "zzlb,,{}", format_sig(profile.bound.value))?;
    Ok(())
}

