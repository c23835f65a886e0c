//! Scalar probability densities used as per-hypothesis observation laws
//! and as priors for estimation problems.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// A closed interval on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidConfig(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }
}

/// Trigonometric factor of a Laplace-weighted density `c·trig²(ωx)·e^{-|x|}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

type PdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied density. Without an inverse CDF it cannot be sampled.
#[derive(Clone)]
pub struct CustomDensity {
    pub pdf: PdfFn,
    pub support: Interval,
    pub inverse_cdf: Option<PdfFn>,
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("support", &self.support)
            .field("sampler", &self.inverse_cdf.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Density {
    /// `λ e^{-λx}` on `[0, ∞)`.
    Exponential { rate: f64 },
    Gaussian { mean: f64, std_dev: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `scale · trig²(freq·x) · e^{-|x|}` on the real line.
    TrigExp { trig: Trig, freq: f64, scale: f64 },
    /// `base(x - offset)`.
    Shifted { base: Box<Density>, offset: f64 },
    Custom(CustomDensity),
}

impl Density {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Density::Exponential { rate })
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: mean,
                reason: "must be finite",
            });
        }
        positive("std_dev", std_dev)?;
        Ok(Density::Gaussian { mean, std_dev })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let iv = Interval::new(lo, hi)?;
        if !iv.is_finite() {
            return Err(Error::InvalidConfig("uniform density needs a finite interval".into()));
        }
        Ok(Density::Uniform { lo, hi })
    }

    /// Laplace-weighted trigonometric density. `scale = None` picks the
    /// normalising constant.
    pub fn trig_exp(trig: Trig, freq: f64, scale: Option<f64>) -> Result<Self> {
        positive("freq", freq)?;
        let scale = scale.unwrap_or_else(|| trig_exp_normalizer(trig, freq));
        positive("scale", scale)?;
        Ok(Density::TrigExp { trig, freq, scale })
    }

    pub fn custom<F>(pdf: F, support: Interval) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Density::Custom(CustomDensity {
            pdf: Arc::new(pdf),
            support,
            inverse_cdf: None,
        })
    }

    pub fn with_inverse_cdf<F>(self, inverse_cdf: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        match self {
            Density::Custom(mut c) => {
                c.inverse_cdf = Some(Arc::new(inverse_cdf));
                Density::Custom(c)
            }
            other => other,
        }
    }

    pub fn shifted(&self, offset: f64) -> Density {
        match self {
            Density::Gaussian { mean, std_dev } => Density::Gaussian {
                mean: mean + offset,
                std_dev: *std_dev,
            },
            Density::Uniform { lo, hi } => Density::Uniform {
                lo: lo + offset,
                hi: hi + offset,
            },
            Density::Shifted { base, offset: o } => Density::Shifted {
                base: base.clone(),
                offset: o + offset,
            },
            other => Density::Shifted {
                base: Box::new(other.clone()),
                offset,
            },
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Density::Gaussian { mean, std_dev } => {
                let z = (x - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * (2.0 * PI).sqrt())
            }
            Density::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Density::TrigExp { trig, freq, scale } => {
                let t = match trig {
                    Trig::Cos => (freq * x).cos(),
                    Trig::Sin => (freq * x).sin(),
                };
                scale * t * t * (-x.abs()).exp()
            }
            Density::Shifted { base, offset } => base.pdf(x - offset),
            Density::Custom(c) => {
                if c.support.contains(x) {
                    (c.pdf)(x)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support(&self) -> Interval {
        match self {
            Density::Exponential { .. } => Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            Density::Gaussian { .. } | Density::TrigExp { .. } => Interval::REAL_LINE,
            Density::Uniform { lo, hi } => Interval { lo: *lo, hi: *hi },
            Density::Shifted { base, offset } => {
                let s = base.support();
                Interval {
                    lo: s.lo + offset,
                    hi: s.hi + offset,
                }
            }
            Density::Custom(c) => c.support,
        }
    }

    /// A finite interval outside which at most `mass` probability lies, from
    /// closed-form tail bounds. `None` for custom densities.
    pub fn tail_window(&self, mass: f64) -> Option<Interval> {
        let mass = mass.clamp(f64::MIN_POSITIVE, 0.5);
        match self {
            Density::Exponential { rate } => Some(Interval {
                lo: 0.0,
                hi: -mass.ln() / rate,
            }),
            Density::Gaussian { mean, std_dev } => {
                // P(|Z| > z) <= exp(-z²/2)
                let z = (2.0 * (1.0 / mass).ln()).sqrt();
                Some(Interval {
                    lo: mean - z * std_dev,
                    hi: mean + z * std_dev,
                })
            }
            Density::Uniform { lo, hi } => Some(Interval { lo: *lo, hi: *hi }),
            Density::TrigExp { scale, .. } => {
                // Mass beyond |x| > X is at most 2·scale·e^{-X}.
                let x = (2.0 * scale / mass).ln().max(1.0);
                Some(Interval { lo: -x, hi: x })
            }
            Density::Shifted { base, offset } => base.tail_window(mass).map(|w| Interval {
                lo: w.lo + offset,
                hi: w.hi + offset,
            }),
            Density::Custom(c) if c.support.is_finite() => Some(c.support),
            Density::Custom(_) => None,
        }
    }

    /// Points where the density is not smooth (support edges excluded for
    /// unbounded families).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Density::Exponential { .. } | Density::TrigExp { .. } => vec![0.0],
            Density::Uniform { lo, hi } => vec![*lo, *hi],
            Density::Gaussian { .. } => Vec::new(),
            Density::Shifted { base, offset } => base.kinks().into_iter().map(|k| k + offset).collect(),
            Density::Custom(c) => [c.support.lo, c.support.hi].into_iter().filter(|v| v.is_finite()).collect(),
        }
    }

    pub fn has_sampler(&self) -> bool {
        match self {
            Density::Custom(c) => c.inverse_cdf.is_some(),
            Density::Shifted { base, .. } => base.has_sampler(),
            _ => true,
        }
    }

    /// Draw one sample, or `None` when no sampler is known.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match self {
            Density::Exponential { rate } => {
                let u: f64 = rng.random();
                Some(-(1.0 - u).ln() / rate)
            }
            Density::Gaussian { mean, std_dev } => {
                let n = Normal::new(*mean, *std_dev).ok()?;
                Some(n.sample(rng))
            }
            Density::Uniform { lo, hi } => Some(rng.random_range(*lo..*hi)),
            Density::TrigExp { trig, freq, .. } => loop {
                // Laplace proposal, accept with probability trig²(freq·x) <= 1.
                let e = -(1.0 - rng.random::<f64>()).ln();
                let x = if rng.random::<bool>() { e } else { -e };
                let t = match trig {
                    Trig::Cos => (freq * x).cos(),
                    Trig::Sin => (freq * x).sin(),
                };
                if rng.random::<f64>() < t * t {
                    return Some(x);
                }
            },
            Density::Shifted { base, offset } => base.sample(rng).map(|x| x + offset),
            Density::Custom(c) => c.inverse_cdf.as_ref().map(|inv| inv(rng.random::<f64>())),
        }
    }
}

/// Constant `c` making `c·trig²(ωx)·e^{-|x|}` integrate to one.
pub fn trig_exp_normalizer(trig: Trig, freq: f64) -> f64 {
    let damped = 1.0 / (1.0 + 4.0 * freq * freq);
    match trig {
        Trig::Cos => 1.0 / (1.0 + damped),
        Trig::Sin => 1.0 / (1.0 - damped),
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
