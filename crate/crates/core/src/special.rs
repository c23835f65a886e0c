//! Gauss hypergeometric function `₂F₁(a, b; c; z)` for real arguments with
//! `z <= 0` or `|z| < 1`.

use crate::error::{Error, Result};

const MAX_TERMS: usize = 1_000_000;

/// Below this argument the Pfaff transformation is used instead of the
/// direct series.
const PFAFF_THRESHOLD: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Args {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl Hyp2F1Args {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Result<Self> {
        if ![a, b, c, z].iter().all(|v| v.is_finite()) {
            return Err(Error::Hyp2f1Domain(format!("non-finite argument ({a}, {b}; {c}; {z})")));
        }
        if c <= 0.0 && c.fract() == 0.0 {
            return Err(Error::Hyp2f1Domain(format!("c = {c} is a nonpositive integer")));
        }
        if z >= 1.0 {
            return Err(Error::Hyp2f1Domain(format!("z = {z} is outside z <= 0 or |z| < 1")));
        }
        Ok(Self { a, b, c, z })
    }

    pub fn eval(&self) -> Result<f64> {
        if self.z < PFAFF_THRESHOLD {
            pfaff(self.a, self.b, self.c, self.z)
        } else {
            series(self.a, self.b, self.c, self.z)
        }
    }
}

/// `₂F₁(a, b; c; z)`. Uses the Pfaff transformation for `z < -1/2` and the
/// power series otherwise.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    Hyp2F1Args::new(a, b, c, z)?.eval()
}

/// Direct power series; requires `|z| < 1`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let args = Hyp2F1Args::new(a, b, c, z)?;
    if z.abs() >= 1.0 {
        return Err(Error::Hyp2f1Domain(format!("series needs |z| < 1, got {z}")));
    }
    series(args.a, args.b, args.c, args.z)
}

/// `(1 - z)^{-a} ₂F₁(a, c - b; c; z/(z - 1))`; requires `z <= 0`.
pub fn hyp2f1_pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let args = Hyp2F1Args::new(a, b, c, z)?;
    if z > 0.0 {
        return Err(Error::Hyp2f1Domain(format!("Pfaff route needs z <= 0, got {z}")));
    }
    pfaff(args.a, args.b, args.c, args.z)
}

fn pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * series(a, c - b, c, w)?)
}

fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut small_run = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            // Terminating (polynomial) series.
            return Ok(sum + comp);
        }
        // Kahan-compensated accumulation; alternating tails cancel heavily.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() <= 1e-17 * sum.abs() && ratio.abs() < 1.0 {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::SeriesNonConvergence(MAX_TERMS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(hyp2f1(1.3, -2.7, 4.1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn log_identity() {
        let z: f64 = -0.5;
        let expected = -(1.0 - z).ln() / z;
        assert!((hyp2f1(1.0, 1.0, 2.0, z).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 2.0 * 1.5f64.ln()).abs() < 1e-15);
        // Same identity far out on the negative axis, through the Pfaff route.
        let z: f64 = -40.0;
        let expected = -(1.0 - z).ln() / z;
        assert!((hyp2f1(1.0, 1.0, 2.0, z).unwrap() / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_identity() {
        // ₂F₁(a, b; b; z) = (1 - z)^{-a}
        for &z in &[-7.0f64, -0.9, -0.2, 0.4, 0.8] {
            let v = hyp2f1(0.7, 2.5, 2.5, z).unwrap();
            assert!((v / (1.0 - z).powf(-0.7) - 1.0).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn reference_values() {
        // mpmath at 30 digits.
        let cases = [
            (2.0, 1.0, 3.0, -2.0, 0.450_693_855_665_945_154_302_377_3),
            (0.5, 0.5, 1.5, -0.25, 0.962_423_650_119_206_894_995_517_8),
            (1.5, 0.5, 3.0, 0.75, 1.314_548_221_319_584_902_790_839),
        ];
        for (a, b, c, z, expected) in cases {
            let v = hyp2f1(a, b, c, z).unwrap();
            assert!((v / expected - 1.0).abs() < 1e-10, "({a},{b};{c};{z}) = {v} vs {expected}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(hyp2f1(1.0, 1.0, -2.0, 0.1), Err(Error::Hyp2f1Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, 2.0, 1.5), Err(Error::Hyp2f1Domain(_))));
        assert!(matches!(hyp2f1_series(1.0, 1.0, 2.0, -1.5), Err(Error::Hyp2f1Domain(_))));
    }

    #[test]
    fn pfaff_agrees_with_series_on_overlap() {
        for k in 1..20 {
            let z = -0.05 * k as f64;
            let s = hyp2f1_series(1.3, 0.4, 2.2, z).unwrap();
            let p = hyp2f1_pfaff(1.3, 0.4, 2.2, z).unwrap();
            assert!((s - p).abs() < 1e-9, "z = {z}: {s} vs {p}");
        }
    }
}
