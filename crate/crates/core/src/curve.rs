//! Parameter sweeps and their CSV form.

use std::io::{self, Write};

use crate::error::Error;
use crate::expectation::Estimate;

/// One evaluated point of a sweep. Failures are kept, not propagated.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub x: f64,
    pub bound: String,
    pub result: Result<Estimate, Error>,
}

/// `(parameter, value)` series for one or more bounds.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub variable: String,
    pub points: Vec<CurvePoint>,
}

impl BoundCurve {
    pub fn new(variable: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, bound: impl Into<String>, result: Result<Estimate, Error>) {
        self.points.push(CurvePoint {
            x,
            bound: bound.into(),
            result,
        });
    }

    /// Values of one bound in sweep order; failed points are `None`.
    pub fn series(&self, bound: &str) -> Vec<(f64, Option<f64>)> {
        self.points
            .iter()
            .filter(|p| p.bound == bound)
            .map(|p| (p.x, p.result.as_ref().ok().map(|e| e.value)))
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.result.is_err())
    }

    /// Header `variable,x,bound,value,std_error`; failed points leave the
    /// value columns empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "variable,x,bound,value,std_error")?;
        for p in &self.points {
            let (value, se) = match &p.result {
                Ok(e) => (format_sig(e.value), e.std_error.map(format_sig).unwrap_or_default()),
                Err(_) => (String::new(), String::new()),
            };
            writeln!(out, "{},{},{},{},{}", self.variable, format_sig(p.x), p.bound, value, se)?;
        }
        Ok(())
    }
}

/// Locale-free rendering with 12 significant digits, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.375), "0.375");
        assert_eq!(format_sig(8.0 / 35.0), "0.228571428571");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-1.5e-9), "-1.5e-9");
        assert_eq!(format_sig(123456.0), "123456");
        assert_eq!(format_sig(1.0 - 2f64.powf(-0.5)), "0.292893218813");
    }

    #[test]
    fn csv_rows() {
        let mut c = BoundCurve::new("p");
        c.push(2.0, "b1", Ok(Estimate::exact(0.25, 1)));
        c.push(2.0, "b2", Err(Error::Unsupported("x".into())));
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "variable,x,bound,value,std_error\np,2,b1,0.25,\np,2,b2,,\n");
        assert_eq!(c.series("b1"), vec![(2.0, Some(0.25))]);
        assert_eq!(c.failures().count(), 1);
    }
}
