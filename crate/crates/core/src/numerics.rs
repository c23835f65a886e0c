//! Small numerical kernels shared by the bound evaluators.

/// `log(Σ exp(x_i))`, stable for large-magnitude inputs.
///
/// Returns `-inf` for an empty slice or when every term is `-inf`, and `+inf`
/// as soon as any term is `+inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &x in xs {
        if x > max {
            max = x;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let mut sum = 0.0;
    for &x in xs {
        sum += (x - max).exp();
    }
    max + sum.ln()
}

/// `log(Σ_i P_i^r)` computed from `log P_i` without forming `P_i^r`.
///
/// Zero entries follow the continuity convention: `0^r = 0` for `r > 0` and
/// `0^r = +inf` for `r < 0`.
pub fn log_power_sum(log_values: &[f64], r: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &lv in log_values {
        let t = scaled_log(lv, r);
        if t > max {
            max = t;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let mut sum = 0.0;
    for &lv in log_values {
        sum += (scaled_log(lv, r) - max).exp();
    }
    max + sum.ln()
}

#[inline]
fn scaled_log(log_value: f64, r: f64) -> f64 {
    if log_value == f64::NEG_INFINITY {
        if r > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        r * log_value
    }
}

/// `(Σ_i P_i^r)^s` evaluated entirely in the log domain.
///
/// `+inf^s` with `s < 0` collapses to zero, which is the limit the bound
/// integrands need at posterior zeros.
pub fn power_sum_pow(values: &[f64], r: f64, s: f64) -> f64 {
    let mut logs = smallvec::SmallVec::<[f64; 8]>::with_capacity(values.len());
    logs.extend(values.iter().map(|&v| v.ln()));
    let lse = log_power_sum(&logs, r);
    if lse == f64::INFINITY {
        return if s < 0.0 { 0.0 } else { f64::INFINITY };
    }
    if lse == f64::NEG_INFINITY {
        return if s > 0.0 { 0.0 } else { f64::INFINITY };
    }
    (s * lse).exp()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn stable_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Evenly spaced grid with `n` points on `[lo, hi]` (both ends included).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}
