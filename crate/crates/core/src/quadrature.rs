//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.
//!
//! Panels are bisected in order of their estimated error until the total
//! error meets `max(abs_tol, rel_tol * |I|)` or the panel budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances and panel budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Number of equal panels the interval is cut into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_subdivisions: 2000,
            initial_panels: 8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation with its embedded 7-point Gauss estimate.
/// Returns `(kronrod, |kronrod - gauss|)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrate `f` over the finite interval `[a, b]`.
///
/// A run that exhausts `max_subdivisions` still returns its best value with
/// `converged = false`; callers decide whether that is fatal.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Quadrature {
    assert!(a.is_finite() && b.is_finite(), "integration limits must be finite");
    if a == b {
        return Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let panels0 = opts.initial_panels.max(1);
    let width = (b - a) / panels0 as f64;
    let mut heap = BinaryHeap::with_capacity(opts.max_subdivisions + panels0);
    let mut evaluations = 0;
    for k in 0..panels0 {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels0 { b } else { lo + width };
        let (value, error) = gauss_kronrod_15(&f, lo, hi);
        evaluations += 15;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
        });
    }

    let totals = |heap: &BinaryHeap<Panel>| -> (f64, f64) {
        let mut v = crate::numerics::CompensatedSum::new();
        let mut e = 0.0;
        for p in heap.iter() {
            v.add(p.value);
            e += p.error;
        }
        (v.value(), e)
    };

    let (mut value, mut error) = totals(&heap);
    let mut panels = panels0;
    loop {
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Quadrature {
                value,
                abs_error: error,
                evaluations,
                converged: true,
            };
        }
        if panels >= opts.max_subdivisions || !error.is_finite() {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        // Panel cannot be split further at double precision.
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (lv, le) = gauss_kronrod_15(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(&f, mid, worst.b);
        evaluations += 30;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        panels += 1;
        // Incremental update drifts; recompute exactly every so often.
        if panels % 64 == 0 {
            (value, error) = totals(&heap);
        } else {
            value += lv + rv - worst.value;
            error += le + re - worst.error;
        }
    }
    let (value, error) = totals(&heap);
    Quadrature {
        value,
        abs_error: error,
        evaluations,
        converged: error <= opts.abs_tol.max(opts.rel_tol * value.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_22() {
        for k in 0..=22 {
            let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(k), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "degree {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn embedded_gauss_rule_is_exact_for_degree_13() {
        // The error estimate vanishes when both rules are exact.
        let (_, err) = gauss_kronrod_15(&|x: f64| x.powi(12) + x.powi(13), -1.0, 1.0);
        assert!(err < 1e-14);
    }

    #[test]
    fn integrates_kinked_function() {
        let opts = QuadratureOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            ..Default::default()
        };
        let q = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &opts);
        assert!(q.converged);
        assert!((q.value - (0.045 + 0.245)).abs() < 1e-9);
    }

    #[test]
    fn reports_nonconvergence_on_singularity() {
        let opts = QuadratureOptions {
            max_subdivisions: 20,
            ..Default::default()
        };
        let q = integrate(|x: f64| 1.0 / x, 1e-300, 1.0, &opts);
        assert!(!q.converged);
    }

    #[test]
    fn gaussian_mass() {
        let q = integrate(
            |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -10.0,
            10.0,
            &QuadratureOptions {
                abs_tol: 1e-13,
                rel_tol: 1e-13,
                ..Default::default()
            },
        );
        assert!((q.value - 1.0).abs() < 1e-12);
    }
}
