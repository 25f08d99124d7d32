//! One-dimensional quadrature: globally adaptive 21-point Gauss–Kronrod and a
//! level-refined tanh-sinh rule.
//!
//! Both are used where integrands carry logarithmic endpoint singularities;
//! the tanh-sinh rule hands the integrand its distance to each endpoint so
//! `log(b − x)` can be evaluated without cancellation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One Gauss–Kronrod 10/21 panel: (kronrod estimate, error estimate,
/// rounding floor of the estimate).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_k = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_k * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err, floor)
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
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

/// Default number of panel bisections before giving up.
pub const DEFAULT_MAX_PANELS: usize = 2000;

/// Globally adaptive Gauss–Kronrod over `[a, b]`, optionally pre-split at
/// `breaks`. The panel with the largest error is bisected until the summed
/// error meets the tolerance.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Result<Quad> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut cuts = vec![a];
    cuts.extend(
        breaks
            .iter()
            .copied()
            .filter(|&x| x > a.min(b) && x < a.max(b)),
    );
    cuts.push(b);
    let last = cuts.len() - 1;
    if a > b {
        cuts[1..last].sort_by(|x, y| y.total_cmp(x));
    } else {
        cuts[1..last].sort_by(|x, y| x.total_cmp(y));
    }

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut floor = 0.0;
    for w in cuts.windows(2) {
        let (v, e, fl) = gk21(&mut f, w[0], w[1]);
        evaluations += 21;
        value += v;
        error += e;
        floor += fl;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            floor: fl,
        });
    }
    let mut panels = heap.len();
    // Errors at the rounding floor cannot be reduced by further bisection.
    while error > tol.target(value) && error > 2.0 * floor {
        if panels >= max_panels {
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Kronrod",
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // Panel cannot be split further in floating point.
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Kronrod",
                estimate: value,
                error,
            });
        }
        let (v1, e1, f1) = gk21(&mut f, worst.a, mid);
        let (v2, e2, f2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        floor += f1 + f2 - worst.floor;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            floor: f1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            floor: f2,
        });
        panels += 1;
    }
    // Re-sum to drop accumulated update rounding.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Quad {
        value,
        error,
        evaluations,
    })
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
///
/// `f` receives `(x, x − a, b − x)`, the two distances computed without
/// cancellation. Levels halve the step until consecutive estimates agree.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_level: u32,
) -> Result<Quad> {
    use std::f64::consts::FRAC_PI_2;
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut evaluations = 0usize;

    // Contribution of abscissa t (and -t when t > 0).
    let mut node = |t: f64, f: &mut F| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1 - tanh|u| = 2e/(1+e)
        let comp = h * 2.0 * e / (1.0 + e);
        let cosh_u = u.cosh();
        let w = h * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if comp == 0.0 || !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        if t == 0.0 {
            evaluations += 1;
            return w * f(c, h, h);
        }
        let far = 2.0 * h - comp;
        evaluations += 2;
        w * (f(b - comp, far, comp) + f(a + comp, comp, far))
    };

    let t_max = 6.5;
    let mut step = 1.0;
    let mut sum = 0.0;
    let mut t = 0.0;
    while t <= t_max {
        sum += node(t, &mut f);
        t += step;
    }
    let mut estimate = sum * step;
    for _level in 1..=max_level {
        step *= 0.5;
        let mut t = step;
        while t <= t_max {
            sum += node(t, &mut f);
            t += 2.0 * step;
        }
        let next = sum * step;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= tol {
            return Ok(Quad {
                value: estimate,
                error: diff,
                evaluations,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "tanh-sinh",
        estimate,
        error: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(
            |x| x * x * x - 2.0 * x,
            0.0,
            2.0,
            &[],
            Tolerance::abs(1e-14),
            10,
        )
        .unwrap();
        assert!((q.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫₀¹ log x dx = -1
        let q = integrate(|x: f64| x.ln(), 0.0, 1.0, &[], Tolerance::abs(1e-12), 500).unwrap();
        assert!((q.value + 1.0).abs() < 1e-12, "{q:?}");
        let t = tanh_sinh(|_, da, _| da.ln(), 0.0, 1.0, 1e-13, 12).unwrap();
        assert!((t.value + 1.0).abs() < 1e-12, "{t:?}");
    }

    #[test]
    fn reversed_bounds_and_breaks() {
        let q = integrate(
            |x: f64| x.abs(),
            1.0,
            -1.0,
            &[0.0],
            Tolerance::abs(1e-14),
            10,
        )
        .unwrap();
        assert!((q.value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_smooth() {
        let t = tanh_sinh(|x, _, _| x.exp(), 0.0, 1.0, 1e-14, 10).unwrap();
        assert!((t.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let t = tanh_sinh(|x, _, _| 1.0 / (1.0 + x * x), -1.0, 1.0, 1e-14, 10).unwrap();
        assert!((t.value - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let r = integrate(
            |x: f64| 1.0 / x.sqrt(),
            0.0,
            1.0,
            &[],
            Tolerance::abs(1e-15),
            3,
        );
        match r {
            Err(Error::NonConvergence { estimate, .. }) => assert!(estimate > 1.0),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
