//! Adaptive Gauss–Kronrod (G10/K21) quadrature on finite intervals.
//!
//! Global subdivision: the panel with the largest error estimate is bisected
//! until the summed error drops below `max(abs_tol, rel_tol * |I|)` or the
//! panel budget is exhausted.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_060_428_802,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss 10-point weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

/// Tolerances for adaptive integration and Gaussian truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Half-width of the Gaussian truncation box in marginal standard deviations.
    pub truncation_sd: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_panels: 400,
            truncation_sd: 10.0,
        }
    }
}

impl QuadConfig {
    /// Same tolerances with a different truncation box.
    pub fn with_truncation(mut self, sd: f64) -> Self {
        self.truncation_sd = sd;
        self
    }
}

/// Integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Quad {
    type Output = Quad;
    fn add(self, rhs: Quad) -> Quad {
        Quad {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Quad {
    pub fn scale(self, k: f64) -> Quad {
        Quad {
            value: self.value * k,
            error: self.error * k.abs(),
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// Single 21-point Kronrod panel with its embedded 10-point Gauss estimate.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quad {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    Quad {
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h),
    }
}

struct Panel {
    a: f64,
    b: f64,
    q: Quad,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.q.error == other.q.error
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
        self.q.error.total_cmp(&other.q.error)
    }
}

/// Adaptive integral of `f` over `[a, b]`. Reversed bounds flip the sign.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Quad {
    if a == b || !(a.is_finite() && b.is_finite()) {
        return Quad::default();
    }
    if a > b {
        return integrate(f, b, a, cfg).scale(-1.0);
    }
    let first = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, q: first });
    let mut total = first;
    while heap.len() < cfg.max_panels {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.value.abs());
        if total.error <= target {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        total.value += left.value + right.value - worst.q.value;
        total.error += left.error + right.error - worst.q.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            q: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            q: right,
        });
    }
    // re-sum to shed accumulated cancellation from the running updates
    let mut value = 0.0;
    let mut error = 0.0;
    for p in heap.iter() {
        value += p.q.value;
        error += p.q.error;
    }
    Quad { value, error }
}

/// Integrate over `[a, b]` split at the given interior break points.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Quad {
    if !(a < b) {
        return Quad::default();
    }
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    let mut out = Quad::default();
    let mut lo = a;
    for p in pts.into_iter().chain(std::iter::once(b)) {
        out = out + integrate(&f, lo, p, cfg);
        lo = p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, &QuadConfig::default());
        assert!((q.value - 0.0).abs() < 1e-13);
        let q = integrate(|x| x.powi(10), -1.0, 1.0, &QuadConfig::default());
        assert!((q.value - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_mass() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q = integrate(f, -10.0, 10.0, &QuadConfig::default());
        assert!((q.value - 1.0).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn kinked_integrand_converges() {
        let q = integrate(|x: f64| x.abs(), -1.0, 2.0, &QuadConfig::default());
        assert!((q.value - 2.5).abs() < 1e-9);
        let q = integrate_with_breaks(|x: f64| x.abs(), -1.0, 2.0, &[0.0], &QuadConfig::default());
        assert!((q.value - 2.5).abs() < 1e-14);
    }

    #[test]
    fn reversed_and_empty() {
        let cfg = QuadConfig::default();
        assert_eq!(integrate(|x| x, 1.0, 1.0, &cfg).value, 0.0);
        let q = integrate(|x| x, 1.0, 0.0, &cfg);
        assert!((q.value + 0.5).abs() < 1e-15);
    }
}
