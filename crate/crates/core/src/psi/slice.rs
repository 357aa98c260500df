//! Nested conditional quadrature over a bivariate centred normal.
//!
//! Coordinates are rotated to `(u, v) = (e·w, f·w)`. The outer integral over
//! `u` is adaptive Gauss–Kronrod; for fixed `u` the inner variable is
//! `N(slope·u, inner_sd²)` and inner integrals of `exp(rate·v)` over intervals
//! are closed form ([`tilted_mass`]).

use crate::gaussian::{std_pdf, tilted_mass};
use crate::quadrature::{integrate_with_breaks, Quad, QuadConfig};

/// `coef·w ≥ level`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HalfPlane {
    pub coef: [f64; 2],
    pub level: f64,
}

impl HalfPlane {
    pub fn new(coef: [f64; 2], level: f64) -> Self {
        Self { coef, level }
    }

    /// The closure of the complement, `coef·w ≤ level`.
    pub fn flip(self) -> Self {
        Self {
            coef: [-self.coef[0], -self.coef[1]],
            level: -self.level,
        }
    }
}

/// `exp(log_coef + rate·w)`, optionally negated.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExpTerm {
    pub sign: f64,
    pub log_coef: f64,
    pub rate: [f64; 2],
}

impl ExpTerm {
    pub fn new(coef: f64, rate: [f64; 2]) -> Self {
        Self {
            sign: coef.signum(),
            log_coef: coef.abs().ln(),
            rate,
        }
    }

    pub fn from_log(sign: f64, log_coef: f64, rate: [f64; 2]) -> Self {
        Self {
            sign,
            log_coef,
            rate,
        }
    }
}

/// `sign·exp(log_coef)·mass`, zero whenever the mass is zero.
#[inline]
pub(crate) fn weighted(log_coef: f64, mass: f64) -> f64 {
    if mass == 0.0 || log_coef == f64::NEG_INFINITY {
        0.0
    } else {
        (log_coef + mass.ln()).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    cov: [[f64; 2]; 2],
    e: [f64; 2],
    pub outer_sd: f64,
    pub slope: f64,
    pub inner_sd: f64,
    /// `w = to_w · (u, v)`.
    to_w: [[f64; 2]; 2],
}

fn quad_form(cov: &[[f64; 2]; 2], x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * (cov[0][0] * y[0] + cov[0][1] * y[1]) + x[1] * (cov[1][0] * y[0] + cov[1][1] * y[1])
}

impl Frame {
    /// `None` when `e` and `f` are (numerically) parallel.
    pub fn new(cov: [[f64; 2]; 2], e: [f64; 2], f: [f64; 2]) -> Option<Frame> {
        let det = e[0] * f[1] - e[1] * f[0];
        let scale = e[0].hypot(e[1]) * f[0].hypot(f[1]);
        if !(det.abs() > 1e-10 * scale) {
            return None;
        }
        let var_u = quad_form(&cov, e, e);
        let cov_uv = quad_form(&cov, e, f);
        let var_v = quad_form(&cov, f, f);
        let slope = cov_uv / var_u;
        let inner_var = var_v - slope * cov_uv;
        if !(inner_var > 0.0) {
            return None;
        }
        let to_w = [[f[1] / det, -e[1] / det], [-f[0] / det, e[0] / det]];
        Some(Frame {
            cov,
            e,
            outer_sd: var_u.sqrt(),
            slope,
            inner_sd: inner_var.sqrt(),
            to_w,
        })
    }

    /// Outer `w₁`, inner `w₂`.
    pub fn first(cov: [[f64; 2]; 2]) -> Frame {
        Frame::new(cov, [1.0, 0.0], [0.0, 1.0]).expect("axes are independent")
    }

    /// Outer `w₂`, inner `w₁`.
    pub fn second(cov: [[f64; 2]; 2]) -> Frame {
        Frame::new(cov, [0.0, 1.0], [1.0, 0.0]).expect("axes are independent")
    }

    /// `(γ_u, γ_v)` with `β·w = γ_u u + γ_v v`.
    pub fn split(&self, beta: [f64; 2]) -> (f64, f64) {
        (
            beta[0] * self.to_w[0][0] + beta[1] * self.to_w[1][0],
            beta[0] * self.to_w[0][1] + beta[1] * self.to_w[1][1],
        )
    }

    #[inline]
    pub fn inner_mean(&self, u: f64) -> f64 {
        self.slope * u
    }

    #[inline]
    pub fn outer_pdf(&self, u: f64) -> f64 {
        std_pdf(u / self.outer_sd) / self.outer_sd
    }

    /// Truncation box for the outer variable, widened so that the mode of
    /// every `exp(β·w)`-tilted law stays `truncation_sd` deviations inside.
    pub fn outer_box(&self, rates: &[[f64; 2]], cfg: &QuadConfig) -> (f64, f64) {
        let mut lo: f64 = 0.0;
        let mut hi: f64 = 0.0;
        for &b in rates {
            let shift = quad_form(&self.cov, b, self.e);
            lo = lo.min(shift);
            hi = hi.max(shift);
        }
        let w = cfg.truncation_sd * self.outer_sd;
        (lo - w, hi + w)
    }

    /// `∫ φ_u(u) g(u) du` over `[lo, hi]` with break points.
    pub fn integrate<G: Fn(f64) -> f64>(
        &self,
        g: G,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        cfg: &QuadConfig,
    ) -> Quad {
        integrate_with_breaks(|u| self.outer_pdf(u) * g(u), lo, hi, breaks, cfg)
    }
}

/// `E[Σ terms · 1{w ∈ ∩ planes}]` for `w ~ N₂(0, cov)`.
///
/// The outer variable is `w₂`; for fixed `w₂` each plane becomes a bound on
/// `w₁` or a constraint on `w₂` alone. Crossings of bounds are break points, so
/// the outer integrand is analytic on every panel.
pub(crate) fn polygon_expectation(
    cov: [[f64; 2]; 2],
    planes: &[HalfPlane],
    terms: &[ExpTerm],
    cfg: &QuadConfig,
) -> Quad {
    let frame = Frame::second(cov);
    let mut lower: Vec<(f64, f64)> = Vec::new(); // v >= a + b·u
    let mut upper: Vec<(f64, f64)> = Vec::new(); // v <= a + b·u
    let rates: Vec<[f64; 2]> = terms.iter().map(|t| t.rate).collect();
    let (mut u_lo, mut u_hi) = frame.outer_box(&rates, cfg);
    let mut breaks = Vec::new();
    for p in planes {
        if p.level == f64::NEG_INFINITY {
            continue;
        }
        if p.level == f64::INFINITY {
            return Quad::default();
        }
        let (cu, cv) = frame.split(p.coef);
        let norm = cu.hypot(cv);
        if norm == 0.0 || cv.abs() <= 1e-13 * norm {
            if norm == 0.0 || cu.abs() <= 1e-13 {
                if p.level > 0.0 {
                    return Quad::default();
                }
                continue;
            }
            let edge = p.level / cu;
            if cu > 0.0 {
                u_lo = u_lo.max(edge);
            } else {
                u_hi = u_hi.min(edge);
            }
            continue;
        }
        let bound = (p.level / cv, -cu / cv);
        if cv > 0.0 {
            lower.push(bound);
        } else {
            upper.push(bound);
        }
    }
    if !(u_lo < u_hi) {
        return Quad::default();
    }
    let all: Vec<(f64, f64)> = lower.iter().chain(upper.iter()).copied().collect();
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            let db = all[i].1 - all[j].1;
            if db.abs() > 1e-14 {
                breaks.push((all[j].0 - all[i].0) / db);
            }
        }
    }
    let split: Vec<(f64, f64, f64, f64)> = terms
        .iter()
        .map(|t| {
            let (gu, gv) = frame.split(t.rate);
            (t.sign, t.log_coef, gu, gv)
        })
        .collect();
    let s = frame.inner_sd;
    frame.integrate(
        |u| {
            let lo = lower
                .iter()
                .map(|(a, b)| a + b * u)
                .fold(f64::NEG_INFINITY, f64::max);
            let hi = upper
                .iter()
                .map(|(a, b)| a + b * u)
                .fold(f64::INFINITY, f64::min);
            if !(lo < hi) {
                return 0.0;
            }
            let m = frame.inner_mean(u);
            split
                .iter()
                .map(|&(sign, lc, gu, gv)| {
                    sign * weighted(lc + gu * u, tilted_mass(m, s, gv, lo, hi))
                })
                .sum()
        },
        u_lo,
        u_hi,
        &breaks,
        cfg,
    )
}
