//! Power-loss auxiliary functions on `A_c = {cZ̃ ≤ H^{p−1}}`.
//!
//! With `L = ln c − B_m T` one has `cZ̃ = exp(L − A·w)`, so every density term
//! `c^q E[Z̃^q 1_A]` becomes `E[exp(q(L − A·w)) 1_A]` and is carried in log
//! form. `Risk` evaluates `Ψ₁ᵖ` under `P`:
//! `(1/p)E[Hᵖ 1_{Aᶜ}] + (1/p)E[(cZ̃)^{p/(p−1)} 1_A]`. `Cost` evaluates `Ψ₂ᵖ`
//! under `P̃`: `E[(H − (cZ̃)^{1/(p−1)}) 1_A]`.

use super::slice::{polygon_expectation, weighted, ExpTerm, Frame, HalfPlane};
use super::{Side, View};
use crate::error::{Error, Result};
use crate::gaussian::{std_pdf, tilted_mass};
use crate::market::{MarketParams, Measure, MeasureConstants};
use crate::payoffs::PayoffKind;
use crate::quadrature::{integrate, Quad, QuadConfig};

pub(crate) fn power_side(view: &View, side: Side, c: f64, p: f64) -> Result<Quad> {
    let q = match view.kind {
        PayoffKind::Digital => digital(view, side, c, p),
        PayoffKind::QuantoDomestic => quanto_domestic(view, side, c, p)?,
        PayoffKind::QuantoForeign => quanto_foreign(view, side, c, p)?,
        PayoffKind::Outperformance => outperformance(view, side, c, p)?,
        PayoffKind::Spread => spread(view, side, c, p)?,
        PayoffKind::Custom => return Err(Error::UnsupportedClosedForm("custom")),
    };
    Ok(Quad {
        value: q.value.max(0.0),
        error: q.error,
    })
}

/// Sign assumptions under which the region formulas below are valid.
pub(crate) fn check_assumptions(
    kind: PayoffKind,
    params: &MarketParams,
    k: &MeasureConstants,
    p: f64,
) -> Result<()> {
    let fail = |payoff, condition: String| Err(Error::AssumptionViolated { payoff, condition });
    match kind {
        PayoffKind::QuantoDomestic => {
            let kappa = k.a2 / (p - 1.0) + params.sigma[1];
            if !(kappa > 0.0) {
                return fail(
                    "quanto_domestic",
                    format!("A2/(p-1) + sigma2 > 0, got {kappa:.6e}"),
                );
            }
        }
        PayoffKind::QuantoForeign => {
            let [s1, s2] = params.sigma;
            let g = [k.a1 / (p - 1.0), k.a2 / (p - 1.0) - s2];
            let det = s1 * g[1] - s2 * g[0];
            if !(det.abs() > 1e-10 * s1.hypot(s2) * g[0].hypot(g[1])) {
                return fail(
                    "quanto_foreign",
                    "(sigma1, sigma2) not parallel to (A1/(p-1), A2/(p-1) - sigma2)".into(),
                );
            }
        }
        PayoffKind::Outperformance => {
            if !(k.a1 > 0.0 && k.a2 > 0.0) {
                return fail(
                    "outperformance",
                    format!(
                        "A1 > 0 and A2 > 0, got A1 = {:.6e}, A2 = {:.6e}",
                        k.a1, k.a2
                    ),
                );
            }
        }
        PayoffKind::Spread => {
            if !(k.a1 > 0.0) {
                return fail("spread", format!("A1 > 0, got A1 = {:.6e}", k.a1));
            }
        }
        PayoffKind::Digital | PayoffKind::Custom => {}
    }
    Ok(())
}

/// Exponents `q` and `ln(scale)` of the density term for each side.
fn density_term(side: Side, p: f64) -> (f64, f64, f64) {
    match side {
        // (q, log scale, sign)
        Side::Risk => (p / (p - 1.0), -p.ln(), 1.0),
        Side::Cost => (1.0 / (p - 1.0), 0.0, -1.0),
    }
}

fn digital(view: &View, side: Side, c: f64, p: f64) -> Quad {
    let level = view.level(c);
    let k = view.k.strike;
    let a = view.k.density_coef();
    let [s1, s2] = view.params.sigma;
    let b = HalfPlane::new([s1, -s2], view.thresholds().b);
    // cZ̃ ≤ K^{p−1} ⇔ A·w ≥ L − (p−1) ln K
    let inside = HalfPlane::new(a, level - (p - 1.0) * k.ln());
    let (q, ls, sign) = density_term(side, p);
    let density = ExpTerm::from_log(sign, q * level + ls, [-q * a[0], -q * a[1]]);
    let cov = view.cov();
    match side {
        Side::Risk => {
            let outside = polygon_expectation(
                cov,
                &[b, inside.flip()],
                &[ExpTerm::new(k.powf(p) / p, [0.0, 0.0])],
                view.quad,
            );
            let tail = if level == f64::INFINITY {
                Quad::default()
            } else {
                polygon_expectation(cov, &[b, inside], &[density], view.quad)
            };
            outside + tail
        }
        Side::Cost => {
            if level == f64::INFINITY {
                return Quad::default();
            }
            polygon_expectation(
                cov,
                &[b, inside],
                &[ExpTerm::new(k, [0.0, 0.0]), density],
                view.quad,
            )
        }
    }
}

/// Outer `w₁ = u ≥ a₁`; `A_c` is `w₂ ≥ w(u)` with
/// `w(u) = [L − A₁u − (p−1) ln(e₂(S¹(u) − K))] / (A₂ + (p−1)σ₂)`.
fn quanto_domestic(view: &View, side: Side, c: f64, p: f64) -> Result<Quad> {
    check_assumptions(view.kind, view.params, view.k, p)?;
    let level = view.level(c);
    let [s1, s2] = view.params.sigma;
    let [a1, a2] = view.k.density_coef();
    let (e1, e2) = (view.base(0), view.base(1));
    let k = view.k.strike;
    let kappa = a2 + (p - 1.0) * s2;
    let (q, ls, sign) = density_term(side, p);
    let frame = Frame::first(view.cov());
    let s = frame.inner_sd;
    let (_, hi) = frame.outer_box(&[[p * s1, p * s2], [s1, s2], [-q * a1, -q * a2]], view.quad);
    let lo = view.thresholds().a1;
    Ok(frame.integrate(
        |u| {
            let intrinsic = e1 * (s1 * u).exp() - k;
            if !(intrinsic > 0.0) {
                return 0.0;
            }
            let lh = (e2 * intrinsic).ln(); // ln H = lh + σ₂ w₂
            let w = (level - a1 * u - (p - 1.0) * lh) / kappa;
            let m = frame.inner_mean(u);
            let dens = sign
                * weighted(
                    q * (level - a1 * u) + ls,
                    tilted_mass(m, s, -q * a2, w, f64::INFINITY),
                );
            match side {
                Side::Risk => {
                    weighted(
                        p * lh - p.ln(),
                        tilted_mass(m, s, p * s2, f64::NEG_INFINITY, w),
                    ) + dens
                }
                Side::Cost => weighted(lh, tilted_mass(m, s, s2, w, f64::INFINITY)) + dens,
            }
        },
        lo,
        hi,
        &[],
        view.quad,
    ))
}

/// Outer `y = σ₁w₁ + σ₂w₂ ≥ d`, inner `x = g·w` with
/// `g = (A₁/(p−1), A₂/(p−1) − σ₂)`. With `G(y) = (e₁e₂eʸ − K)/e₂` the claim is
/// `G(y)·e^{−σ₂w₂}` and `A_c` is `x ≥ L/(p−1) − ln G(y)`.
fn quanto_foreign(view: &View, side: Side, c: f64, p: f64) -> Result<Quad> {
    check_assumptions(view.kind, view.params, view.k, p)?;
    let level = view.level(c);
    let [s1, s2] = view.params.sigma;
    let a = view.k.density_coef();
    let (e1, e2) = (view.base(0), view.base(1));
    let k = view.k.strike;
    let g = [a[0] / (p - 1.0), a[1] / (p - 1.0) - s2];
    let frame = Frame::new(view.cov(), [s1, s2], g).ok_or_else(|| Error::AssumptionViolated {
        payoff: "quanto_foreign",
        condition: "a nondegenerate (sigma.w, g.w) frame".into(),
    })?;
    let (w2u, w2v) = frame.split([0.0, 1.0]);
    let (au, av) = frame.split(a);
    let (q, ls, sign) = density_term(side, p);
    let s = frame.inner_sd;
    let (_, hi) = frame.outer_box(
        &[[p * s1, 0.0], [s1, 0.0], [-q * a[0], -q * a[1]]],
        view.quad,
    );
    let lo = view.thresholds().d;
    Ok(frame.integrate(
        |y| {
            let gy = (e1 * e2 * y.exp() - k) / e2;
            if !(gy > 0.0) {
                return 0.0;
            }
            let lg = gy.ln();
            let thr = level / (p - 1.0) - lg;
            let m = frame.inner_mean(y);
            let dens = sign
                * weighted(
                    q * (level - au * y) + ls,
                    tilted_mass(m, s, -q * av, thr, f64::INFINITY),
                );
            match side {
                Side::Risk => {
                    weighted(
                        p * (lg - s2 * w2u * y) - p.ln(),
                        tilted_mass(m, s, -p * s2 * w2v, f64::NEG_INFINITY, thr),
                    ) + dens
                }
                Side::Cost => {
                    weighted(
                        lg - s2 * w2u * y,
                        tilted_mass(m, s, -s2 * w2v, thr, f64::INFINITY),
                    ) + dens
                }
            }
        },
        lo,
        hi,
        &[],
        view.quad,
    ))
}

/// Two regions: `{S¹ ≥ S², S¹ > K}` with outer `w₁` and `{S² > S¹, S² > K}`
/// with outer `w₂`. In each, `A_c` is a lower bound on the inner coordinate.
fn outperformance(view: &View, side: Side, c: f64, p: f64) -> Result<Quad> {
    check_assumptions(view.kind, view.params, view.k, p)?;
    let level = view.level(c);
    let [s1, s2] = view.params.sigma;
    let a = view.k.density_coef();
    let th = view.thresholds();
    let b = th.b;
    let k = view.k.strike;
    let (q, ls, sign) = density_term(side, p);
    let cov = view.cov();
    // (outer index, outer threshold, inner cap = cap0 + cap1·u)
    let regions = [
        (0usize, th.a1, -b / s2, s1 / s2),
        (1usize, th.a2, b / s1, s2 / s1),
    ];
    let mut total = Quad::default();
    for (i, lo, cap0, cap1) in regions {
        let j = 1 - i;
        let frame = if i == 0 {
            Frame::first(cov)
        } else {
            Frame::second(cov)
        };
        let (ai, aj) = (a[i], a[j]);
        let base = view.base(i);
        let si = view.params.sigma[i];
        let mut rate_p = [0.0; 2];
        rate_p[i] = p * si;
        let mut rate_1 = [0.0; 2];
        rate_1[i] = si;
        let (_, hi) = frame.outer_box(&[rate_p, rate_1, [-q * a[0], -q * a[1]]], view.quad);
        let s = frame.inner_sd;
        total = total
            + frame.integrate(
                |u| {
                    let intrinsic = base * (si * u).exp() - k;
                    if !(intrinsic > 0.0) {
                        return 0.0;
                    }
                    let li = intrinsic.ln();
                    let cap = cap0 + cap1 * u;
                    let v = (level - ai * u - (p - 1.0) * li) / aj;
                    let m = frame.inner_mean(u);
                    let dens = sign
                        * weighted(
                            q * (level - ai * u) + ls,
                            tilted_mass(m, s, -q * aj, v, cap),
                        );
                    match side {
                        Side::Risk => {
                            weighted(
                                p * li - p.ln(),
                                tilted_mass(m, s, 0.0, f64::NEG_INFINITY, v.min(cap)),
                            ) + dens
                        }
                        Side::Cost => weighted(li, tilted_mass(m, s, 0.0, v, cap)) + dens,
                    }
                },
                lo,
                hi,
                &[],
                view.quad,
            );
    }
    Ok(total)
}

/// Slice of the spread region at `w₂ = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadRegion {
    /// `d(y)`: the claim is positive for `w₁ > d(y)`.
    pub lower: f64,
    /// `x*(y)`: start of `𝒜(y) = [x*, ∞)`; `ℬ(y) = [d(y), x*)`.
    pub crossing: f64,
}

impl SpreadRegion {
    pub fn in_a(&self, x: f64) -> bool {
        x >= self.crossing
    }

    pub fn in_b(&self, x: f64) -> bool {
        x >= self.lower && x < self.crossing
    }
}

/// Compute `d(y)` and the crossing point of
/// `(L − A₁x − A₂y)/(p−1) = ln(S¹(x) − S²(y) − K)` by bisection to 1e-12.
pub fn spread_region_boundary(
    constants: &MeasureConstants,
    params: &MarketParams,
    measure: Measure,
    c: f64,
    p: f64,
    y: f64,
) -> Result<SpreadRegion> {
    if !(constants.a1 > 0.0) {
        return Err(Error::AssumptionViolated {
            payoff: "spread",
            condition: format!("A1 > 0, got A1 = {:.6e}", constants.a1),
        });
    }
    let level = constants.level(measure, c);
    Ok(spread_slice(
        constants.density_coef(),
        params.sigma[0],
        params.forward_base(measure, 0),
        params.forward_base(measure, 1) * (params.sigma[1] * y).exp() + constants.strike,
        level,
        p,
        y,
    ))
}

fn spread_slice(
    a: [f64; 2],
    s1: f64,
    e1: f64,
    other: f64,
    level: f64,
    p: f64,
    y: f64,
) -> SpreadRegion {
    let lower = (other / e1).ln() / s1;
    if level == f64::NEG_INFINITY {
        return SpreadRegion {
            lower,
            crossing: lower,
        };
    }
    if level == f64::INFINITY {
        return SpreadRegion {
            lower,
            crossing: f64::INFINITY,
        };
    }
    // positive strictly left of the crossing, decreasing in x
    let gap = |x: f64| {
        let ln_claim = s1 * x + e1.ln() + (-(other / e1) * (-s1 * x).exp()).ln_1p();
        (level - a[0] * x - a[1] * y) / (p - 1.0) - ln_claim
    };
    let mut lo = lower;
    let mut step = 1.0_f64.max(lower.abs());
    let mut hi = lower + step;
    let mut found = false;
    for _ in 0..200 {
        if !(gap(hi) > 0.0) {
            found = true;
            break;
        }
        lo = hi;
        step *= 2.0;
        hi = lower + step;
    }
    if !found {
        return SpreadRegion {
            lower,
            crossing: f64::INFINITY,
        };
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    SpreadRegion {
        lower,
        crossing: hi,
    }
}

/// Outer `w₂ = y`, inner `w₁ = x`: `ℬ(y) = [d(y), x*)`, `𝒜(y) = [x*, ∞)`.
fn spread(view: &View, side: Side, c: f64, p: f64) -> Result<Quad> {
    check_assumptions(view.kind, view.params, view.k, p)?;
    let level = view.level(c);
    let [s1, s2] = view.params.sigma;
    let a = view.k.density_coef();
    let (e1, e2) = (view.base(0), view.base(1));
    let k = view.k.strike;
    let (q, ls, sign) = density_term(side, p);
    let frame = Frame::second(view.cov());
    let s = frame.inner_sd;
    let (lo, hi) = frame.outer_box(
        &[[p * s1, 0.0], [s1, 0.0], [0.0, s2], [-q * a[0], -q * a[1]]],
        view.quad,
    );
    let inner_cfg = QuadConfig {
        rel_tol: view.quad.rel_tol * 0.1,
        ..*view.quad
    };
    let width = view.quad.truncation_sd;
    Ok(frame.integrate(
        |y| {
            let other = e2 * (s2 * y).exp() + k;
            let region = spread_slice(a, s1, e1, other, level, p, y);
            let x_star = region.crossing;
            let m = frame.inner_mean(y);
            let dens = if x_star.is_finite() {
                sign * weighted(
                    q * (level - a[1] * y) + ls,
                    tilted_mass(m, s, -q * a[0], x_star, f64::INFINITY),
                )
            } else {
                0.0
            };
            match side {
                Side::Risk => {
                    let from = region.lower.max(m - width * s);
                    let to = x_star.min(m + p * s1 * s * s + width * s);
                    let shortfall = if from < to {
                        integrate(
                            |x| {
                                let h = e1 * (s1 * x).exp() - other;
                                if h > 0.0 {
                                    h.powf(p) * std_pdf((x - m) / s) / s
                                } else {
                                    0.0
                                }
                            },
                            from,
                            to,
                            &inner_cfg,
                        )
                        .value
                    } else {
                        0.0
                    };
                    shortfall / p + dens
                }
                Side::Cost => {
                    if !x_star.is_finite() {
                        return 0.0;
                    }
                    let v = e1 * tilted_mass(m, s, s1, x_star, f64::INFINITY)
                        - other * tilted_mass(m, s, 0.0, x_star, f64::INFINITY);
                    v + dens
                }
            }
        },
        lo,
        hi,
        &[],
        view.quad,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_slice_edges() {
        let r = spread_slice([0.5, 0.2], 0.2, 100.0, 110.0, f64::NEG_INFINITY, 2.0, 0.0);
        assert_eq!(r.crossing, r.lower);
        let r = spread_slice([0.5, 0.2], 0.2, 100.0, 110.0, 1e6, 2.0, 0.0);
        assert!(r.crossing > 100.0);
    }

    #[test]
    fn spread_slice_matches_direct_inequality() {
        let (a, s1, e1, other, level, p, y) = ([0.4, -0.1], 0.25, 100.0, 95.0, 3.0, 2.5, 0.3);
        let r = spread_slice(a, s1, e1, other, level, p, y);
        for i in 0..400 {
            let x = r.lower - 1.0 + i as f64 * 0.01;
            if (x - r.crossing).abs() < 1e-9 {
                continue;
            }
            let claim = e1 * (s1 * x).exp() - other;
            let lhs = ((level - a[0] * x - a[1] * y) / (p - 1.0)).exp();
            let direct = claim > 0.0 && lhs <= claim;
            assert_eq!(r.in_a(x), direct, "x = {x}");
        }
    }
}
