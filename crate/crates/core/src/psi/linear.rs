//! `E[H·1{Z̃⁻¹ ≥ c}]` under either measure.

use nalgebra::DMatrix;

use super::slice::{polygon_expectation, ExpTerm, Frame, HalfPlane};
use super::View;
use crate::error::{Error, Result};
use crate::gaussian::{tilted_mass, GaussianLaw};
use crate::payoffs::PayoffKind;
use crate::quadrature::Quad;

const ONE: [f64; 2] = [0.0, 0.0];

/// Expected claim on `{A·w ≥ ln c − B_m T}` for the named payoffs.
pub(crate) fn claim_on_set(view: &View, c: f64) -> Result<Quad> {
    let level = view.level(c);
    let a = view.k.density_coef();
    let set = HalfPlane::new(a, level);
    let th = view.thresholds();
    let [s1, s2] = view.params.sigma;
    let (e1, e2) = (view.base(0), view.base(1));
    let k = view.k.strike;
    let cfg = view.quad;
    let cov = view.cov();
    let q = match view.kind {
        PayoffKind::Digital => {
            digital_rect(view, level).unwrap_or_else(|| digital_polygon(view, level))
        }
        PayoffKind::QuantoDomestic => polygon_expectation(
            cov,
            &[HalfPlane::new([1.0, 0.0], th.a1), set],
            &[
                ExpTerm::new(e1 * e2, [s1, s2]),
                ExpTerm::new(-k * e2, [0.0, s2]),
            ],
            cfg,
        ),
        PayoffKind::QuantoForeign => polygon_expectation(
            cov,
            &[HalfPlane::new([s1, s2], th.d), set],
            &[
                ExpTerm::new(e1, [s1, 0.0]),
                ExpTerm::new(-k / e2, [0.0, -s2]),
            ],
            cfg,
        ),
        PayoffKind::Outperformance => {
            let first = polygon_expectation(
                cov,
                &[
                    HalfPlane::new([1.0, 0.0], th.a1),
                    HalfPlane::new([s1, -s2], th.b),
                    set,
                ],
                &[ExpTerm::new(e1, [s1, 0.0]), ExpTerm::new(-k, ONE)],
                cfg,
            );
            let second = polygon_expectation(
                cov,
                &[
                    HalfPlane::new([0.0, 1.0], th.a2),
                    HalfPlane::new([s1, -s2], th.b).flip(),
                    set,
                ],
                &[ExpTerm::new(e2, [0.0, s2]), ExpTerm::new(-k, ONE)],
                cfg,
            );
            first + second
        }
        PayoffKind::Spread => spread(view, level),
        PayoffKind::Custom => return Err(Error::UnsupportedClosedForm("custom")),
    };
    Ok(clamp(q))
}

fn clamp(q: Quad) -> Quad {
    Quad {
        value: q.value.max(0.0),
        error: q.error,
    }
}

/// `K·P(X ≥ b, Y ≥ level)` with `(X, Y) = (σ₁w₁ − σ₂w₂, A·w)`; `None` when
/// that pair is degenerate.
pub(crate) fn digital_rect(view: &View, level: f64) -> Option<Quad> {
    if level == f64::INFINITY {
        return Some(Quad::default());
    }
    let [s1, s2] = view.params.sigma;
    let a = view.k.density_coef();
    let law = GaussianLaw::bivariate([0.0, 0.0], view.cov()).ok()?;
    let map = DMatrix::from_row_slice(2, 2, &[s1, -s2, a[0], a[1]]);
    let xy = law.linear_transform(&map).ok()?;
    let q = xy
        .rect_upper_prob_with([view.thresholds().b, level], view.quad)
        .ok()?;
    Some(q.scale(view.k.strike))
}

pub(crate) fn digital_polygon(view: &View, level: f64) -> Quad {
    let [s1, s2] = view.params.sigma;
    polygon_expectation(
        view.cov(),
        &[
            HalfPlane::new([s1, -s2], view.thresholds().b),
            HalfPlane::new(view.k.density_coef(), level),
        ],
        &[ExpTerm::new(view.k.strike, ONE)],
        view.quad,
    )
}

/// Outer `w₂ = y`; for fixed `y` the claim is positive for `w₁ ≥ d(y)`.
fn spread(view: &View, level: f64) -> Quad {
    if level == f64::INFINITY {
        return Quad::default();
    }
    let frame = Frame::second(view.cov());
    let [s1, s2] = view.params.sigma;
    let [a1, a2] = view.k.density_coef();
    let (e1, e2) = (view.base(0), view.base(1));
    let k = view.k.strike;
    let s = frame.inner_sd;
    let (lo, hi) = frame.outer_box(&[[s1, 0.0], [0.0, s2]], view.quad);
    let tiny = 1e-14 * (a1.abs() + a2.abs()).max(1e-300);
    let mut breaks = Vec::new();
    if a1.abs() <= tiny && a2.abs() > tiny && level.is_finite() {
        breaks.push(level / a2);
    }
    frame.integrate(
        |y| {
            let other = e2 * (s2 * y).exp() + k;
            let mut x_lo = (other / e1).ln() / s1;
            let mut x_hi = f64::INFINITY;
            if level.is_finite() {
                if a1 > tiny {
                    x_lo = x_lo.max((level - a2 * y) / a1);
                } else if a1 < -tiny {
                    x_hi = (level - a2 * y) / a1;
                } else if a2 * y < level {
                    return 0.0;
                }
            }
            let m = frame.inner_mean(y);
            let v =
                e1 * tilted_mass(m, s, s1, x_lo, x_hi) - other * tilted_mass(m, s, 0.0, x_lo, x_hi);
            v.max(0.0)
        },
        lo,
        hi,
        &breaks,
        view.quad,
    )
}
