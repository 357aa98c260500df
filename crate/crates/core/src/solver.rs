//! Inversion of the auxiliary functions and the risk/cost functions built on
//! them.
//!
//! Linear loss: `Φ₁(x) = Ψ₁(0) − Ψ₁(c)` with `Ψ₂(c) = e^{rT}x`, and
//! `Φ₂(v) = e^{−rT}Ψ₂(c)` with `Ψ₁(c) = Ψ₁(0) − v`. Power loss:
//! `Φ₁(x) = Ψ₁ᵖ(c)` with `Ψ₂ᵖ(c) = e^{rT}x`, and `Φ₂(v) = e^{−rT}Ψ₂ᵖ(c)` with
//! `Ψ₁ᵖ(c) = v`.
//!
//! `c = 0` stands for the full hedge and `c = ∞` for hedging nothing.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::market::{MarketParams, Measure};
use crate::mc::{self, McConfig};
use crate::payoffs::Payoff;
use crate::psi::{HedgingProblem, LossSpec, Method, Side};
use crate::quadrature::QuadConfig;

/// Root-finding settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Accepted `|Ψ(c) − target|`, relative to the range of `Ψ`.
    pub abs_tol_target: f64,
    pub max_bracket_expansions: usize,
    pub bisection_iters: usize,
    /// Evaluator for `Ψ`; Monte Carlo uses the run's `McConfig` with a fixed seed.
    pub method: Method,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            abs_tol_target: 1e-9,
            max_bracket_expansions: 200,
            bisection_iters: 200,
            method: Method::Quadrature,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol_target > 0.0) {
            return Err(invalid("solver.abs_tol_target", "must be positive"));
        }
        if self.max_bracket_expansions == 0 || self.bisection_iters == 0 {
            return Err(invalid("solver", "iteration limits must be positive"));
        }
        Ok(())
    }
}

/// Which risk function a curve samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Phi1,
    Phi2,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::Phi1 => "phi1",
            CurveKind::Phi2 => "phi2",
        }
    }
}

/// One evaluation of `Φ₁(x)` or `Φ₂(v)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiPoint {
    pub input: f64,
    pub value: f64,
    /// Modified-claim parameter; `0` is the full hedge, `∞` hedges nothing.
    pub c: f64,
    pub method: Method,
    pub err_estimate: f64,
}

/// A curve point, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub input: f64,
    pub value: f64,
    pub c: f64,
    pub method: Method,
    pub err_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCurve {
    pub loss: LossSpec,
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
}

impl RiskCurve {
    pub fn failed(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.error.is_some())
    }
}

#[derive(Debug, Clone, Copy)]
struct Anchors {
    /// `Ψ₁` at `c = 0` (linear: `E[H]`; power: 0).
    psi1_zero: (f64, f64),
    /// `Ψ₂(0) = Ẽ[H]`.
    psi2_zero: (f64, f64),
    /// `E[H]` (linear) or `E[l(H)]` (power).
    ceiling: (f64, f64),
}

/// `Φ₁`/`Φ₂` for one claim, market and loss.
#[derive(Debug)]
pub struct Solver {
    problem: HedgingProblem,
    loss: LossSpec,
    cfg: SolveConfig,
    mc: McConfig,
    method: Method,
    fallback: Option<String>,
    anchors: OnceLock<std::result::Result<Anchors, Error>>,
}

impl Solver {
    /// Quadrature is used when configured and available; otherwise (custom
    /// payoff, violated sign assumption) the solver falls back to Monte Carlo.
    pub fn new(
        problem: HedgingProblem,
        loss: LossSpec,
        cfg: SolveConfig,
        mc: McConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        loss.validate()?;
        let (method, fallback) = match cfg.method {
            Method::MonteCarlo => (Method::MonteCarlo, None),
            Method::Quadrature => match problem.closed_form_available(loss) {
                Ok(()) => (Method::Quadrature, None),
                Err(e @ (Error::UnsupportedClosedForm(_) | Error::AssumptionViolated { .. })) => {
                    (Method::MonteCarlo, Some(e.to_string()))
                }
                Err(e) => return Err(e),
            },
        };
        if method == Method::MonteCarlo {
            mc.validate()?;
        }
        Ok(Self {
            problem,
            loss,
            cfg,
            mc,
            method,
            fallback,
            anchors: OnceLock::new(),
        })
    }

    /// Quadrature solver with default settings.
    pub fn quadrature(params: MarketParams, payoff: Payoff, loss: LossSpec) -> Result<Self> {
        Self::new(
            HedgingProblem::new(params, payoff)?,
            loss,
            SolveConfig::default(),
            McConfig::default(),
        )
    }

    pub fn problem(&self) -> &HedgingProblem {
        &self.problem
    }
    pub fn loss(&self) -> LossSpec {
        self.loss
    }
    pub fn method(&self) -> Method {
        self.method
    }
    /// Why quadrature was not used, if it was requested but unavailable.
    pub fn fallback_reason(&self) -> Option<&str> {
        self.fallback.as_deref()
    }

    /// `(value, error)` of one auxiliary function.
    pub fn eval(&self, side: Side, c: f64) -> Result<(f64, f64)> {
        match self.method {
            Method::Quadrature => {
                let q = self.problem.psi_side(self.loss, side, c)?;
                Ok((q.value, q.error))
            }
            Method::MonteCarlo => {
                let e = self.problem.psi_side_mc(self.loss, side, c, &self.mc)?;
                Ok((e.mean, e.std_error))
            }
        }
    }

    fn anchors(&self) -> Result<Anchors> {
        self.anchors
            .get_or_init(|| {
                let psi1_zero = self.eval(Side::Risk, 0.0)?;
                let psi2_zero = self.eval(Side::Cost, 0.0)?;
                let ceiling = match self.loss {
                    LossSpec::Linear => psi1_zero,
                    LossSpec::Power { .. } => self.eval(Side::Risk, f64::INFINITY)?,
                };
                Ok(Anchors {
                    psi1_zero,
                    psi2_zero,
                    ceiling,
                })
            })
            .clone()
    }

    /// `p(H) = e^{−rT}Ψ₂(0)`.
    pub fn price(&self) -> Result<f64> {
        Ok(self.problem.params().discount() * self.anchors()?.psi2_zero.0)
    }

    /// `E[H]` under `P`.
    pub fn expected_claim(&self) -> Result<f64> {
        match self.loss {
            LossSpec::Linear => Ok(self.anchors()?.psi1_zero.0),
            LossSpec::Power { .. } => Ok(self
                .problem
                .psi_side(LossSpec::Linear, Side::Risk, 0.0)?
                .value),
        }
    }

    /// `E[l(H)]`: the risk of not hedging at all.
    pub fn risk_ceiling(&self) -> Result<f64> {
        Ok(self.anchors()?.ceiling.0)
    }

    fn tolerance(&self, scale: f64) -> f64 {
        self.cfg.abs_tol_target * scale.abs().max(f64::MIN_POSITIVE)
    }

    /// Smallest `c` with `Ψ₂(c) = target`.
    pub fn invert_psi2(&self, target: f64) -> Result<f64> {
        let a = self.anchors()?;
        self.invert(Side::Cost, target, false, a.psi2_zero.0, 0.0)
    }

    /// Smallest `c` with `Ψ₁(c) = target`.
    pub fn invert_psi1(&self, target: f64) -> Result<f64> {
        let a = self.anchors()?;
        match self.loss {
            LossSpec::Linear => self.invert(Side::Risk, target, false, a.psi1_zero.0, 0.0),
            LossSpec::Power { .. } => self.invert(Side::Risk, target, true, 0.0, a.ceiling.0),
        }
    }

    /// Bisection in `ln c` keeping `Ψ(lo)` short of `target` and `Ψ(hi)` at or
    /// past it, so a flat stretch resolves to its left end.
    fn invert(
        &self,
        side: Side,
        target: f64,
        increasing: bool,
        at_zero: f64,
        at_inf: f64,
    ) -> Result<f64> {
        let (lo_v, hi_v) = if increasing {
            (at_zero, at_inf)
        } else {
            (at_inf, at_zero)
        };
        let tol = self.tolerance(hi_v - lo_v);
        if !(target >= lo_v - tol && target <= hi_v + tol) {
            return Err(Error::OutOfRange {
                target,
                lo: lo_v,
                hi: hi_v,
            });
        }
        // edges and the clamp band around them
        let zero_edge = if increasing {
            target <= at_zero
        } else {
            target >= at_zero
        };
        if zero_edge {
            return Ok(0.0);
        }
        let inf_edge = if increasing {
            target >= at_inf
        } else {
            target <= at_inf
        };
        if inf_edge {
            return Ok(f64::INFINITY);
        }
        if self.loss == LossSpec::Linear && self.problem.constants().is_degenerate() {
            return Err(Error::InfeasibleInversion(
                "density is constant (all drifts equal the rate): the auxiliary function is a \
                 step at c = 1 and interior targets are not attained"
                    .into(),
            ));
        }
        let reached = |v: f64| if increasing { v >= target } else { v <= target };
        let f = |c: f64| self.eval(side, c);

        let mut hi = 1.0_f64;
        let mut lo;
        let mut steps = 0;
        let mut f_hi = f(hi)?;
        if reached(f_hi.0) {
            lo = 0.5;
            loop {
                let v = f(lo)?;
                if !reached(v.0) {
                    break;
                }
                hi = lo;
                f_hi = v;
                lo *= 0.5;
                steps += 1;
                if steps >= self.cfg.max_bracket_expansions {
                    lo = 0.0;
                    break;
                }
            }
        } else {
            loop {
                lo = hi;
                hi *= 2.0;
                f_hi = f(hi)?;
                if reached(f_hi.0) {
                    break;
                }
                steps += 1;
                if steps >= self.cfg.max_bracket_expansions {
                    return Err(Error::InfeasibleInversion(format!(
                        "no bracket for target {target} up to c = {hi:e} (value there {})",
                        f_hi.0
                    )));
                }
            }
        }
        let mut f_lo = None;
        for _ in 0..self.cfg.bisection_iters {
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            if !(mid > lo && mid < hi) || (lo > 0.0 && hi / lo - 1.0 < 1e-14) {
                break;
            }
            let v = f(mid)?;
            if reached(v.0) {
                hi = mid;
                f_hi = v;
            } else {
                lo = mid;
                f_lo = Some(v);
            }
        }
        if (f_hi.0 - target).abs() <= tol + f_hi.1 {
            return Ok(hi);
        }
        let below = match f_lo {
            Some(v) => v.0,
            None => f(lo)?.0,
        };
        Err(Error::InfeasibleInversion(format!(
            "auxiliary function jumps across target {target} near c = {hi:e} \
             (from {below} to {})",
            f_hi.0
        )))
    }

    /// Minimal risk with initial capital `x`.
    pub fn phi1(&self, x: f64) -> Result<PhiPoint> {
        if !(x >= 0.0) {
            return Err(invalid("x", format!("must be nonnegative, got {x}")));
        }
        let a = self.anchors()?;
        let price = self.price()?;
        let point = |value: f64, c: f64, err: f64| PhiPoint {
            input: x,
            value: value.max(0.0),
            c,
            method: self.method,
            err_estimate: err,
        };
        if x >= price {
            return Ok(point(0.0, 0.0, 0.0));
        }
        let growth = 1.0 / self.problem.params().discount();
        let c = self.invert_psi2(x * growth)?;
        match self.loss {
            LossSpec::Linear => {
                let (v, e) = if c.is_infinite() {
                    (0.0, 0.0)
                } else {
                    self.eval(Side::Risk, c)?
                };
                Ok(point(a.psi1_zero.0 - v, c, a.psi1_zero.1 + e))
            }
            LossSpec::Power { .. } => {
                let (v, e) = if c.is_infinite() {
                    a.ceiling
                } else {
                    self.eval(Side::Risk, c)?
                };
                Ok(point(v, c, e))
            }
        }
    }

    /// Minimal capital keeping the risk at or below `v`.
    pub fn phi2(&self, v: f64) -> Result<PhiPoint> {
        if !(v >= 0.0) {
            return Err(invalid("v", format!("must be nonnegative, got {v}")));
        }
        let a = self.anchors()?;
        let df = self.problem.params().discount();
        let point = |value: f64, c: f64, err: f64| PhiPoint {
            input: v,
            value: value.max(0.0),
            c,
            method: self.method,
            err_estimate: err,
        };
        if v >= a.ceiling.0 {
            return Ok(point(0.0, f64::INFINITY, 0.0));
        }
        if v == 0.0 {
            return Ok(point(df * a.psi2_zero.0, 0.0, df * a.psi2_zero.1));
        }
        let c = match self.loss {
            LossSpec::Linear => self.invert_psi1(a.psi1_zero.0 - v)?,
            LossSpec::Power { .. } => self.invert_psi1(v)?,
        };
        if c.is_infinite() {
            return Ok(point(0.0, c, 0.0));
        }
        let (w, e) = self.eval(Side::Cost, c)?;
        Ok(point(df * w, c, df * e))
    }

    pub fn phi(&self, kind: CurveKind, input: f64) -> Result<PhiPoint> {
        match kind {
            CurveKind::Phi1 => self.phi1(input),
            CurveKind::Phi2 => self.phi2(input),
        }
    }

    /// Pointwise `Φ` on a grid, in parallel; failures are recorded per point.
    pub fn curve(&self, kind: CurveKind, grid: &[f64]) -> Result<RiskCurve> {
        if grid.iter().any(|x| !(*x >= 0.0)) {
            return Err(invalid("grid", "entries must be nonnegative"));
        }
        if grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("grid", "must be sorted ascending"));
        }
        self.anchors()?;
        let points = grid
            .par_iter()
            .map(|&x| match self.phi(kind, x) {
                Ok(p) => CurvePoint {
                    input: p.input,
                    value: p.value,
                    c: p.c,
                    method: p.method,
                    err_estimate: p.err_estimate,
                    error: None,
                },
                Err(e) => CurvePoint {
                    input: x,
                    value: f64::NAN,
                    c: f64::NAN,
                    method: self.method,
                    err_estimate: f64::NAN,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        Ok(RiskCurve {
            loss: self.loss,
            kind,
            points,
        })
    }
}

/// Tail share above which a price is rejected as not integrable.
pub const HEAVY_TAIL_TOL: f64 = 1e-6;

/// `p(H) = Ẽ[e^{−rT}H]`.
///
/// Named payoffs are integrated on the default truncation box and again on
/// a box four deviations wider; a relative change above [`HEAVY_TAIL_TOL`]
/// is reported as a heavy tail. Custom payoffs are priced by Monte Carlo
/// with `McConfig::default()`.
pub fn price(payoff: &Payoff, params: &MarketParams) -> Result<f64> {
    let problem = HedgingProblem::new(*params, payoff.clone())?;
    if !problem.has_closed_form() {
        return Ok(price_mc(&problem, &McConfig::default())?.0);
    }
    price_checked(&problem)
}

pub(crate) fn price_checked(problem: &HedgingProblem) -> Result<f64> {
    let df = problem.params().discount();
    let base = problem.psi_side(LossSpec::Linear, Side::Cost, 0.0)?.value;
    let wide_cfg: QuadConfig = problem
        .quad()
        .with_truncation(problem.quad().truncation_sd + 4.0);
    let wide = problem
        .clone()
        .with_quad(wide_cfg)
        .psi_side(LossSpec::Linear, Side::Cost, 0.0)?
        .value;
    let scale = wide.abs().max(f64::MIN_POSITIVE);
    let tail = (wide - base).abs() / scale;
    if wide != 0.0 && tail > HEAVY_TAIL_TOL {
        return Err(Error::HeavyTail {
            relative_tail: tail,
        });
    }
    Ok(df * base)
}

/// Discounted Monte Carlo price with its standard error.
pub fn price_mc(problem: &HedgingProblem, cfg: &McConfig) -> Result<(f64, f64)> {
    let df = problem.params().discount();
    let payoff = problem.payoff();
    let e = mc::estimate(problem.params(), Measure::RiskNeutral, cfg, 0, |s| {
        Ok(df * payoff.evaluate(s.s[0], s.s[1])?)
    })?;
    Ok((e.mean, e.std_error))
}

/// Smallest `c` with `Ψ₂(c) = target` by quadrature.
pub fn invert_psi2(
    payoff: &Payoff,
    params: &MarketParams,
    loss: LossSpec,
    target: f64,
) -> Result<f64> {
    Solver::quadrature(*params, payoff.clone(), loss)?.invert_psi2(target)
}

/// Smallest `c` with `Ψ₁(c) = target` by quadrature.
pub fn invert_psi1(
    payoff: &Payoff,
    params: &MarketParams,
    loss: LossSpec,
    target: f64,
) -> Result<f64> {
    Solver::quadrature(*params, payoff.clone(), loss)?.invert_psi1(target)
}

/// `(Φ₁(x), c)`.
pub fn phi1(payoff: &Payoff, params: &MarketParams, loss: LossSpec, x: f64) -> Result<(f64, f64)> {
    let p = Solver::quadrature(*params, payoff.clone(), loss)?.phi1(x)?;
    Ok((p.value, p.c))
}

/// `(Φ₂(v), c)`.
pub fn phi2(payoff: &Payoff, params: &MarketParams, loss: LossSpec, v: f64) -> Result<(f64, f64)> {
    let p = Solver::quadrature(*params, payoff.clone(), loss)?.phi2(v)?;
    Ok((p.value, p.c))
}

/// `Φ₁` or `Φ₂` on a grid.
pub fn curve(
    payoff: &Payoff,
    params: &MarketParams,
    loss: LossSpec,
    kind: CurveKind,
    grid: &[f64],
) -> Result<RiskCurve> {
    Solver::quadrature(*params, payoff.clone(), loss)?.curve(kind, grid)
}
