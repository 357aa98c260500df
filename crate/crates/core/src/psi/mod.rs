//! Auxiliary functions `Ψ₁`, `Ψ₂` (linear loss) and `Ψ₁ᵖ`, `Ψ₂ᵖ` (power loss).
//!
//! Linear loss uses `A_c = {Z̃⁻¹ ≥ c}`; power loss `l(x) = xᵖ/p` uses
//! `A_c = {cZ̃ ≤ H^{p−1}}`. `Ψ₁` is an expectation under `P` and `Ψ₂` under
//! `P̃`. Both are computed by nested conditional quadrature over the Wiener
//! coordinates of the respective measure; [`HedgingProblem::psi_mc`] is the
//! sampling counterpart used as an oracle and for payoffs without a closed
//! form.

mod linear;
mod power;
pub(crate) mod slice;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::market::{derive_constants, MarketParams, Measure, MeasureConstants, Thresholds};
use crate::mc::{self, Estimate, McConfig, PathState};
use crate::payoffs::{Payoff, PayoffKind};
use crate::quadrature::{Quad, QuadConfig};

pub use power::{spread_region_boundary, SpreadRegion};

/// Loss function applied to the shortfall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossSpec {
    /// `l(x) = x`.
    #[default]
    Linear,
    /// `l(x) = xᵖ/p` with `p > 1`.
    Power { p: f64 },
}

impl LossSpec {
    pub fn power(p: f64) -> Result<Self> {
        let l = LossSpec::Power { p };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Linear => Ok(()),
            LossSpec::Power { p } if p > 1.0 && p.is_finite() => Ok(()),
            LossSpec::Power { p } => Err(invalid("loss.p", format!("must exceed 1, got {p}"))),
        }
    }

    /// `l(x)`.
    pub fn loss(&self, x: f64) -> f64 {
        match *self {
            LossSpec::Linear => x,
            LossSpec::Power { p } => x.powf(p) / p,
        }
    }

    /// `l′(x)`.
    pub fn marginal(&self, x: f64) -> f64 {
        match *self {
            LossSpec::Linear => 1.0,
            LossSpec::Power { p } => x.powf(p - 1.0),
        }
    }

    /// `I = (l′)⁻¹`; only defined for strictly convex losses.
    pub fn inverse_marginal(&self, y: f64) -> Option<f64> {
        match *self {
            LossSpec::Linear => None,
            LossSpec::Power { p } => Some(y.powf(1.0 / (p - 1.0))),
        }
    }

    /// Whether `Ψ₁` increases with `c` (power) rather than decreasing (linear).
    pub fn psi1_increasing(&self) -> bool {
        matches!(self, LossSpec::Power { .. })
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// Which auxiliary function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `Ψ₁`, an expectation under `P`.
    Risk,
    /// `Ψ₂`, an expectation under `P̃`.
    Cost,
}

impl Side {
    pub fn measure(self) -> Measure {
        match self {
            Side::Risk => Measure::Physical,
            Side::Cost => Measure::RiskNeutral,
        }
    }
}

/// `(Ψ₁(c), Ψ₂(c))` with per-component error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiPair {
    pub c: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub method: Method,
    pub psi1_err: f64,
    pub psi2_err: f64,
}

impl PsiPair {
    /// Larger of the two component errors (panel-error sum or one standard error).
    pub fn err_estimate(&self) -> f64 {
        self.psi1_err.max(self.psi2_err)
    }
}

/// Everything below the quadrature routines needs: one measure's drifts,
/// density shift and thresholds.
pub(crate) struct View<'a> {
    pub params: &'a MarketParams,
    pub k: &'a MeasureConstants,
    pub measure: Measure,
    pub kind: PayoffKind,
    pub quad: &'a QuadConfig,
}

impl View<'_> {
    pub fn cov(&self) -> [[f64; 2]; 2] {
        let t = self.params.maturity;
        let c = self.params.rho * t;
        [[t, c], [c, t]]
    }

    pub fn base(&self, i: usize) -> f64 {
        self.params.forward_base(self.measure, i)
    }

    pub fn level(&self, c: f64) -> f64 {
        self.k.level(self.measure, c)
    }

    /// Thresholds of this measure, stored in the un-suffixed fields.
    pub fn thresholds(&self) -> Thresholds {
        let t = self.k.thresholds;
        match self.measure {
            Measure::Physical => t,
            Measure::RiskNeutral => Thresholds {
                a1: t.a1_tilde,
                a2: t.a2_tilde,
                b: t.b_tilde,
                d: t.d_tilde,
                ..t
            },
        }
    }
}

/// A claim in a market: the unit every evaluation works on.
#[derive(Debug, Clone)]
pub struct HedgingProblem {
    params: MarketParams,
    payoff: Payoff,
    constants: MeasureConstants,
    quad: QuadConfig,
}

impl HedgingProblem {
    pub fn new(params: MarketParams, payoff: Payoff) -> Result<Self> {
        let constants = derive_constants(&params, payoff.strike())?;
        Ok(Self {
            params,
            payoff,
            constants,
            quad: QuadConfig::default(),
        })
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }
    pub fn payoff(&self) -> &Payoff {
        &self.payoff
    }
    pub fn constants(&self) -> &MeasureConstants {
        &self.constants
    }
    pub fn quad(&self) -> &QuadConfig {
        &self.quad
    }

    pub fn has_closed_form(&self) -> bool {
        self.payoff.kind() != PayoffKind::Custom
    }

    pub(crate) fn view(&self, side: Side) -> View<'_> {
        View {
            params: &self.params,
            k: &self.constants,
            measure: side.measure(),
            kind: self.payoff.kind(),
            quad: &self.quad,
        }
    }

    /// Errors that make the closed form unavailable for `loss`.
    pub fn closed_form_available(&self, loss: LossSpec) -> Result<()> {
        loss.validate()?;
        if !self.has_closed_form() {
            return Err(Error::UnsupportedClosedForm("custom"));
        }
        if let LossSpec::Power { p } = loss {
            power::check_assumptions(self.payoff.kind(), &self.params, &self.constants, p)?;
        }
        Ok(())
    }

    /// One auxiliary function by quadrature.
    pub fn psi_side(&self, loss: LossSpec, side: Side, c: f64) -> Result<Quad> {
        check_c(c)?;
        self.closed_form_available(loss)?;
        match loss {
            LossSpec::Linear => linear::claim_on_set(&self.view(side), c),
            LossSpec::Power { p } => {
                if c == 0.0 {
                    return match side {
                        Side::Risk => Ok(Quad::default()),
                        Side::Cost => linear::claim_on_set(&self.view(side), 0.0),
                    };
                }
                power::power_side(&self.view(side), side, c, p)
            }
        }
    }

    /// `(Ψ₁(c), Ψ₂(c))` for linear loss.
    pub fn psi_linear(&self, c: f64) -> Result<PsiPair> {
        self.psi(LossSpec::Linear, c)
    }

    /// `(Ψ₁ᵖ(c), Ψ₂ᵖ(c))` for `l(x) = xᵖ/p`.
    pub fn psi_power(&self, c: f64, p: f64) -> Result<PsiPair> {
        self.psi(LossSpec::power(p)?, c)
    }

    pub fn psi(&self, loss: LossSpec, c: f64) -> Result<PsiPair> {
        let one = self.psi_side(loss, Side::Risk, c)?;
        let two = self.psi_side(loss, Side::Cost, c)?;
        Ok(PsiPair {
            c,
            psi1: one.value,
            psi2: two.value,
            method: Method::Quadrature,
            psi1_err: one.error,
            psi2_err: two.error,
        })
    }

    /// Digital linear `Ψ` through the generic half-plane engine instead of the
    /// rectangle probability of `(σ₁w₁ − σ₂w₂, A·w)`.
    pub fn digital_polygon_route(&self, side: Side, c: f64) -> Result<Quad> {
        if self.payoff.kind() != PayoffKind::Digital {
            return Err(invalid("payoff", "only digital payoffs have two routes"));
        }
        check_c(c)?;
        let v = self.view(side);
        Ok(linear::digital_polygon(&v, v.level(c)))
    }

    /// Sampling estimate of one auxiliary function.
    pub fn psi_side_mc(
        &self,
        loss: LossSpec,
        side: Side,
        c: f64,
        cfg: &McConfig,
    ) -> Result<Estimate> {
        check_c(c)?;
        loss.validate()?;
        let payoff = &self.payoff;
        let stream = match side {
            Side::Risk => 1,
            Side::Cost => 2,
        };
        match loss {
            LossSpec::Linear => mc::estimate(
                &self.params,
                side.measure(),
                cfg,
                stream,
                |st: &PathState| {
                    Ok(if 1.0 / st.z >= c {
                        payoff.evaluate(st.s[0], st.s[1])?
                    } else {
                        0.0
                    })
                },
            ),
            LossSpec::Power { p } => {
                let q = 1.0 / (p - 1.0);
                mc::estimate(
                    &self.params,
                    side.measure(),
                    cfg,
                    stream,
                    |st: &PathState| {
                        let h = payoff.evaluate(st.s[0], st.s[1])?;
                        // I(cZ̃) = (cZ̃)^{1/(p−1)}; the optimal partial claim is min(I, H)
                        let cut = if c == 0.0 { 0.0 } else { (c * st.z).powf(q) };
                        Ok(match side {
                            Side::Risk => cut.min(h).powf(p) / p,
                            Side::Cost => (h - cut).max(0.0),
                        })
                    },
                )
            }
        }
    }

    /// `(Ψ₁, Ψ₂)` by sampling; works for every payoff and every `p > 1`.
    pub fn psi_mc(&self, loss: LossSpec, c: f64, cfg: &McConfig) -> Result<PsiPair> {
        let one = self.psi_side_mc(loss, Side::Risk, c, cfg)?;
        let two = self.psi_side_mc(loss, Side::Cost, c, cfg)?;
        Ok(PsiPair {
            c,
            psi1: one.mean,
            psi2: two.mean,
            method: Method::MonteCarlo,
            psi1_err: one.std_error,
            psi2_err: two.std_error,
        })
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 0.0) {
        return Err(invalid("c", format!("must be nonnegative, got {c}")));
    }
    Ok(())
}

/// `(Ψ₁(c), Ψ₂(c))` for linear loss by quadrature.
pub fn psi_linear(payoff: &Payoff, params: &MarketParams, c: f64) -> Result<PsiPair> {
    HedgingProblem::new(*params, payoff.clone())?.psi_linear(c)
}

/// `(Ψ₁ᵖ(c), Ψ₂ᵖ(c))` by quadrature.
pub fn psi_power(payoff: &Payoff, params: &MarketParams, c: f64, p: f64) -> Result<PsiPair> {
    HedgingProblem::new(*params, payoff.clone())?.psi_power(c, p)
}

/// `(Ψ₁, Ψ₂)` by antithetic Monte Carlo with `n` paths.
pub fn psi_mc(
    payoff: &Payoff,
    params: &MarketParams,
    loss: LossSpec,
    c: f64,
    n: usize,
    seed: u64,
) -> Result<PsiPair> {
    let cfg = McConfig {
        n_paths: n,
        seed,
        antithetic: true,
    };
    HedgingProblem::new(*params, payoff.clone())?.psi_mc(loss, c, &cfg)
}
