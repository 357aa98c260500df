//! Terminal payoffs on two assets.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::market::{derive_constants, MarketParams};

/// Contract family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    /// `K·1{S¹ ≥ S²}`.
    Digital,
    /// `S²(S¹ − K)⁺`.
    QuantoDomestic,
    /// `(S¹ − K/S²)⁺`.
    QuantoForeign,
    /// `(max{S¹, S²} − K)⁺`.
    Outperformance,
    /// `(S¹ − S² − K)⁺`.
    Spread,
    /// User-supplied terminal function.
    Custom,
}

impl PayoffKind {
    pub fn name(self) -> &'static str {
        match self {
            PayoffKind::Digital => "digital",
            PayoffKind::QuantoDomestic => "quanto_domestic",
            PayoffKind::QuantoForeign => "quanto_foreign",
            PayoffKind::Outperformance => "outperformance",
            PayoffKind::Spread => "spread",
            PayoffKind::Custom => "custom",
        }
    }

    pub const NAMED: [PayoffKind; 5] = [
        PayoffKind::Digital,
        PayoffKind::QuantoDomestic,
        PayoffKind::QuantoForeign,
        PayoffKind::Outperformance,
        PayoffKind::Spread,
    ];
}

impl fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type CustomFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A claim `H = h(S¹_T, S²_T)`.
#[derive(Clone)]
pub struct Payoff {
    kind: PayoffKind,
    strike: f64,
    custom: Option<Arc<CustomFn>>,
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Payoff")
            .field("kind", &self.kind)
            .field("strike", &self.strike)
            .finish()
    }
}

impl Payoff {
    /// One of the five named contracts; `strike` must be positive.
    pub fn new(kind: PayoffKind, strike: f64) -> Result<Self> {
        if kind == PayoffKind::Custom {
            return Err(invalid("kind", "use Payoff::custom for custom payoffs"));
        }
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(invalid("strike", format!("must be positive, got {strike}")));
        }
        Ok(Self {
            kind,
            strike,
            custom: None,
        })
    }

    pub fn digital(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Digital, strike)
    }
    pub fn quanto_domestic(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::QuantoDomestic, strike)
    }
    pub fn quanto_foreign(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::QuantoForeign, strike)
    }
    pub fn outperformance(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Outperformance, strike)
    }
    pub fn spread(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Spread, strike)
    }

    /// Arbitrary pure function of the terminal prices. Only the Monte Carlo
    /// paths can price it.
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: PayoffKind::Custom,
            strike: 0.0,
            custom: Some(Arc::new(f)),
        }
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    /// `H(s1, s2)`.
    pub fn evaluate(&self, s1: f64, s2: f64) -> Result<f64> {
        let k = self.strike;
        let v = match self.kind {
            PayoffKind::Digital => {
                if s1 >= s2 {
                    k
                } else {
                    0.0
                }
            }
            PayoffKind::QuantoDomestic => s2 * (s1 - k).max(0.0),
            PayoffKind::QuantoForeign => (s1 - k / s2).max(0.0),
            PayoffKind::Outperformance => (s1.max(s2) - k).max(0.0),
            PayoffKind::Spread => (s1 - s2 - k).max(0.0),
            PayoffKind::Custom => {
                let f = self
                    .custom
                    .as_ref()
                    .expect("custom payoff carries a function");
                let v = f(s1, s2);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::PayoffContract { s1, s2, value: v });
                }
                v
            }
        };
        Ok(v)
    }
}

/// Whether the auxiliary functions are guaranteed strictly monotone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub psi1_strictly_monotone: bool,
    pub psi2_strictly_monotone: bool,
    pub reason: String,
}

fn parallel(u: [f64; 2], v: [f64; 2]) -> bool {
    let cross = u[0] * v[1] - u[1] * v[0];
    let scale = (u[0].hypot(u[1])) * (v[0].hypot(v[1]));
    scale == 0.0 || cross.abs() <= 1e-12 * scale
}

/// Strict monotonicity holds when the direction of the payoff's exercise
/// boundary is not parallel to `A = Q⁻¹θ` (then every level band of `Z̃⁻¹`
/// meets `{H > 0}` with positive probability). Both measures are equivalent,
/// so the condition is the same for `Ψ₁` and `Ψ₂`.
pub fn uniqueness_check(payoff: &Payoff, params: &MarketParams) -> Result<UniquenessReport> {
    let [s1, s2] = params.sigma;
    let direction = match payoff.kind() {
        PayoffKind::Digital => Some(([s1, -s2], "(σ₁, −σ₂)")),
        PayoffKind::QuantoDomestic => Some(([s1, 0.0], "(σ₁, 0)")),
        PayoffKind::QuantoForeign => Some(([s1, s2], "(σ₁, σ₂)")),
        _ => None,
    };
    let Some((dir, label)) = direction else {
        return Ok(UniquenessReport {
            psi1_strictly_monotone: false,
            psi2_strictly_monotone: false,
            reason: format!(
                "no uniqueness condition is available for {} payoffs; inversion uses the left endpoint",
                payoff.kind()
            ),
        });
    };
    let k = derive_constants(params, payoff.strike())?;
    let a = k.density_coef();
    let ok = !parallel(dir, a);
    let reason = if ok {
        format!("{label} is not parallel to A = ({:.6}, {:.6})", a[0], a[1])
    } else {
        format!("{label} is parallel to A = ({:.6}, {:.6})", a[0], a[1])
    };
    Ok(UniquenessReport {
        psi1_strictly_monotone: ok,
        psi2_strictly_monotone: ok,
        reason,
    })
}
