//! Two-asset correlated Black–Scholes market and the change to the
//! martingale measure.
//!
//! Under `P` the Wiener vector `W_T` is `N₂(0, QT)`; under `P̃` the shifted
//! vector `W̃_T = W_T + θT`, `θᵢ = (αᵢ − r)/σᵢ`, has the same law. The density
//! `Z̃_T = dP̃/dP` is written in either coordinate system as
//!
//! ```text
//! Z̃_T = exp(−A₁W¹ − A₂W² − B T) = exp(−A₁W̃¹ − A₂W̃² − B̃ T)
//! ```
//!
//! with `A = Q⁻¹θ`, `B = ½ θᵀQ⁻¹θ` and `B̃ = B − A·θ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianLaw;

/// Largest accepted |ρ|; the explicit inverse of `Q` is used below that.
pub const MAX_ABS_RHO: f64 = 0.9999;

/// Which probability measure a set of Wiener coordinates refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// The real-world measure `P`.
    Physical,
    /// The martingale measure `P̃`.
    RiskNeutral,
}

/// Parameters of the two-asset model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    /// Initial prices `S¹₀, S²₀`.
    pub s0: [f64; 2],
    /// Drifts per year.
    pub alpha: [f64; 2],
    /// Volatilities per √year.
    pub sigma: [f64; 2],
    /// Instantaneous correlation of the two Wiener processes.
    pub rho: f64,
    /// Risk-free rate per year.
    pub r: f64,
    /// Maturity in years.
    #[serde(rename = "T", alias = "maturity")]
    pub maturity: f64,
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        let finite = self
            .s0
            .iter()
            .chain(&self.alpha)
            .chain(&self.sigma)
            .chain([&self.rho, &self.r, &self.maturity])
            .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("market", "all parameters must be finite"));
        }
        if self.s0.iter().any(|&s| s <= 0.0) {
            return Err(invalid("s0", "initial prices must be positive"));
        }
        if self.sigma.iter().any(|&s| s <= 0.0) {
            return Err(invalid("sigma", "volatilities must be positive"));
        }
        if self.maturity <= 0.0 {
            return Err(invalid("T", "maturity must be positive"));
        }
        if self.rho.abs() > MAX_ABS_RHO {
            return Err(Error::InvalidCorrelation { rho: self.rho });
        }
        Ok(())
    }

    /// Market prices of risk `θᵢ = (αᵢ − r)/σᵢ`.
    pub fn theta(&self) -> [f64; 2] {
        [
            (self.alpha[0] - self.r) / self.sigma[0],
            (self.alpha[1] - self.r) / self.sigma[1],
        ]
    }

    /// Drift of asset `i` under the given measure.
    pub fn drift(&self, measure: Measure, i: usize) -> f64 {
        match measure {
            Measure::Physical => self.alpha[i],
            Measure::RiskNeutral => self.r,
        }
    }

    /// `S^i₀·exp((μᵢ − σᵢ²/2)T)`, the terminal price at `w = 0`.
    pub fn forward_base(&self, measure: Measure, i: usize) -> f64 {
        let s = self.sigma[i];
        self.s0[i] * ((self.drift(measure, i) - 0.5 * s * s) * self.maturity).exp()
    }

    pub fn discount(&self) -> f64 {
        (-self.r * self.maturity).exp()
    }
}

/// `S^i_T` for Wiener coordinate `w` of asset `i ∈ {1, 2}` under `under`.
pub fn terminal_price(params: &MarketParams, asset: usize, w: f64, under: Measure) -> f64 {
    assert!(asset == 1 || asset == 2, "asset index is 1 or 2");
    let i = asset - 1;
    params.forward_base(under, i) * (params.sigma[i] * w).exp()
}

/// Law of `W_T` under `P` (or of `W̃_T` under `P̃`): `N₂(0, QT)`.
pub fn wiener_law(params: &MarketParams, _under: Measure) -> GaussianLaw {
    let t = params.maturity;
    GaussianLaw::bivariate([0.0, 0.0], [[t, params.rho * t], [params.rho * t, t]])
        .expect("validated correlation gives a positive definite covariance")
}

/// Strike-dependent thresholds turning price events into half-planes in
/// Wiener coordinates. Entries without suffix are in `P` coordinates,
/// `_tilde` in `P̃` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// `{S¹_T ≥ K} = {W¹ ≥ a₁}`.
    pub a1: f64,
    pub a1_tilde: f64,
    /// `{S²_T ≥ K} = {W² ≥ a₂}`.
    pub a2: f64,
    pub a2_tilde: f64,
    /// `{S¹_T ≥ S²_T} = {σ₁W¹ − σ₂W² ≥ b}` (strike free).
    pub b: f64,
    pub b_tilde: f64,
    /// `{S¹_T S²_T ≥ K} = {σ₁W¹ + σ₂W² ≥ d}`.
    pub d: f64,
    pub d_tilde: f64,
}

impl Thresholds {
    /// Named entries, in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("a1", self.a1),
            ("a1_tilde", self.a1_tilde),
            ("a2", self.a2),
            ("a2_tilde", self.a2_tilde),
            ("b", self.b),
            ("b_tilde", self.b_tilde),
            ("d", self.d),
            ("d_tilde", self.d_tilde),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries()
            .into_iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v)
    }
}

/// Scalars of the measure change plus the thresholds for one strike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureConstants {
    /// `A₁`.
    pub a1: f64,
    /// `A₂`.
    pub a2: f64,
    /// `B`.
    pub b_cap: f64,
    /// `B̃`.
    pub b_cap_tilde: f64,
    pub strike: f64,
    pub maturity: f64,
    pub thresholds: Thresholds,
}

impl MeasureConstants {
    /// `(A₁, A₂)`.
    pub fn density_coef(&self) -> [f64; 2] {
        [self.a1, self.a2]
    }

    /// `B` or `B̃`.
    pub fn density_shift(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Physical => self.b_cap,
            Measure::RiskNeutral => self.b_cap_tilde,
        }
    }

    /// `Z̃_T ≡ 1` (drifts equal to the rate).
    pub fn is_degenerate(&self) -> bool {
        self.a1 == 0.0 && self.a2 == 0.0
    }

    /// `ln c − B T` (or `ln c − B̃ T`): `{Z̃⁻¹ ≥ c} = {A·W ≥ this}`.
    pub fn level(&self, measure: Measure, c: f64) -> f64 {
        c.ln() - self.density_shift(measure) * self.maturity
    }
}

/// Compute every constant for `params` and `strike` (`strike = 0` maps the
/// strike thresholds to −∞).
pub fn derive_constants(params: &MarketParams, strike: f64) -> Result<MeasureConstants> {
    params.validate()?;
    if !(strike >= 0.0) || !strike.is_finite() {
        return Err(invalid("strike", "must be finite and nonnegative"));
    }
    let [t1, t2] = params.theta();
    let rho = params.rho;
    let det = 1.0 - rho * rho;
    // Q⁻¹ = [[1, −ρ], [−ρ, 1]] / (1 − ρ²)
    let a1 = (t1 - rho * t2) / det;
    let a2 = (t2 - rho * t1) / det;
    // θᵀQ⁻¹θ as a quadratic form
    let b_cap = 0.5 * (t1 * a1 + t2 * a2);
    let b_cap_tilde = b_cap - a1 * t1 - a2 * t2;

    let t = params.maturity;
    let [s1, s2] = params.sigma;
    let [x1, x2] = params.s0;
    let [al1, al2] = params.alpha;
    let r = params.r;
    let lk = strike.ln();
    let thresholds = Thresholds {
        a1: ((lk - x1.ln()) - (al1 - 0.5 * s1 * s1) * t) / s1,
        a1_tilde: ((lk - x1.ln()) - (r - 0.5 * s1 * s1) * t) / s1,
        a2: ((lk - x2.ln()) - (al2 - 0.5 * s2 * s2) * t) / s2,
        a2_tilde: ((lk - x2.ln()) - (r - 0.5 * s2 * s2) * t) / s2,
        b: (x2 / x1).ln() + (al2 - al1 - 0.5 * (s2 * s2 - s1 * s1)) * t,
        b_tilde: (x2 / x1).ln() - 0.5 * (s2 * s2 - s1 * s1) * t,
        d: lk - (x1 * x2).ln() - (al1 + al2 - 0.5 * (s1 * s1 + s2 * s2)) * t,
        d_tilde: lk - (x1 * x2).ln() - (2.0 * r - 0.5 * (s1 * s1 + s2 * s2)) * t,
    };
    Ok(MeasureConstants {
        a1,
        a2,
        b_cap,
        b_cap_tilde,
        strike,
        maturity: t,
        thresholds,
    })
}

/// `Z̃_T` evaluated at Wiener coordinates of the given measure.
pub fn radon_nikodym(constants: &MeasureConstants, w1: f64, w2: f64, under: Measure) -> f64 {
    (-constants.a1 * w1 - constants.a2 * w2 - constants.density_shift(under) * constants.maturity)
        .exp()
}

/// `P` coordinates to `P̃` coordinates: `w̃ = w + θT`.
pub fn to_risk_neutral(params: &MarketParams, w: [f64; 2]) -> [f64; 2] {
    let th = params.theta();
    [
        w[0] + th[0] * params.maturity,
        w[1] + th[1] * params.maturity,
    ]
}
