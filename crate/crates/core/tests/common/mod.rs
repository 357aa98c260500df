#![allow(dead_code)]

use shortfall_hedge::mc::{estimate, McConfig};
use shortfall_hedge::{LossSpec, MarketParams, Measure, Payoff, PayoffKind};

/// ρ = 0.3, both `A` coefficients positive.
pub fn base_market() -> MarketParams {
    MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: 0.3,
        r: 0.02,
        maturity: 1.0,
    }
}

/// Three parameter sets with ρ ∈ {−0.5, 0, 0.6}; the last has `A₁ < 0`.
pub fn market_sets() -> [(&'static str, MarketParams); 3] {
    [
        (
            "rho=-0.5",
            MarketParams {
                s0: [100.0, 95.0],
                alpha: [0.08, 0.07],
                sigma: [0.2, 0.25],
                rho: -0.5,
                r: 0.02,
                maturity: 1.0,
            },
        ),
        (
            "rho=0",
            MarketParams {
                s0: [50.0, 55.0],
                alpha: [0.10, 0.05],
                sigma: [0.25, 0.2],
                rho: 0.0,
                r: 0.03,
                maturity: 0.5,
            },
        ),
        (
            "rho=0.6",
            MarketParams {
                s0: [80.0, 75.0],
                alpha: [0.04, 0.07],
                sigma: [0.3, 0.2],
                rho: 0.6,
                r: 0.01,
                maturity: 2.0,
            },
        ),
    ]
}

/// Strikes scaled to the initial prices so every claim is near the money.
pub fn payoffs_for(m: &MarketParams) -> Vec<Payoff> {
    let s = m.s0;
    vec![
        Payoff::digital(10.0).unwrap(),
        Payoff::quanto_domestic(s[0]).unwrap(),
        Payoff::quanto_foreign(s[0]).unwrap(),
        Payoff::outperformance(1.05 * s[0].max(s[1])).unwrap(),
        Payoff::spread(0.05 * s[0]).unwrap(),
    ]
}

pub fn losses() -> [LossSpec; 4] {
    [
        LossSpec::Linear,
        LossSpec::Power { p: 1.5 },
        LossSpec::Power { p: 2.0 },
        LossSpec::Power { p: 3.0 },
    ]
}

/// Symmetric market for exchange-symmetry checks.
pub fn symmetric_market(rho: f64) -> MarketParams {
    MarketParams {
        s0: [100.0, 100.0],
        alpha: [0.07, 0.07],
        sigma: [0.25, 0.25],
        rho,
        r: 0.03,
        maturity: 1.0,
    }
}

/// Five `c` values spread over the bulk of `Z̃⁻¹` (linear) or of
/// `H^{p−1}Z̃⁻¹` on `{H > 0}` (power), both under `P`.
pub fn c_values(payoff: &Payoff, m: &MarketParams, loss: LossSpec) -> Vec<f64> {
    let k = shortfall_hedge::derive_constants(m, payoff.strike()).unwrap();
    match loss {
        LossSpec::Linear => {
            let bt = k.b_cap * m.maturity;
            let sd = (2.0 * bt).sqrt();
            [-1.0, -0.25, 0.5, 1.25, 2.0]
                .iter()
                .map(|z| (bt + z * sd).exp())
                .collect()
        }
        LossSpec::Power { p } => {
            let law = shortfall_hedge::market::wiener_law(m, Measure::Physical);
            let draws = law.sample(20_000, 99);
            let mut xs: Vec<f64> = (0..draws.nrows())
                .filter_map(|i| {
                    let w = [draws[(i, 0)], draws[(i, 1)]];
                    let s1 = shortfall_hedge::market::terminal_price(m, 1, w[0], Measure::Physical);
                    let s2 = shortfall_hedge::market::terminal_price(m, 2, w[1], Measure::Physical);
                    let h = payoff.evaluate(s1, s2).unwrap();
                    let z =
                        shortfall_hedge::market::radon_nikodym(&k, w[0], w[1], Measure::Physical);
                    (h > 0.0).then(|| h.powf(p - 1.0) / z)
                })
                .collect();
            xs.sort_by(f64::total_cmp);
            [0.1, 0.3, 0.5, 0.7, 0.9]
                .iter()
                .map(|q| xs[((xs.len() - 1) as f64 * q) as usize])
                .collect()
        }
    }
}

/// Independent Monte Carlo price `Ẽ[e^{−rT}H]` with its standard error.
pub fn mc_price(payoff: &Payoff, m: &MarketParams, cfg: &McConfig) -> (f64, f64) {
    let df = m.discount();
    let e = estimate(m, Measure::RiskNeutral, cfg, 77, |s| {
        Ok(df * payoff.evaluate(s.s[0], s.s[1])?)
    })
    .unwrap();
    (e.mean, e.std_error)
}

/// Claims whose round trip `Φ₂(Φ₁(x)) = x` is checked.
pub fn round_trip_kinds() -> [PayoffKind; 3] {
    [
        PayoffKind::Digital,
        PayoffKind::Spread,
        PayoffKind::QuantoDomestic,
    ]
}

/// Seed for comparison number `i` of a test, so no two comparisons share a sample.
pub fn seed(test: u64, i: u64) -> u64 {
    shortfall_hedge::rng::derive_seed(test, i)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
