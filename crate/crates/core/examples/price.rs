//! Arbitrage-free prices of the five built-in claims on one market.
//!
//! ```bash
//! cargo run --release --example price
//! ```

use shortfall_hedge::{price, MarketParams, Payoff};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: 0.3,
        r: 0.02,
        maturity: 1.0,
    };
    let claims = [
        Payoff::digital(10.0)?,
        Payoff::quanto_domestic(100.0)?,
        Payoff::quanto_foreign(100.0)?,
        Payoff::outperformance(105.0)?,
        Payoff::spread(5.0)?,
    ];
    for payoff in &claims {
        println!(
            "{:<16} strike {:>7.2}  price {:>10.6}",
            payoff.kind().name(),
            payoff.strike(),
            price(payoff, &m)?
        );
    }
    Ok(())
}
