//! A claim with no closed form (call on the maximum) goes through the
//! sampling path automatically.

use shortfall_hedge::{
    HedgingProblem, LossSpec, MarketParams, McConfig, Payoff, SolveConfig, Solver,
};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: 0.3,
        r: 0.02,
        maturity: 1.0,
    };
    let payoff = Payoff::custom(|a, b| (a.max(b) - 105.0).max(0.0));
    let solver = Solver::new(
        HedgingProblem::new(m, payoff)?,
        LossSpec::Linear,
        SolveConfig::default(),
        McConfig::new(200_000, 5),
    )?;
    println!(
        "method: {} ({})",
        solver.method().name(),
        solver.fallback_reason().unwrap_or("-")
    );
    let ph = solver.price()?;
    println!("price {ph:.4}");
    for frac in [0.25, 0.5, 0.75] {
        let p = solver.phi1(frac * ph)?;
        println!(
            "capital {:>8.4}: risk {:.4} ± {:.4}",
            frac * ph,
            p.value,
            p.err_estimate
        );
    }
    Ok(())
}
