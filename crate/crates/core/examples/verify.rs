//! Builds the optimal strategy for a third of the price and checks its risk
//! and cost by simulation.

use shortfall_hedge::{verify_risk, LossSpec, MarketParams, McConfig, Payoff, Solver};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: -0.5,
        r: 0.02,
        maturity: 1.0,
    };
    let solver = Solver::quadrature(m, Payoff::spread(5.0)?, LossSpec::Power { p: 2.0 })?;
    let x = solver.price()? / 3.0;
    let r = verify_risk(&solver, x, &McConfig::new(1_000_000, 42))?;
    println!("capital      {:.6} (c = {:.6})", r.x, r.c);
    println!(
        "risk         engine {:.6}  sampled {:.6} ± {:.6}  z = {:+.2}",
        r.engine_risk, r.mc_risk.mean, r.mc_risk.std_error, r.risk_check.z_score
    );
    println!(
        "cost         sampled {:.6} ± {:.6}  z = {:+.2}",
        r.mc_cost.mean, r.mc_cost.std_error, r.budget_check.z_score
    );
    println!("{}", if r.passed { "pass" } else { "FAIL" });
    Ok(())
}
