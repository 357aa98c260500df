//! Discretises the Wiener plane and solves the hedging problem as a
//! fractional knapsack, then compares with the continuous solution.

use shortfall_hedge::mc::DEFAULT_GRID;
use shortfall_hedge::{
    brute_force_np, DiscreteState, HedgingProblem, LossSpec, MarketParams, Payoff, Solver,
};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: -0.5,
        r: 0.02,
        maturity: 1.0,
    };
    let payoff = Payoff::digital(10.0)?;
    let state = DiscreteState::build(&HedgingProblem::new(m, payoff.clone())?, DEFAULT_GRID)?;
    let solver = Solver::quadrature(m, payoff, LossSpec::Linear)?;
    let (ph, eh) = (solver.price()?, solver.expected_claim()?);

    println!(
        "{:>8} {:>12} {:>12} {:>8}",
        "budget", "discrete", "continuous", "cells"
    );
    for i in 1..=9 {
        let frac = i as f64 / 10.0;
        let np = brute_force_np(&state, frac);
        let continuous = 1.0 - solver.phi1(frac * ph)?.value / eh;
        println!(
            "{frac:>8.2} {:>12.6} {continuous:>12.6} {:>8}",
            np.max_success_mass,
            np.chosen.len()
        );
    }
    Ok(())
}
