//! Tabulates both auxiliary functions of the level `c` for a spread option,
//! under linear and quadratic loss, and checks one point by sampling.

use shortfall_hedge::{HedgingProblem, LossSpec, MarketParams, McConfig, Payoff};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: -0.5,
        r: 0.02,
        maturity: 1.0,
    };
    let problem = HedgingProblem::new(m, Payoff::spread(5.0)?)?;

    for loss in [LossSpec::Linear, LossSpec::Power { p: 2.0 }] {
        println!("{loss:?}");
        println!("{:>10} {:>14} {:>14}", "c", "psi1", "psi2");
        for i in -8..=8 {
            let c = (0.5 * i as f64).exp();
            let pair = problem.psi(loss, c)?;
            println!("{c:>10.4} {:>14.8} {:>14.8}", pair.psi1, pair.psi2);
        }
    }

    let mc = problem.psi_mc(LossSpec::Linear, 1.0, &McConfig::new(1_000_000, 3))?;
    let q = problem.psi_linear(1.0)?;
    println!("c = 1: quadrature {:.6} / {:.6}", q.psi1, q.psi2);
    println!(
        "       sampled    {:.6} ± {:.6} / {:.6} ± {:.6}",
        mc.psi1, mc.psi1_err, mc.psi2, mc.psi2_err
    );
    Ok(())
}
