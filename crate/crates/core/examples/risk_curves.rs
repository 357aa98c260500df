//! Minimal shortfall risk as a function of capital, and the capital needed
//! for a given risk, for a quanto claim.

use shortfall_hedge::{CurveKind, LossSpec, MarketParams, Payoff, Solver};

fn main() -> shortfall_hedge::Result<()> {
    let m = MarketParams {
        s0: [100.0, 95.0],
        alpha: [0.08, 0.07],
        sigma: [0.2, 0.25],
        rho: 0.3,
        r: 0.02,
        maturity: 1.0,
    };
    for loss in [LossSpec::Linear, LossSpec::Power { p: 1.5 }] {
        let solver = Solver::quadrature(m, Payoff::quanto_domestic(100.0)?, loss)?;
        let ph = solver.price()?;
        println!("{loss:?}, price {ph:.6}");

        let capital: Vec<f64> = (0..=10).map(|i| ph * i as f64 / 10.0).collect();
        let risk = solver.curve(CurveKind::Phi1, &capital)?;
        println!("{:>12} {:>14} {:>12}", "capital", "min risk", "c");
        for p in &risk.points {
            println!("{:>12.6} {:>14.8} {:>12.6}", p.input, p.value, p.c);
        }

        let ceiling = solver.risk_ceiling()?;
        let levels: Vec<f64> = (0..=4).map(|i| ceiling * i as f64 / 4.0).collect();
        let cost = solver.curve(CurveKind::Phi2, &levels)?;
        println!("{:>12} {:>14}", "risk", "min capital");
        for p in &cost.points {
            println!("{:>12.6} {:>14.8}", p.input, p.value);
        }
    }
    Ok(())
}
