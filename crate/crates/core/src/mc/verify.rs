//! Simulation check of a solved `Φ₁(x)`: the shortfall of the modified claim
//! and its price.

use serde::Serialize;

use super::{estimate, Estimate, McConfig};
use crate::error::Result;
use crate::market::Measure;
use crate::psi::LossSpec;
use crate::solver::Solver;

/// Number of standard errors tolerated by every check.
const K_SE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskCheck {
    pub passed: bool,
    /// Signed gap in units of the standard error used by the check.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub x: f64,
    pub c: f64,
    /// Engine `Φ₁(x)` and its error estimate.
    pub engine_risk: f64,
    pub engine_err: f64,
    /// `E[l(H − M)]` for the modified claim `M`, sampled under `P`.
    pub mc_risk: Estimate,
    /// `Ẽ[e^{−rT} M]`, sampled under `P̃`.
    pub mc_cost: Estimate,
    pub risk_check: RiskCheck,
    /// `Ẽ[e^{−rT} M] ≤ x` up to sampling error.
    pub budget_check: RiskCheck,
    pub passed: bool,
}

/// Solve `Φ₁(x)`, then simulate the modified claim `H·1_{A_c}` (linear) or
/// `(H − (cZ̃)^{1/(p−1)})⁺` (power) and compare.
pub fn verify_risk(solver: &Solver, x: f64, mc: &McConfig) -> Result<VerifyReport> {
    let phi = solver.phi1(x)?;
    let c = phi.c;
    let loss = solver.loss();
    let payoff = solver.problem().payoff();
    let params = solver.problem().params();
    let df = params.discount();
    let modified = move |h: f64, z: f64| -> f64 {
        match loss {
            LossSpec::Linear => {
                if 1.0 / z >= c {
                    h
                } else {
                    0.0
                }
            }
            LossSpec::Power { p } => {
                if c == 0.0 {
                    h
                } else {
                    (h - (c * z).powf(1.0 / (p - 1.0))).max(0.0)
                }
            }
        }
    };
    let mc_risk = estimate(params, Measure::Physical, mc, 11, |s| {
        let h = payoff.evaluate(s.s[0], s.s[1])?;
        Ok(loss.loss((h - modified(h, s.z)).max(0.0)))
    })?;
    let mc_cost = estimate(params, Measure::RiskNeutral, mc, 12, |s| {
        let h = payoff.evaluate(s.s[0], s.s[1])?;
        Ok(df * modified(h, s.z))
    })?;
    let floor = 1e-12 * (1.0 + phi.value.abs());
    let risk_se = mc_risk.std_error + phi.err_estimate + floor;
    let risk_z = (phi.value - mc_risk.mean) / risk_se;
    let cost_se = mc_cost.std_error + 1e-12 * (1.0 + x.abs());
    let cost_z = (mc_cost.mean - x) / cost_se;
    let risk_check = RiskCheck {
        passed: risk_z.abs() <= K_SE,
        z_score: risk_z,
    };
    let budget_check = RiskCheck {
        passed: cost_z <= K_SE,
        z_score: cost_z,
    };
    Ok(VerifyReport {
        x,
        c,
        engine_risk: phi.value,
        engine_err: phi.err_estimate,
        mc_risk,
        mc_cost,
        passed: risk_check.passed && budget_check.passed,
        risk_check,
        budget_check,
    })
}
