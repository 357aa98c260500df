//! Quantile hedging for options on two correlated Black–Scholes assets.
//!
//! Given initial capital `x`, [`Solver::phi1`] returns the least achievable
//! expected shortfall `E[l((H − X_T)⁺)]`; given a risk budget `v`,
//! [`Solver::phi2`] returns the least capital that keeps the shortfall at or
//! below `v`. Both come with the parameter `c` of the optimal modified claim:
//! `H·1{Z̃⁻¹ ≥ c}` for linear loss and `(H − (cZ̃)^{1/(p−1)})⁺` for
//! `l(x) = xᵖ/p`.
//!
//! ```no_run
//! use shortfall_hedge::{LossSpec, MarketParams, Payoff, Solver};
//!
//! let market = MarketParams {
//!     s0: [100.0, 100.0],
//!     alpha: [0.08, 0.07],
//!     sigma: [0.2, 0.25],
//!     rho: 0.3,
//!     r: 0.02,
//!     maturity: 1.0,
//! };
//! let solver = Solver::quadrature(market, Payoff::spread(5.0)?, LossSpec::Linear)?;
//! let price = solver.price()?;
//! let half = solver.phi1(0.5 * price)?;
//! println!("risk {} at c = {}", half.value, half.c);
//! # Ok::<(), shortfall_hedge::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod market;
pub mod mc;
pub mod payoffs;
pub mod psi;
pub mod quadrature;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use gaussian::GaussianLaw;
pub use market::{derive_constants, MarketParams, Measure, MeasureConstants, Thresholds};
pub use mc::{brute_force_np, verify_risk, DiscreteState, Estimate, McConfig, VerifyReport};
pub use payoffs::{uniqueness_check, Payoff, PayoffKind, UniquenessReport};
pub use psi::{HedgingProblem, LossSpec, Method, PsiPair, Side};
pub use quadrature::QuadConfig;
pub use solver::{price, CurveKind, PhiPoint, RiskCurve, SolveConfig, Solver};
