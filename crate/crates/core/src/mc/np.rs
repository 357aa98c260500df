//! Discretised test problem and its greedy likelihood-ratio solution.
//!
//! With `P₁ = H·P/E[H]` and `P₂ = H·P̃/Ẽ[H]`, maximising `P₁(A)` subject to
//! `P₂(A) ≤ x/p(H)` is a test between two measures. On a finite grid the
//! optimum fills cells in decreasing order of `dP₁/dP₂` and randomises on the
//! last one.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::gaussian::GaussianLaw;
use crate::market::{radon_nikodym, to_risk_neutral, Measure};
use crate::payoffs::PayoffKind;
use crate::psi::HedgingProblem;

/// Cells per axis used by default.
pub const DEFAULT_GRID: usize = 40;

const SPAN_SD: f64 = 6.0;

/// One grid cell; coordinates are the `P` Wiener coordinates of its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteCell {
    pub w1: f64,
    pub w2: f64,
    pub prob_p: f64,
    pub prob_ptilde: f64,
    pub h: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteState {
    pub grid: Vec<DiscreteCell>,
}

/// Greedy optimum of the discrete test problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NpSolution {
    /// Achieved `P₁` mass.
    pub max_success_mass: f64,
    /// `P₂` mass spent.
    pub budget_used: f64,
    /// `(cell index, fraction taken)`, in fill order.
    pub chosen: Vec<(usize, f64)>,
}

fn axis(lo: f64, hi: f64, n: usize, edge: Option<f64>) -> (Vec<f64>, f64) {
    let n = n.max(2);
    // one spare cell so that aligning an edge never loses coverage
    let h = (hi - lo) / (n - 1) as f64;
    let start = match edge {
        Some(e) if e.is_finite() => e - ((e - lo) / h).ceil() * h,
        _ => lo - 0.5 * h,
    };
    ((0..n).map(|i| start + (i as f64 + 0.5) * h).collect(), h)
}

impl DiscreteState {
    /// `n × n` midpoint grid. Digital claims use the frame
    /// `(X, Y) = (σ₁w₁ − σ₂w₂, A·w)` with `b` on a cell edge, so the payoff is
    /// constant on cells; otherwise the grid is in `w` itself.
    pub fn build(problem: &HedgingProblem, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("grid", "need at least 2 cells per axis"));
        }
        let params = problem.params();
        let k = problem.constants();
        let t = params.maturity;
        let law_w = GaussianLaw::bivariate([0.0, 0.0], [[t, params.rho * t], [params.rho * t, t]])?;
        let shift = to_risk_neutral(params, [0.0, 0.0]);
        // in P coordinates W = W̃ − θT
        let mean_tilde = [-shift[0], -shift[1]];
        let [s1, s2] = params.sigma;
        let a = k.density_coef();
        let (map, edge_x) = match problem.payoff().kind() {
            PayoffKind::Digital => (
                DMatrix::from_row_slice(2, 2, &[s1, -s2, a[0], a[1]]),
                Some(k.thresholds.b),
            ),
            _ => (DMatrix::identity(2, 2), None),
        };
        let (map, edge_x) = match law_w.linear_transform(&map) {
            Ok(_) => (map, edge_x),
            Err(_) => (DMatrix::identity(2, 2), None),
        };
        let law_p = law_w.linear_transform(&map)?;
        let mt = &map * nalgebra::DVector::from_row_slice(&mean_tilde);
        let law_q = GaussianLaw::new(mt.clone(), law_p.cov().clone())?;
        let inv = map
            .clone()
            .try_inverse()
            .expect("nondegenerate frame is invertible");
        let range = |i: usize| {
            let sd = law_p.cov()[(i, i)].sqrt();
            let lo = 0.0f64.min(mt[i]) - SPAN_SD * sd;
            let hi = 0.0f64.max(mt[i]) + SPAN_SD * sd;
            (lo, hi)
        };
        let (x0, x1) = range(0);
        let (y0, y1) = range(1);
        let (xs, hx) = axis(x0, x1, n, edge_x);
        let (ys, hy) = axis(y0, y1, n, None);
        let mut grid = Vec::with_capacity(n * n);
        for &x in &xs {
            for &y in &ys {
                let w1 = inv[(0, 0)] * x + inv[(0, 1)] * y;
                let w2 = inv[(1, 0)] * x + inv[(1, 1)] * y;
                let s = [
                    params.forward_base(Measure::Physical, 0) * (s1 * w1).exp(),
                    params.forward_base(Measure::Physical, 1) * (s2 * w2).exp(),
                ];
                grid.push(DiscreteCell {
                    w1,
                    w2,
                    prob_p: law_p.pdf(&[x, y])? * hx * hy,
                    prob_ptilde: law_q.pdf(&[x, y])? * hx * hy,
                    h: problem.payoff().evaluate(s[0], s[1])?,
                    z: radon_nikodym(k, w1, w2, Measure::Physical),
                });
            }
        }
        let (sp, sq) = grid
            .iter()
            .fold((0.0, 0.0), |(a, b), c| (a + c.prob_p, b + c.prob_ptilde));
        for c in &mut grid {
            c.prob_p /= sp;
            c.prob_ptilde /= sq;
        }
        Ok(Self { grid })
    }

    /// `Σ h·prob_P`.
    pub fn claim_mass_p(&self) -> f64 {
        self.grid.iter().map(|c| c.h * c.prob_p).sum()
    }

    /// `Σ h·prob_P̃`.
    pub fn claim_mass_ptilde(&self) -> f64 {
        self.grid.iter().map(|c| c.h * c.prob_ptilde).sum()
    }
}

/// Fill cells by decreasing `dP₁/dP₂` until the `P₂` budget is spent.
pub fn brute_force_np(state: &DiscreteState, budget: f64) -> NpSolution {
    let e1 = state.claim_mass_p();
    let e2 = state.claim_mass_ptilde();
    let mut cells: Vec<(usize, f64, f64)> = state
        .grid
        .iter()
        .enumerate()
        .filter(|(_, c)| c.h > 0.0 && (c.prob_p > 0.0 || c.prob_ptilde > 0.0))
        .map(|(i, c)| (i, c.h * c.prob_p / e1, c.h * c.prob_ptilde / e2))
        .collect();
    // log of p1/p2, +∞ where p2 vanishes
    let key = |c: &(usize, f64, f64)| c.1.ln() - c.2.ln();
    cells.sort_by(|a, b| key(b).total_cmp(&key(a)));
    let budget = budget.clamp(0.0, 1.0);
    let mut left = budget;
    let mut mass = 0.0;
    let mut chosen = Vec::new();
    for (i, p1, p2) in cells {
        if left <= 0.0 && p2 > 0.0 {
            break;
        }
        let frac = if p2 <= left { 1.0 } else { left / p2 };
        mass += frac * p1;
        left -= frac * p2;
        chosen.push((i, frac));
        if frac < 1.0 {
            break;
        }
    }
    NpSolution {
        max_success_mass: mass.min(1.0),
        budget_used: budget - left.max(0.0),
        chosen,
    }
}
