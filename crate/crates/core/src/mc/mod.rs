//! Monte Carlo estimators under `P` and `P̃`, plus the verification oracles
//! built on them.
//!
//! Paths are drawn in fixed chunks of [`rng::CHUNK`] with one generator per
//! `(seed, stream, chunk)`. Chunk moments are merged in chunk order, so every
//! estimate is bit-identical for any thread count.

mod np;
mod verify;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::market::{derive_constants, MarketParams, Measure};
use crate::rng;

pub use np::{brute_force_np, DiscreteCell, DiscreteState, NpSolution, DEFAULT_GRID};
pub use verify::{verify_risk, RiskCheck, VerifyReport};

/// Sampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    /// Number of paths; oracle comparisons use at least 10⁴.
    pub n_paths: usize,
    pub seed: u64,
    /// Pair every draw with its negation.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 1_000_000,
            seed: 20_240_917,
            antithetic: true,
        }
    }
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            antithetic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(invalid("mc.n_paths", "need at least two paths"));
        }
        Ok(())
    }
}

/// One simulated terminal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    /// Wiener coordinates of the sampling measure.
    pub w: [f64; 2],
    /// Terminal prices.
    pub s: [f64; 2],
    /// `Z̃_T = dP̃/dP` at this state.
    pub z: f64,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    /// Independent observations (antithetic pairs count once).
    pub samples: u64,
}

impl Estimate {
    /// `|self − x| ≤ k·SE`, with a tiny floor for exact estimates.
    pub fn within(&self, x: f64, k: f64) -> bool {
        (self.mean - x).abs() <= k * self.std_error + 1e-12 * (1.0 + x.abs())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let (na, nb) = (self.n as f64, o.n as f64);
        Moments {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + o.m2 + d * d * na * nb / n as f64,
        }
    }
}

/// Builds [`PathState`]s from standard normal pairs for one measure.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PathMap {
    sqrt_t: f64,
    rho: f64,
    rho_c: f64,
    base: [f64; 2],
    sigma: [f64; 2],
    a: [f64; 2],
    shift: f64,
}

impl PathMap {
    pub fn new(params: &MarketParams, under: Measure) -> Result<Self> {
        let k = derive_constants(params, 0.0)?;
        Ok(Self {
            sqrt_t: params.maturity.sqrt(),
            rho: params.rho,
            rho_c: (1.0 - params.rho * params.rho).sqrt(),
            base: [params.forward_base(under, 0), params.forward_base(under, 1)],
            sigma: params.sigma,
            a: k.density_coef(),
            shift: k.density_shift(under) * params.maturity,
        })
    }

    /// State at Wiener coordinates `w`.
    #[inline]
    pub fn at(&self, w: [f64; 2]) -> PathState {
        PathState {
            w,
            s: [
                self.base[0] * (self.sigma[0] * w[0]).exp(),
                self.base[1] * (self.sigma[1] * w[1]).exp(),
            ],
            z: (-self.a[0] * w[0] - self.a[1] * w[1] - self.shift).exp(),
        }
    }

    #[inline]
    fn coords(&self, z1: f64, z2: f64) -> [f64; 2] {
        [
            self.sqrt_t * z1,
            self.sqrt_t * (self.rho * z1 + self.rho_c * z2),
        ]
    }
}

/// `E[f(state)]` under `under`, with `f` evaluated on `cfg.n_paths` paths.
///
/// `stream` separates independent estimates that share a seed. A non-finite
/// integrand value aborts with the index of the offending path.
pub fn estimate<F>(
    params: &MarketParams,
    under: Measure,
    cfg: &McConfig,
    stream: u64,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&PathState) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let map = PathMap::new(params, under)?;
    let draws = if cfg.antithetic {
        cfg.n_paths.div_ceil(2)
    } else {
        cfg.n_paths
    };
    let chunks = draws.div_ceil(rng::CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::chunk_rng(cfg.seed, stream, k);
            let len = rng::CHUNK.min(draws - k * rng::CHUNK);
            let mut m = Moments::default();
            for i in 0..len {
                let path = k * rng::CHUNK + i;
                let z1: f64 = StandardNormal.sample(&mut r);
                let z2: f64 = StandardNormal.sample(&mut r);
                let w = map.coords(z1, z2);
                let check = |v: f64, p: usize| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::NonFiniteSample { path: p })
                    }
                };
                let x = if cfg.antithetic {
                    let a = check(f(&map.at(w))?, 2 * path)?;
                    let b = check(f(&map.at([-w[0], -w[1]]))?, 2 * path + 1)?;
                    0.5 * (a + b)
                } else {
                    check(f(&map.at(w))?, path)?
                };
                m.push(x);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    let var = if total.n > 1 {
        total.m2 / (total.n - 1) as f64
    } else {
        0.0
    };
    Ok(Estimate {
        mean: total.mean,
        std_error: (var.max(0.0) / total.n as f64).sqrt(),
        samples: total.n,
    })
}
