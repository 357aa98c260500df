//! Multivariate normal algebra: laws, linear images, conditioning,
//! densities, bivariate upper-orthant probabilities and seeded sampling.
//!
//! Every semi-infinite Gaussian integral in the crate is truncated to a box of
//! `QuadConfig::truncation_sd` marginal standard deviations (10 by default).
//! The mass outside that box is below 1e-23 and is the documented error floor
//! of the quadrature paths.

use libm::erfc;
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Quad, QuadConfig};
use crate::rng;

const SYMMETRY_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-12;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn std_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function Φ.
#[inline]
pub fn std_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function 1 − Φ, accurate in the upper tail.
#[inline]
pub fn std_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(a <= Z <= b)` for standard normal `Z`, without cancellation in either tail.
pub fn std_interval(a: f64, b: f64) -> f64 {
    if !(a < b) {
        return 0.0;
    }
    if a >= 0.0 {
        (std_sf(a) - std_sf(b)).max(0.0)
    } else if b <= 0.0 {
        (std_cdf(b) - std_cdf(a)).max(0.0)
    } else {
        (1.0 - std_cdf(a) - std_sf(b)).max(0.0)
    }
}

/// `∫_lo^hi e^{rate·v} φ(v; mean, sd²) dv`, in closed form.
///
/// Completing the square shifts the normal by `rate·sd²` and scales by
/// `exp(rate·mean + rate²·sd²/2)`. Infinite bounds are allowed.
pub fn tilted_mass(mean: f64, sd: f64, rate: f64, lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    let shift = mean + rate * sd * sd;
    let p = std_interval((lo - shift) / sd, (hi - shift) / sd);
    if p == 0.0 {
        return 0.0;
    }
    (rate * mean + 0.5 * rate * rate * sd * sd).exp() * p
}

/// A nondegenerate normal law `N_d(m, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl GaussianLaw {
    /// Validates symmetry (1e-12 absolute) and positive definiteness
    /// (every Cholesky pivot above 1e-12).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::DegenerateLaw("zero dimension".into()));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateLaw("non-finite entries".into()));
        }
        for i in 0..d {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::DegenerateLaw(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let chol = cholesky(&cov)?;
        Ok(Self { mean, cov, chol })
    }

    /// Bivariate law from plain arrays.
    pub fn bivariate(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(&mean),
            DMatrix::from_row_slice(2, 2, &[cov[0][0], cov[0][1], cov[1][0], cov[1][1]]),
        )
    }

    /// Standard normal in one dimension.
    pub fn standard(dim: usize) -> Self {
        Self::new(DVector::zeros(dim), DMatrix::identity(dim, dim)).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower Cholesky factor of the covariance.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Mean and standard deviation of coordinate `i`.
    pub fn marginal(&self, i: usize) -> (f64, f64) {
        (self.mean[i], self.cov[(i, i)].sqrt())
    }

    /// Law of `A·X`.
    pub fn linear_transform(&self, a: &DMatrix<f64>) -> Result<GaussianLaw> {
        if a.ncols() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: a.ncols(),
            });
        }
        let mean = a * &self.mean;
        let mut cov = a * &self.cov * a.transpose();
        symmetrize(&mut cov);
        GaussianLaw::new(mean, cov)
    }

    /// Affine map describing the law of the unobserved coordinates given the
    /// observed ones.
    pub fn conditional(&self, observed: &[usize]) -> Result<ConditionalLaw> {
        let d = self.dim();
        if observed.is_empty() || observed.len() >= d {
            return Err(Error::Dimension {
                expected: d - 1,
                got: observed.len(),
            });
        }
        if observed.iter().any(|&i| i >= d) {
            return Err(Error::Dimension {
                expected: d,
                got: observed.iter().copied().max().unwrap_or(0) + 1,
            });
        }
        let free: Vec<usize> = (0..d).filter(|i| !observed.contains(i)).collect();
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.cov[(rows[i], cols[j])])
        };
        let s11 = pick(&free, &free);
        let s12 = pick(&free, observed);
        let s22 = pick(observed, observed);
        let s22_inv = s22
            .clone()
            .cholesky()
            .filter(|c| c.l().diagonal().iter().all(|v| v * v > PIVOT_TOL))
            .map(|c| c.inverse())
            .ok_or(Error::DegenerateConditioning)?;
        let coef = &s12 * s22_inv;
        let mut cond_cov = s11 - &coef * s12.transpose();
        symmetrize(&mut cond_cov);
        Ok(ConditionalLaw {
            free_mean: DVector::from_iterator(free.len(), free.iter().map(|&i| self.mean[i])),
            observed_mean: DVector::from_iterator(
                observed.len(),
                observed.iter().map(|&i| self.mean[i]),
            ),
            coef,
            cond_cov,
        })
    }

    /// Law of the unobserved coordinates given `X[observed] = values`.
    pub fn condition(&self, observed: &[usize], values: &[f64]) -> Result<GaussianLaw> {
        if values.len() != observed.len() {
            return Err(Error::Dimension {
                expected: observed.len(),
                got: values.len(),
            });
        }
        self.conditional(observed)?.at(values)
    }

    /// Density at `x`.
    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: x.len(),
            });
        }
        let centered =
            DVector::from_iterator(d, x.iter().zip(self.mean.iter()).map(|(a, m)| a - m));
        let z = self
            .chol
            .solve_lower_triangular(&centered)
            .expect("cholesky diagonal is positive");
        let log_det: f64 = self.chol.diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
        let quad = z.norm_squared();
        Ok((-0.5 * (quad + log_det + d as f64 * (2.0 * std::f64::consts::PI).ln())).exp())
    }

    /// `P(X₁ >= l₁, X₂ >= l₂)` for a bivariate law, to the default tolerance.
    pub fn rect_upper_prob(&self, lower: [f64; 2]) -> Result<f64> {
        Ok(self
            .rect_upper_prob_with(lower, &QuadConfig::default())?
            .value)
    }

    /// `P(X₁ >= l₁, X₂ >= l₂)` with an error estimate.
    ///
    /// Integrates the conditional tail of `X₁` against the marginal density of
    /// `X₂` over `[max(l₂, m₂ − Lσ₂), m₂ + Lσ₂]`.
    pub fn rect_upper_prob_with(&self, lower: [f64; 2], cfg: &QuadConfig) -> Result<Quad> {
        if self.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: self.dim(),
            });
        }
        let (m1, s1) = self.marginal(0);
        let (m2, s2) = self.marginal(1);
        let [l1, l2] = lower;
        if l1 == f64::NEG_INFINITY && l2 == f64::NEG_INFINITY {
            return Ok(Quad {
                value: 1.0,
                error: 0.0,
            });
        }
        if l1 == f64::NEG_INFINITY {
            return Ok(Quad {
                value: std_sf((l2 - m2) / s2),
                error: 0.0,
            });
        }
        if l2 == f64::NEG_INFINITY {
            return Ok(Quad {
                value: std_sf((l1 - m1) / s1),
                error: 0.0,
            });
        }
        let slope = self.cov[(0, 1)] / self.cov[(1, 1)];
        let cond_sd = (self.cov[(0, 0)] - slope * self.cov[(0, 1)])
            .max(0.0)
            .sqrt();
        let width = cfg.truncation_sd * s2;
        let lo = l2.max(m2 - width);
        let hi = m2 + width;
        let q = integrate(
            |y| {
                let m = m1 + slope * (y - m2);
                std_pdf((y - m2) / s2) / s2 * std_sf((l1 - m) / cond_sd)
            },
            lo,
            hi,
            cfg,
        );
        Ok(Quad {
            value: q.value.clamp(0.0, 1.0),
            error: q.error,
        })
    }

    /// `n` draws as rows of an `n × dim` matrix, deterministic in `seed`.
    ///
    /// Draws are produced in fixed chunks with per-chunk generators, so the
    /// output does not depend on the thread count.
    pub fn sample(&self, n: usize, seed: u64) -> DMatrix<f64> {
        let d = self.dim();
        let chunks = n.div_ceil(rng::CHUNK);
        let rows: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut r = rng::chunk_rng(seed, 0, k);
                let len = rng::CHUNK.min(n - k * rng::CHUNK);
                let mut out = Vec::with_capacity(len * d);
                let mut z = vec![0.0; d];
                for _ in 0..len {
                    for zi in z.iter_mut() {
                        *zi = StandardNormal.sample(&mut r);
                    }
                    for i in 0..d {
                        let v = (0..=i).fold(self.mean[i], |v, j| v + self.chol[(i, j)] * z[j]);
                        out.push(v);
                    }
                }
                out
            })
            .collect();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        DMatrix::from_row_slice(n, d, &flat)
    }
}

/// Conditional law `X⁽¹⁾ | X⁽²⁾ = x⁽²⁾`:
/// mean `m⁽¹⁾ + Σ⁽¹²⁾(Σ⁽²²⁾)⁻¹(x⁽²⁾ − m⁽²⁾)`, covariance independent of `x⁽²⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLaw {
    pub free_mean: DVector<f64>,
    pub observed_mean: DVector<f64>,
    /// `Σ⁽¹²⁾(Σ⁽²²⁾)⁻¹`.
    pub coef: DMatrix<f64>,
    /// `Σ⁽¹¹⁾ − Σ⁽¹²⁾(Σ⁽²²⁾)⁻¹Σ⁽²¹⁾`.
    pub cond_cov: DMatrix<f64>,
}

impl ConditionalLaw {
    pub fn mean_at(&self, values: &[f64]) -> DVector<f64> {
        let x = DVector::from_column_slice(values);
        &self.free_mean + &self.coef * (x - &self.observed_mean)
    }

    pub fn at(&self, values: &[f64]) -> Result<GaussianLaw> {
        if values.len() != self.observed_mean.len() {
            return Err(Error::Dimension {
                expected: self.observed_mean.len(),
                got: values.len(),
            });
        }
        GaussianLaw::new(self.mean_at(values), self.cond_cov.clone())
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn cholesky(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = cov.nrows();
    let mut l = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let mut pivot = cov[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > PIVOT_TOL) {
            return Err(Error::DegenerateLaw(format!(
                "covariance not positive definite (pivot {pivot:e} at {j})"
            )));
        }
        let root = pivot.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..d {
            let mut v = cov[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / root;
        }
    }
    Ok(l)
}
