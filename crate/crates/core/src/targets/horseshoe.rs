//! Bayesian linear regression with a horseshoe prior.
//!
//! The parameter vector packs `(β₁..β_p, log λ₁..log λ_p, log τ, log σ)`:
//!
//! ```text
//! y | β, σ      ~ N(Xβ, σ² I)
//! β_j | λ_j, τ  ~ N(0, λ_j² τ²)
//! λ_j, τ, σ     ~ half-Cauchy(0, 1)
//! ```
//!
//! The positive parameters live on the log scale, so the density includes the
//! log-Jacobian `log λ_j + log τ + log σ`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Target;
use crate::{Error, Result};

/// Nonzero true coefficients, in order; the remaining half are zero.
pub const HORSESHOE_SIGNAL: [f64; 10] = [10.0, 5.0, 2.5, 2.0, 1.0, 0.75, 0.5, 0.25, 0.2, 0.1];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HorseshoeRegressionData {
    pub n: usize,
    pub p: usize,
    /// Row-major `n × p` design.
    pub design: Vec<f64>,
    pub response: Vec<f64>,
    pub true_coefficients: Vec<f64>,
}

/// Simulates `X_ij ~ N(0, 1)` and `y = Xβ + N(0, 1)`.
///
/// The first `p/2` coefficients cycle through [`HORSESHOE_SIGNAL`]; the rest
/// are zero.
pub fn generate_horseshoe_data(seed: u64, n: usize, p: usize) -> Result<HorseshoeRegressionData> {
    if n == 0 || p == 0 || p % 2 != 0 {
        return Err(Error::config("horseshoe data needs n > 0 and an even p > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let true_coefficients: Vec<f64> = (0..p)
        .map(|j| {
            if j < p / 2 {
                HORSESHOE_SIGNAL[j % HORSESHOE_SIGNAL.len()]
            } else {
                0.0
            }
        })
        .collect();
    let design: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    let response = (0..n)
        .map(|i| {
            let row = &design[i * p..(i + 1) * p];
            let mean: f64 = row.iter().zip(&true_coefficients).map(|(a, b)| a * b).sum();
            mean + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    Ok(HorseshoeRegressionData {
        n,
        p,
        design,
        response,
        true_coefficients,
    })
}

/// Posterior of the horseshoe regression on the unconstrained scale.
#[derive(Debug, Clone)]
pub struct Horseshoe {
    data: HorseshoeRegressionData,
    xtx: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
}

/// `log(1 + e^a)` without overflow.
fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

/// `e^a / (1 + e^a)`.
fn logistic(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Half-Cauchy(0, 1) log-density of `e^l` plus the log-Jacobian `l`.
fn log_half_cauchy_on_log_scale(l: f64) -> f64 {
    (2.0 / PI).ln() - softplus(2.0 * l) + l
}

/// Derivative of [`log_half_cauchy_on_log_scale`].
fn d_log_half_cauchy_on_log_scale(l: f64) -> f64 {
    1.0 - 2.0 * logistic(2.0 * l)
}

impl Horseshoe {
    pub fn new(data: HorseshoeRegressionData) -> Result<Self> {
        let (n, p) = (data.n, data.p);
        if data.design.len() != n * p || data.response.len() != n || data.true_coefficients.len() != p
        {
            return Err(Error::config("horseshoe data shapes are inconsistent"));
        }
        let mut xtx = vec![0.0; p * p];
        let mut xty = vec![0.0; p];
        for i in 0..n {
            let row = &data.design[i * p..(i + 1) * p];
            let yi = data.response[i];
            for a in 0..p {
                xty[a] += row[a] * yi;
                for b in 0..=a {
                    xtx[a * p + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                xtx[b * p + a] = xtx[a * p + b];
            }
        }
        let yty = data.response.iter().map(|v| v * v).sum();
        Ok(Self {
            data,
            xtx,
            xty,
            yty,
        })
    }

    pub fn data(&self) -> &HorseshoeRegressionData {
        &self.data
    }

    pub fn num_coefficients(&self) -> usize {
        self.data.p
    }

    /// Residual sum of squares `‖y − Xβ‖²`, and `Xᵀ(y − Xβ)` when asked.
    fn rss(&self, beta: &[f64], xtr: Option<&mut [f64]>) -> f64 {
        let p = self.data.p;
        let mut quad = 0.0;
        let mut lin = 0.0;
        let mut xtxb = vec![0.0; p];
        for a in 0..p {
            let row = &self.xtx[a * p..(a + 1) * p];
            xtxb[a] = row.iter().zip(beta).map(|(m, b)| m * b).sum();
            quad += beta[a] * xtxb[a];
            lin += beta[a] * self.xty[a];
        }
        if let Some(out) = xtr {
            for a in 0..p {
                out[a] = self.xty[a] - xtxb[a];
            }
        }
        // Rounding can push a perfect fit slightly negative.
        (self.yty - 2.0 * lin + quad).max(0.0)
    }

    /// Gaussian log-likelihood of `y` given `β` and `log σ`.
    pub fn log_likelihood(&self, beta: &[f64], log_sigma: f64) -> f64 {
        let n = self.data.n as f64;
        let rss = self.rss(beta, None);
        -0.5 * n * (2.0 * PI).ln() - n * log_sigma - 0.5 * rss * (-2.0 * log_sigma).exp()
    }

    /// Ordinary least-squares coefficients `(XᵀX)⁻¹Xᵀy`.
    pub fn ols(&self) -> Result<Vec<f64>> {
        let p = self.data.p;
        let l = crate::linalg::cholesky_lower(p, &self.xtx)?;
        let f = crate::CholeskyFactor::from_row_major(p, l)?;
        let mut z = vec![0.0; p];
        f.solve_lower(&self.xty, &mut z);
        // Back substitution with Lᵀ.
        let mut beta = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = z[i];
            for j in i + 1..p {
                s -= f.get(j, i) * beta[j];
            }
            beta[i] = s / f.get(i, i);
        }
        Ok(beta)
    }

    fn eval(&self, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = self.data.p;
        let n = self.data.n as f64;
        let beta = &theta[..p];
        let log_lambda = &theta[p..2 * p];
        let log_tau = theta[2 * p];
        let log_sigma = theta[2 * p + 1];

        let mut xtr = vec![0.0; p];
        let rss = self.rss(beta, Some(&mut xtr));
        let inv_var = (-2.0 * log_sigma).exp();
        let mut lp = -0.5 * n * (2.0 * PI).ln() - n * log_sigma - 0.5 * rss * inv_var;

        let mut shrink_sum = 0.0;
        let mut g_beta = vec![0.0; p];
        let mut g_lambda = vec![0.0; p];
        for j in 0..p {
            // β_j² / (λ_j² τ²)
            let prec = (-2.0 * (log_lambda[j] + log_tau)).exp();
            let ratio = beta[j] * beta[j] * prec;
            lp += -0.5 * (2.0 * PI).ln() - log_lambda[j] - log_tau - 0.5 * ratio;
            lp += log_half_cauchy_on_log_scale(log_lambda[j]);
            shrink_sum += ratio;
            g_beta[j] = xtr[j] * inv_var - beta[j] * prec;
            g_lambda[j] = -1.0 + ratio + d_log_half_cauchy_on_log_scale(log_lambda[j]);
        }
        lp += log_half_cauchy_on_log_scale(log_tau);
        lp += log_half_cauchy_on_log_scale(log_sigma);

        if let Some(g) = grad {
            g[..p].copy_from_slice(&g_beta);
            g[p..2 * p].copy_from_slice(&g_lambda);
            g[2 * p] = -(p as f64) + shrink_sum + d_log_half_cauchy_on_log_scale(log_tau);
            g[2 * p + 1] = -n + rss * inv_var + d_log_half_cauchy_on_log_scale(log_sigma);
        }
        lp
    }
}

impl Target for Horseshoe {
    fn dim(&self) -> usize {
        2 * self.data.p + 2
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.eval(x, None)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.eval(x, Some(grad));
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(x, Some(grad))
    }

    fn true_mean(&self) -> Option<Vec<f64>> {
        Some(self.data.true_coefficients.clone())
    }

    fn moment_coordinates(&self) -> Range<usize> {
        0..self.data.p
    }
}

/// Log posterior of the packed parameter vector `theta`.
pub fn horseshoe_log_posterior(model: &Horseshoe, theta: &[f64]) -> Result<f64> {
    super::check_input(model.dim(), theta)?;
    Ok(model.log_density(theta))
}
