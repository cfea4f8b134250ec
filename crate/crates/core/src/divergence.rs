//! The divergence-minimization objective and its stochastic gradient.
//!
//! For a proposal `q = N(x, L Lᵀ)` the per-position objective is the lower
//! bound
//!
//! ```text
//! 𝒥(x) = β H_q + β E_ε[log p(x + Lε)] + E_ε[min{0, log p(x + Lε) − log p(x)}]
//! ```
//!
//! with `H_q = (k/2) log(2πe) + Σ log L_ii`. Its gradient with respect to the
//! lower triangle of `L`, estimated with `J` standard-normal draws, is
//!
//! ```text
//! β diag(1/L_ii) + (1/J) Σ_j (β + 1[log p(y_j) < log p(x)]) ∇log p(y_j) ε_jᵀ
//! ```
//!
//! where `y_j = x + L ε_j`. The `[1/p]·p'` factor is always evaluated as the
//! gradient of the log-density.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, PI};
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CholeskyFactor, DIAG_FLOOR};
use crate::targets::{check_input, Target};
use crate::{Error, Result};

/// Tuning of the DM gradient step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DmHyperparams {
    /// Balance `β` between the divergence and acceptance terms.
    pub beta: f64,
    /// Gradient-ascent step size `γ`.
    pub gamma: f64,
    /// Clip threshold `h`; `None` means `10/γ`.
    pub h: Option<f64>,
    /// Initial scaling `σ`, giving `C_0 = σ I`.
    pub sigma: f64,
    /// Monte Carlo draws `J` per gradient estimate.
    pub j_draws: usize,
    /// Estimate the gradient from the proposal's own `ε_t` (a single draw)
    /// instead of `J` fresh ones.
    pub reuse_proposal_draw: bool,
    /// Shrink `γ` by [`STEP_SHRINK`] after every rejection, down to
    /// `γ / 100`.
    pub shrink_on_reject: bool,
}

/// Magnitude infinite gradient components are replaced with.
pub const GRAD_SATURATION: f64 = 1e290;

/// Multiplicative step-size shrink applied on rejection when enabled.
pub const STEP_SHRINK: f64 = 0.999;

impl Default for DmHyperparams {
    fn default() -> Self {
        Self {
            beta: 0.2,
            gamma: 0.002,
            h: None,
            sigma: 2.0,
            j_draws: 10,
            reuse_proposal_draw: false,
            shrink_on_reject: false,
        }
    }
}

impl DmHyperparams {
    pub fn clip_threshold(&self) -> f64 {
        self.h.unwrap_or(10.0 / self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.beta) {
            return Err(Error::config("dm.beta must be positive"));
        }
        // γ = 0 switches adaptation off, which is a legitimate setting.
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::config("dm.gamma must be non-negative"));
        }
        if !(self.clip_threshold() > 0.0) {
            return Err(Error::config("dm.h must be positive"));
        }
        if !positive(self.sigma) || self.sigma < DIAG_FLOOR {
            return Err(Error::config("dm.sigma must be positive"));
        }
        if self.j_draws == 0 {
            return Err(Error::config("dm.j_draws must be at least 1"));
        }
        Ok(())
    }
}

/// A clipped, lower-triangular gradient with respect to `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    dim: usize,
    /// Row-major `k × k`; the strict upper triangle is zero.
    pub matrix: Vec<f64>,
    pub draws_used: usize,
    /// Row-major flags marking entries that were clipped to `±h`.
    pub clipped: Vec<bool>,
}

impl GradientEstimate {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn any_clipped(&self) -> bool {
        self.clipped.iter().any(|c| *c)
    }

    /// Wraps an unclipped matrix, zeroing the upper triangle and clipping.
    pub fn from_raw(dim: usize, mut matrix: Vec<f64>, draws_used: usize, h: f64) -> Self {
        zero_upper(dim, &mut matrix);
        let clipped = clip_in_place(&mut matrix, h);
        Self {
            dim,
            matrix,
            draws_used,
            clipped,
        }
    }
}

fn zero_upper(dim: usize, m: &mut [f64]) {
    for i in 0..dim {
        for j in i + 1..dim {
            m[i * dim + j] = 0.0;
        }
    }
}

/// Entropy term `β diag(1/L_11, …, 1/L_kk)` as a row-major matrix.
pub fn entropy_gradient(l: &CholeskyFactor, beta: f64) -> Result<Vec<f64>> {
    let k = l.dim();
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        let d = l.get(i, i);
        if !(d >= DIAG_FLOOR) {
            return Err(Error::DiagonalBelowFloor { index: i, value: d });
        }
        g[i * k + i] = beta / d;
    }
    Ok(g)
}

/// Entropy of `N(·, L Lᵀ)`.
pub fn gaussian_entropy(l: &CholeskyFactor) -> f64 {
    0.5 * l.dim() as f64 * (2.0 * PI * E).ln() + l.log_diag_sum()
}

/// Monte Carlo estimate of `𝒥(x)` using the given standard-normal draws.
pub fn objective_lower_bound<T, D>(
    target: &T,
    x: &[f64],
    l: &CholeskyFactor,
    beta: f64,
    draws: &[D],
) -> Result<f64>
where
    T: Target + ?Sized,
    D: AsRef<[f64]>,
{
    if draws.is_empty() {
        return Err(Error::config("at least one draw is required"));
    }
    let k = l.dim();
    check_input(k, x)?;
    let lp_x = target.log_density(x);
    if !lp_x.is_finite() {
        return Err(Error::NonFiniteCurrent);
    }
    let mut y = vec![0.0; k];
    let mut sum_lp = 0.0;
    let mut sum_min = 0.0;
    for eps in draws {
        let eps = eps.as_ref();
        if eps.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: eps.len(),
            });
        }
        l.mul_vec(eps, &mut y);
        y.iter_mut().zip(x).for_each(|(y, x)| *y += x);
        let lp_y = target.log_density(&y);
        sum_lp += lp_y;
        sum_min += (lp_y - lp_x).min(0.0);
    }
    let j = draws.len() as f64;
    Ok(beta * gaussian_entropy(l) + beta * sum_lp / j + sum_min / j)
}

/// Unclipped gradient of `𝒥(x)` with respect to `L` for fixed draws.
///
/// `eps` holds the draws back to back (`draws × k`). `lp_x` is `log p(x)`.
pub fn gradient_from_draws<T: Target + ?Sized>(
    target: &T,
    x: &[f64],
    lp_x: f64,
    l: &CholeskyFactor,
    beta: f64,
    eps: &[f64],
) -> Result<Vec<f64>> {
    let k = l.dim();
    if eps.is_empty() || eps.len() % k != 0 {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: eps.len(),
        });
    }
    let draws = eps.len() / k;
    let mut g = entropy_gradient(l, beta)?;
    let mut y = vec![0.0; k];
    let mut grad = vec![0.0; k];
    let inv_j = 1.0 / draws as f64;
    for (j, e) in eps.chunks_exact(k).enumerate() {
        l.mul_vec(e, &mut y);
        y.iter_mut().zip(x).for_each(|(y, x)| *y += x);
        let lp_y = target.log_density_and_grad(&y, &mut grad);
        if grad.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFiniteGradient { draw: j });
        }
        // Infinite components saturate; clipping bounds them afterwards.
        grad.iter_mut().for_each(|v| *v = v.clamp(-GRAD_SATURATION, GRAD_SATURATION));
        // Ties take the zero branch of the min.
        let weight = if lp_y < lp_x { beta + 1.0 } else { beta } * inv_j;
        for a in 0..k {
            let ga = weight * grad[a];
            for b in 0..=a {
                g[a * k + b] += ga * e[b];
            }
        }
    }
    Ok(g)
}

/// Clips every entry to `[-h, h]` and reports which ones moved.
pub fn clip_gradient(g: &[f64], h: f64) -> Vec<f64> {
    let mut out = g.to_vec();
    clip_in_place(&mut out, h);
    out
}

fn clip_in_place(g: &mut [f64], h: f64) -> Vec<bool> {
    g.iter_mut()
        .map(|v| {
            if v.abs() > h {
                *v = h.copysign(*v);
                true
            } else {
                false
            }
        })
        .collect()
}

/// Draws `J` fresh standard-normal vectors from `rng` and returns the clipped
/// gradient estimate at `x`.
pub fn gradient_estimate<T, R>(
    target: &T,
    x: &[f64],
    l: &CholeskyFactor,
    hyper: &DmHyperparams,
    rng: &mut R,
) -> Result<GradientEstimate>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
{
    let k = l.dim();
    check_input(k, x)?;
    let lp_x = target.log_density(x);
    if !lp_x.is_finite() {
        return Err(Error::NonFiniteCurrent);
    }
    let eps: Vec<f64> = (0..hyper.j_draws * k)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let g = gradient_from_draws(target, x, lp_x, l, hyper.beta, &eps)?;
    Ok(GradientEstimate::from_raw(
        k,
        g,
        hyper.j_draws,
        hyper.clip_threshold(),
    ))
}

/// `L + γ G` on the lower triangle, with the diagonal floored at
/// [`DIAG_FLOOR`].
pub fn update_cholesky(l: &CholeskyFactor, g: &GradientEstimate, gamma: f64) -> CholeskyFactor {
    let mut next = l.clone();
    next.add_scaled_lower(gamma, &g.matrix);
    next
}
