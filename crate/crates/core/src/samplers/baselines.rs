//! Comparison samplers: RWM, adaptive RWM, MALA and parallel tempering.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{
    accept_log_ratio, fill_standard_normal, initial_log_density, proposal_log_density, zeros,
    ChainState, ChainTally, RunResult, SamplerConfig, SamplerKind, SwapEvent,
};
use crate::linalg::CholeskyFactor;
use crate::rng::{stream, stream_with_offset, Stream};
use crate::targets::Target;
use crate::Result;

fn prepare<T: Target + ?Sized>(
    target: &T,
    config: &SamplerConfig,
    kind: SamplerKind,
) -> Result<(SamplerConfig, f64)> {
    let mut config = config.clone();
    config.kind = kind;
    config.validate(target.dim())?;
    let lp0 = initial_log_density(target, &config.x0)?;
    Ok((config, lp0))
}

fn finish(mut result: RunResult, x: Vec<f64>, iterations: usize, tallies: Vec<ChainTally>) -> RunResult {
    result.final_state = ChainState {
        x,
        factor: None,
        scout: None,
        iteration: iterations,
        tallies,
    };
    result
}

/// Random-walk Metropolis with `N(x, σ² I)` proposals.
pub fn run_rwm<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    let (config, lp0) = prepare(target, config, SamplerKind::Rwm)?;
    let dim = target.dim();
    let mut rng = stream(config.seed, Stream::Main);
    let mut x = config.x0.clone();
    let mut lp = lp0;
    let mut y = zeros(dim);
    let mut tally = ChainTally::default();
    let mut result = RunResult::with_capacity(SamplerKind::Rwm, config.seed, dim, config.iterations);
    for t in 0..config.iterations {
        let accepted = rw_step(target, &mut x, &mut lp, &mut y, config.rwm.scale, 1.0, &mut rng)
            .map_err(|e| e.at(t))?;
        tally.record(accepted);
        result.push(&x, accepted);
    }
    Ok(finish(result, x, config.iterations, vec![tally]))
}

/// Random-walk step on `p^inv_temp`.
fn rw_step<T: Target + ?Sized, R: Rng + ?Sized>(
    target: &T,
    x: &mut [f64],
    lp: &mut f64,
    y: &mut [f64],
    scale: f64,
    inv_temp: f64,
    rng: &mut R,
) -> Result<bool> {
    fill_standard_normal(rng, y);
    y.iter_mut().zip(x.iter()).for_each(|(y, x)| *y = x + scale * *y);
    let lp_y = proposal_log_density(target, y)?;
    let accepted = accept_log_ratio(inv_temp * (lp_y - *lp), rng);
    if accepted {
        x.copy_from_slice(y);
        *lp = lp_y;
    }
    Ok(accepted)
}

/// Running mean and covariance with rank-one updates.
struct RunningMoments {
    n: usize,
    mean: Vec<f64>,
    /// Row-major sum of centred outer products.
    m2: Vec<f64>,
}

impl RunningMoments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: zeros(dim),
            m2: zeros(dim * dim),
        }
    }

    fn push(&mut self, x: &[f64]) {
        let d = self.mean.len();
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / n;
        }
        for i in 0..d {
            let after_i = x[i] - self.mean[i];
            for j in 0..d {
                self.m2[i * d + j] += delta[j] * after_i;
            }
        }
    }

    /// Sample covariance (divides by `n − 1`).
    fn covariance(&self) -> Vec<f64> {
        let denom = (self.n.max(2) - 1) as f64;
        self.m2.iter().map(|v| v / denom).collect()
    }
}

/// Adaptive RWM: after a fixed-kernel warm start the proposal covariance is
/// `s_d Σ_emp + ε I`, with `Σ_emp` the running covariance of the chain.
pub fn run_arwm<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    let (config, lp0) = prepare(target, config, SamplerKind::Arwm)?;
    let dim = target.dim();
    let params = &config.arwm;
    let scaling = params.scaling.unwrap_or(2.38 * 2.38 / dim as f64);
    let warmup = params.warmup.unwrap_or(2 * dim);
    let mut rng = stream(config.seed, Stream::Main);
    let mut x = config.x0.clone();
    let mut lp = lp0;
    let mut moments = RunningMoments::new(dim);
    moments.push(&x);
    let warm = CholeskyFactor::scaled_identity(dim, params.initial_scale)?;
    let mut eps = zeros(dim);
    let mut y = zeros(dim);
    let mut tally = ChainTally::default();
    let mut result = RunResult::with_capacity(SamplerKind::Arwm, config.seed, dim, config.iterations);
    let mut last_factor = warm.clone();
    for t in 0..config.iterations {
        let factor = if t < warmup {
            warm.clone()
        } else {
            let mut cov = moments.covariance();
            cov.iter_mut().for_each(|v| *v *= scaling);
            for i in 0..dim {
                cov[i * dim + i] += params.regularization;
            }
            CholeskyFactor::decompose(dim, &cov).map_err(|e| e.at(t))?
        };
        fill_standard_normal(&mut rng, &mut eps);
        factor.mul_vec(&eps, &mut y);
        y.iter_mut().zip(&x).for_each(|(y, x)| *y += x);
        let lp_y = proposal_log_density(target, &y).map_err(|e| e.at(t))?;
        let accepted = accept_log_ratio(lp_y - lp, &mut rng);
        if accepted {
            x.copy_from_slice(&y);
            lp = lp_y;
        }
        moments.push(&x);
        tally.record(accepted);
        result.push(&x, accepted);
        last_factor = factor;
    }
    let mut result = finish(result, x, config.iterations, vec![tally]);
    result.final_state.factor = Some(last_factor);
    Ok(result)
}

/// Metropolis-adjusted Langevin with step `λ`.
pub fn run_mala<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    let (config, _) = prepare(target, config, SamplerKind::Mala)?;
    let dim = target.dim();
    let lambda = config.mala.step;
    let half = 0.5 * lambda * lambda;
    let mut rng = stream(config.seed, Stream::Main);
    let mut x = config.x0.clone();
    let mut gx = zeros(dim);
    let mut lp = target.log_density_and_grad(&x, &mut gx);
    let mut gy = zeros(dim);
    let mut y = zeros(dim);
    let mut tally = ChainTally::default();
    let mut result = RunResult::with_capacity(SamplerKind::Mala, config.seed, dim, config.iterations);
    // log q(b | a) up to a constant, with drift evaluated at a.
    let log_q = |b: &[f64], a: &[f64], ga: &[f64]| -> f64 {
        let s: f64 = b
            .iter()
            .zip(a)
            .zip(ga)
            .map(|((b, a), g)| {
                let r = b - a - half * g;
                r * r
            })
            .sum();
        -s / (2.0 * lambda * lambda)
    };
    for t in 0..config.iterations {
        fill_standard_normal(&mut rng, &mut y);
        for i in 0..dim {
            y[i] = x[i] + half * gx[i] + lambda * y[i];
        }
        let lp_y = target.log_density_and_grad(&y, &mut gy);
        if lp_y.is_nan() {
            return Err(crate::Error::NanLogDensity.at(t));
        }
        let accepted = if lp_y == f64::NEG_INFINITY {
            false
        } else {
            let log_ratio = lp_y - lp + log_q(&x, &y, &gy) - log_q(&y, &x, &gx);
            accept_log_ratio(log_ratio, &mut rng)
        };
        if accepted {
            core::mem::swap(&mut x, &mut y);
            core::mem::swap(&mut gx, &mut gy);
            lp = lp_y;
        }
        tally.record(accepted);
        result.push(&x, accepted);
    }
    Ok(finish(result, x, config.iterations, vec![tally]))
}

/// Inverse temperatures `τ^{i/(n−1)}` from 1 (cold) down to `τ`.
pub(crate) fn geometric_ladder(chains: usize, min_temperature: f64) -> Vec<f64> {
    if chains == 1 {
        return vec![1.0];
    }
    (0..chains)
        .map(|i| min_temperature.powf(i as f64 / (chains - 1) as f64))
        .collect()
}

/// Parallel tempering over random-walk chains. Each iteration every chain
/// takes one step, then one uniformly chosen adjacent pair attempts a swap.
/// Only the cold chain is recorded.
pub fn run_pt<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    let (config, lp0) = prepare(target, config, SamplerKind::Pt)?;
    let dim = target.dim();
    let n = config.pt.chains;
    let ladder = geometric_ladder(n, config.pt_min_temperature());
    let scales: Vec<f64> = ladder.iter().map(|b| config.pt.scale / b.sqrt()).collect();
    let mut rngs: Vec<_> = (0..n)
        .map(|i| {
            if i == 0 {
                stream(config.seed, Stream::Main)
            } else {
                stream_with_offset(config.seed, Stream::Tempered, i as u64)
            }
        })
        .collect();
    let mut swap_rng = stream(config.seed, Stream::Swap);
    let mut xs = vec![config.x0.clone(); n];
    let mut lps = vec![lp0; n];
    let mut y = zeros(dim);
    let mut tallies = vec![ChainTally::default(); n];
    let mut result = RunResult::with_capacity(SamplerKind::Pt, config.seed, dim, config.iterations);
    for t in 0..config.iterations {
        let mut cold_accepted = false;
        for i in 0..n {
            let acc = rw_step(
                target,
                &mut xs[i],
                &mut lps[i],
                &mut y,
                scales[i],
                ladder[i],
                &mut rngs[i],
            )
            .map_err(|e| e.at(t))?;
            tallies[i].record(acc);
            if i == 0 {
                cold_accepted = acc;
            }
        }
        if n > 1 {
            let j = swap_rng.random_range(0..n - 1);
            let log_ratio = (ladder[j] - ladder[j + 1]) * (lps[j + 1] - lps[j]);
            let swapped = accept_log_ratio(log_ratio, &mut swap_rng);
            if swapped {
                xs.swap(j, j + 1);
                lps.swap(j, j + 1);
            }
            result.swaps.push(SwapEvent {
                iteration: t,
                pair: j,
                accepted: swapped,
            });
        }
        result.push(&xs[0], cold_accepted);
    }
    let x = xs.swap_remove(0);
    Ok(finish(result, x, config.iterations, tallies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ladder_is_geometric() {
        let l = geometric_ladder(5, 0.1);
        assert_eq!(l[0], 1.0);
        assert_relative_eq!(l[4], 0.1, epsilon = 1e-15);
        assert_relative_eq!(l[1] / l[0], l[2] / l[1], epsilon = 1e-12);
        assert_eq!(geometric_ladder(1, 0.1), vec![1.0]);
    }

    #[test]
    fn running_moments_match_two_pass() {
        let data = [[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [-2.0, 4.0]];
        let mut m = RunningMoments::new(2);
        for r in &data {
            m.push(r);
        }
        let n = data.len() as f64;
        let mean = [
            data.iter().map(|r| r[0]).sum::<f64>() / n,
            data.iter().map(|r| r[1]).sum::<f64>() / n,
        ];
        let cov = m.covariance();
        for i in 0..2 {
            for j in 0..2 {
                let c: f64 = data
                    .iter()
                    .map(|r| (r[i] - mean[i]) * (r[j] - mean[j]))
                    .sum::<f64>()
                    / (n - 1.0);
                assert_relative_eq!(cov[i * 2 + j], c, epsilon = 1e-12);
            }
        }
    }
}
