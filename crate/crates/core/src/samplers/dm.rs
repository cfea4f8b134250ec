//! DM sampler and Scout MCMC, perpetual and finite.

use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;

use super::bank::{CholeskyBank, FrozenKernel};
use super::{
    accept_log_ratio, fill_standard_normal, initial_log_density, proposal_log_density, zeros,
    ChainState, ChainTally, CholeskySnapshot, RunResult, SamplerConfig, SamplerKind, SwapEvent,
};
use crate::divergence::{gradient_from_draws, DmHyperparams, GradientEstimate, STEP_SHRINK};
use crate::linalg::CholeskyFactor;
use crate::rng::{stream, Stream};
use crate::targets::Target;
use crate::{Error, Result};

/// Main chain of the DM sampler: position, its log-density and the current
/// Cholesky factor.
struct DmChain {
    x: Vec<f64>,
    lp: f64,
    factor: CholeskyFactor,
    gamma: f64,
    gamma_floor: f64,
    eps: Vec<f64>,
    y: Vec<f64>,
    draws: Vec<f64>,
}

impl DmChain {
    fn new(x0: &[f64], lp0: f64, hyper: &DmHyperparams) -> Result<Self> {
        let k = x0.len();
        Ok(Self {
            x: x0.to_vec(),
            lp: lp0,
            factor: CholeskyFactor::scaled_identity(k, hyper.sigma)?,
            gamma: hyper.gamma,
            gamma_floor: hyper.gamma / 100.0,
            eps: zeros(k),
            y: zeros(k),
            draws: zeros(k * hyper.j_draws),
        })
    }

    /// One iteration: propose with `C_t`, estimate the gradient at `x_t`,
    /// accept or reject, then `C_{t+1} = C_t + γ clip(G)` either way.
    fn step<T: Target + ?Sized>(
        &mut self,
        target: &T,
        hyper: &DmHyperparams,
        main: &mut ChaCha8Rng,
        grad: &mut ChaCha8Rng,
    ) -> Result<bool> {
        fill_standard_normal(main, &mut self.eps);
        self.factor.mul_vec(&self.eps, &mut self.y);
        self.y.iter_mut().zip(&self.x).for_each(|(y, x)| *y += x);

        let k = self.x.len();
        let raw = if hyper.reuse_proposal_draw {
            gradient_from_draws(target, &self.x, self.lp, &self.factor, hyper.beta, &self.eps)?
        } else {
            fill_standard_normal(grad, &mut self.draws);
            gradient_from_draws(target, &self.x, self.lp, &self.factor, hyper.beta, &self.draws)?
        };
        let draws_used = if hyper.reuse_proposal_draw { 1 } else { hyper.j_draws };
        let g = GradientEstimate::from_raw(k, raw, draws_used, hyper.clip_threshold());

        let lp_y = proposal_log_density(target, &self.y)?;
        let accepted = accept_log_ratio(lp_y - self.lp, main);
        if accepted {
            self.x.copy_from_slice(&self.y);
            self.lp = lp_y;
        }
        if self.gamma != 0.0 {
            self.factor = crate::divergence::update_cholesky(&self.factor, &g, self.gamma);
        }
        if hyper.shrink_on_reject && !accepted {
            self.gamma = (self.gamma * STEP_SHRINK).max(self.gamma_floor);
        }
        Ok(accepted)
    }
}

/// Random-walk chain on `p^τ`.
struct ScoutChain {
    x: Vec<f64>,
    lp: f64,
    y: Vec<f64>,
}

impl ScoutChain {
    fn step<T: Target + ?Sized>(
        &mut self,
        target: &T,
        temperature: f64,
        scale: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<bool> {
        fill_standard_normal(rng, &mut self.y);
        self.y
            .iter_mut()
            .zip(&self.x)
            .for_each(|(y, x)| *y = x + scale * *y);
        let lp_y = proposal_log_density(target, &self.y)?;
        let accepted = accept_log_ratio(temperature * (lp_y - self.lp), rng);
        if accepted {
            core::mem::swap(&mut self.x, &mut self.y);
            self.lp = lp_y;
        }
        Ok(accepted)
    }
}

/// `log` of `p(s) p(x)^τ / (p(x) p(s)^τ)`.
pub(crate) fn swap_log_ratio(lp_main: f64, lp_scout: f64, temperature: f64) -> f64 {
    (1.0 - temperature) * (lp_scout - lp_main)
}

/// Exchanges the main and scout states with the tempered swap probability.
fn attempt_swap(chain: &mut DmChain, scout: &mut ScoutChain, temperature: f64, rng: &mut ChaCha8Rng) -> bool {
    let log_ratio = swap_log_ratio(chain.lp, scout.lp, temperature);
    let swapped = accept_log_ratio(log_ratio, rng);
    if swapped {
        core::mem::swap(&mut chain.x, &mut scout.x);
        core::mem::swap(&mut chain.lp, &mut scout.lp);
    }
    swapped
}

/// Plan for recording the bank during the adaptive phase.
struct BankRecorder {
    /// Sorted adaptive-phase iterations in `0..=F` to record.
    chosen: Vec<usize>,
    next: usize,
    positions: Vec<Vec<f64>>,
    factors: Vec<CholeskyFactor>,
}

impl BankRecorder {
    fn new(threshold: usize, size: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut chosen = rand::seq::index::sample(rng, threshold + 1, size).into_vec();
        chosen.sort_unstable();
        Self {
            chosen,
            next: 0,
            positions: Vec::with_capacity(size),
            factors: Vec::with_capacity(size),
        }
    }

    fn observe(&mut self, t: usize, chain: &DmChain) {
        if self.chosen.get(self.next) == Some(&t) {
            self.positions.push(chain.x.clone());
            self.factors.push(chain.factor.clone());
            self.next += 1;
        }
    }

    fn finish(self) -> Result<CholeskyBank> {
        CholeskyBank::with_iterations(self.positions, self.factors, self.chosen)
    }
}

pub fn run_dm_perpetual<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    run_family(target, config, false, false)
}

pub fn run_dm_finite<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    run_family(target, config, false, true)
}

pub fn run_scout_perpetual<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    run_family(target, config, true, false)
}

pub fn run_scout_finite<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    run_family(target, config, true, true)
}

fn run_family<T: Target + ?Sized>(
    target: &T,
    config: &SamplerConfig,
    with_scout: bool,
    finite: bool,
) -> Result<RunResult> {
    let kind = match (with_scout, finite) {
        (false, false) => SamplerKind::Dm,
        (false, true) => SamplerKind::DmFinite,
        (true, false) => SamplerKind::Scout,
        (true, true) => SamplerKind::ScoutFinite,
    };
    let mut config = config.clone();
    config.kind = kind;
    let dim = target.dim();
    config.validate(dim)?;
    let hyper = &config.dm;
    let m = config.iterations;
    let seed = config.seed;
    let lp0 = initial_log_density(target, &config.x0)?;

    let mut main_rng = stream(seed, Stream::Main);
    let mut grad_rng = stream(seed, Stream::Gradient);
    let mut scout_rng = stream(seed, Stream::Scout);
    let mut swap_rng = stream(seed, Stream::Swap);
    let mut frozen_rng = stream(seed, Stream::Frozen);

    let mut chain = DmChain::new(&config.x0, lp0, hyper)?;
    let mut scout = with_scout.then(|| ScoutChain {
        x: config.x0.clone(),
        lp: lp0,
        y: zeros(dim),
    });
    let threshold = if finite { config.finite_threshold() } else { m };
    let mut recorder = finite.then(|| {
        let mut bank_rng = stream(seed, Stream::Bank);
        BankRecorder::new(threshold, config.bank_size(), &mut bank_rng)
    });
    let mut bank: Option<CholeskyBank> = None;
    let mut bank_start = 0u64;

    let mut result = RunResult::with_capacity(kind, seed, dim, m);
    let mut main_tally = ChainTally::default();
    let mut scout_tally = ChainTally::default();

    for t in 0..m {
        let accepted = if t < threshold {
            if let Some(rec) = recorder.as_mut() {
                rec.observe(t, &chain);
            }
            if let Some(stride) = config.cholesky_stride {
                if t % stride == 0 {
                    result.snapshots.push(CholeskySnapshot {
                        iteration: t,
                        factor: chain.factor.clone(),
                    });
                }
            }
            chain
                .step(target, hyper, &mut main_rng, &mut grad_rng)
                .map_err(|e| e.at(t))?
        } else {
            if t == threshold {
                let mut rec = recorder.take().ok_or(Error::EmptyBank)?;
                rec.observe(t, &chain);
                let b = rec.finish().map_err(|e| e.at(t))?;
                bank_start = b.fingerprint();
                bank = Some(b);
                result.phase_boundary = Some(t);
            }
            let kernel = FrozenKernel::new(bank.as_ref().ok_or(Error::EmptyBank)?);
            kernel
                .step(target, &mut chain.x, &mut chain.lp, &mut frozen_rng)
                .map_err(|e| e.at(t))?
                .accepted
        };
        main_tally.record(accepted);

        if let Some(s) = scout.as_mut() {
            let params = &config.scout;
            let acc = s
                .step(target, params.temperature, params.scale, &mut scout_rng)
                .map_err(|e| e.at(t))?;
            scout_tally.record(acc);
            if let Some(k) = params.swap_interval {
                if t % k == 0 {
                    let swapped = attempt_swap(&mut chain, s, params.temperature, &mut swap_rng);
                    result.swaps.push(SwapEvent {
                        iteration: t,
                        pair: 0,
                        accepted: swapped,
                    });
                }
            }
        }

        result.push(&chain.x, accepted);
    }

    if let Some(b) = bank.as_ref() {
        result.bank_fingerprints = Some((bank_start, b.fingerprint()));
    }
    result.bank = bank;
    let mut tallies = vec![main_tally];
    if scout.is_some() {
        tallies.push(scout_tally);
    }
    result.final_gamma = Some(chain.gamma);
    result.final_state = ChainState {
        x: chain.x,
        factor: Some(chain.factor),
        scout: scout.map(|s| s.x),
        iteration: m,
        tallies,
    };
    Ok(result)
}
