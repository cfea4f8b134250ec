//! Samplers behind one configuration type and one result type.
//!
//! | id             | algorithm                                                |
//! |----------------|----------------------------------------------------------|
//! | `dm`           | DM sampler, perpetual adaptation                         |
//! | `dm_finite`    | DM sampler, adaptive phase then frozen-bank MH           |
//! | `scout`        | DM main chain plus one tempered scout chain with swaps   |
//! | `scout_finite` | Scout MCMC whose main chain switches to frozen-bank MH   |
//! | `rwm`          | random-walk Metropolis                                   |
//! | `arwm`         | adaptive random-walk Metropolis                          |
//! | `mala`         | Metropolis-adjusted Langevin                             |
//! | `pt`           | parallel tempering over random-walk chains               |
//!
//! Every run is a deterministic function of the target, the configuration and
//! its seed. Randomness for each role comes from its own stream (see
//! [`crate::rng`]).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::divergence::DmHyperparams;
use crate::linalg::CholeskyFactor;
use crate::targets::{checked_log_density, Target};
use crate::{Error, Result};

mod bank;
mod baselines;
mod dm;

pub use bank::{nearest_bank_factor, CholeskyBank, FrozenKernel};
pub use baselines::{run_arwm, run_mala, run_pt, run_rwm};
pub use dm::{run_dm_finite, run_dm_perpetual, run_scout_finite, run_scout_perpetual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SamplerKind {
    Rwm,
    Arwm,
    Mala,
    Pt,
    Dm,
    DmFinite,
    Scout,
    ScoutFinite,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 8] = [
        SamplerKind::Rwm,
        SamplerKind::Arwm,
        SamplerKind::Mala,
        SamplerKind::Pt,
        SamplerKind::Dm,
        SamplerKind::DmFinite,
        SamplerKind::Scout,
        SamplerKind::ScoutFinite,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SamplerKind::Rwm => "rwm",
            SamplerKind::Arwm => "arwm",
            SamplerKind::Mala => "mala",
            SamplerKind::Pt => "pt",
            SamplerKind::Dm => "dm",
            SamplerKind::DmFinite => "dm_finite",
            SamplerKind::Scout => "scout",
            SamplerKind::ScoutFinite => "scout_finite",
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, SamplerKind::DmFinite | SamplerKind::ScoutFinite)
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::config(alloc::format!("unknown sampler id `{s}`")))
    }
}

/// The tempered companion chain of Scout MCMC.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScoutParams {
    /// Tempering exponent `τ ∈ (0, 1]`.
    pub temperature: f64,
    /// Standard deviation `σ_s` of the scout's isotropic proposal.
    pub scale: f64,
    /// Swap attempted when `t mod k = 0`; `None` disables swaps.
    pub swap_interval: Option<usize>,
}

impl Default for ScoutParams {
    fn default() -> Self {
        Self {
            temperature: 0.1,
            scale: 9.0,
            swap_interval: Some(20),
        }
    }
}

/// Two-phase settings for `dm_finite` and `scout_finite`.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FiniteParams {
    /// Adaptive-phase length `F`; `None` means `M/2`.
    pub threshold: Option<usize>,
    /// Bank size `s`; `None` means `M/20`.
    pub bank_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PtParams {
    pub chains: usize,
    /// Hottest tempering exponent; `None` uses `scout.temperature`.
    pub min_temperature: Option<f64>,
    /// Proposal scale of the cold chain; chain `i` uses `scale / √τ_i`.
    pub scale: f64,
}

impl Default for PtParams {
    fn default() -> Self {
        Self {
            chains: 5,
            min_temperature: None,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MalaParams {
    /// Langevin step `λ`: `y = x + (λ²/2)∇log p(x) + λε`.
    pub step: f64,
}

impl Default for MalaParams {
    fn default() -> Self {
        Self { step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RwmParams {
    pub scale: f64,
}

impl Default for RwmParams {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ArwmParams {
    /// Scale of the fixed warm-start kernel.
    pub initial_scale: f64,
    /// Covariance multiplier; `None` means `2.38²/d`.
    pub scaling: Option<f64>,
    /// Ridge added to the empirical covariance.
    pub regularization: f64,
    /// Warm-start length; `None` means `2d`.
    pub warmup: Option<usize>,
}

impl Default for ArwmParams {
    fn default() -> Self {
        Self {
            initial_scale: 1.0,
            scaling: None,
            regularization: 0.01,
            warmup: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Total iterations `M`; one retained row per iteration.
    pub iterations: usize,
    pub x0: Vec<f64>,
    pub seed: u64,
    pub dm: DmHyperparams,
    pub scout: ScoutParams,
    pub finite: FiniteParams,
    pub pt: PtParams,
    pub mala: MalaParams,
    pub rwm: RwmParams,
    pub arwm: ArwmParams,
    /// Record the main-chain factor every `n` adaptive iterations.
    pub cholesky_stride: Option<usize>,
}

impl SamplerConfig {
    pub fn new(kind: SamplerKind, iterations: usize, x0: Vec<f64>) -> Self {
        Self {
            kind,
            iterations,
            x0,
            seed: 0,
            dm: DmHyperparams::default(),
            scout: ScoutParams::default(),
            finite: FiniteParams::default(),
            pt: PtParams::default(),
            mala: MalaParams::default(),
            rwm: RwmParams::default(),
            arwm: ArwmParams::default(),
            cholesky_stride: None,
        }
    }

    pub fn finite_threshold(&self) -> usize {
        self.finite.threshold.unwrap_or(self.iterations / 2)
    }

    pub fn bank_size(&self) -> usize {
        self.finite.bank_size.unwrap_or(self.iterations / 20)
    }

    pub fn pt_min_temperature(&self) -> f64 {
        self.pt.min_temperature.unwrap_or(self.scout.temperature)
    }

    /// Checks the configuration against a target dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("iterations must be positive"));
        }
        if self.x0.len() != dim {
            return Err(Error::config(alloc::format!(
                "initial point has {} coordinates, target has {dim}",
                self.x0.len()
            )));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self.kind {
            SamplerKind::Dm | SamplerKind::DmFinite | SamplerKind::Scout | SamplerKind::ScoutFinite => {
                self.dm.validate()?
            }
            SamplerKind::Rwm => {
                if !positive(self.rwm.scale) {
                    return Err(Error::config("rwm.scale must be positive"));
                }
            }
            SamplerKind::Arwm => {
                if !positive(self.arwm.initial_scale) || !positive(self.arwm.regularization) {
                    return Err(Error::config("arwm scales must be positive"));
                }
                if matches!(self.arwm.scaling, Some(s) if !positive(s)) {
                    return Err(Error::config("arwm.scaling must be positive"));
                }
            }
            SamplerKind::Mala => {
                if !positive(self.mala.step) {
                    return Err(Error::config("mala.step must be positive"));
                }
            }
            SamplerKind::Pt => {
                if self.pt.chains == 0 {
                    return Err(Error::config("pt.chains must be at least 1"));
                }
                if !positive(self.pt.scale) {
                    return Err(Error::config("pt.scale must be positive"));
                }
                let t = self.pt_min_temperature();
                if !(t > 0.0 && t <= 1.0) {
                    return Err(Error::config("pt.min_temperature must lie in (0, 1]"));
                }
            }
        }
        if matches!(self.kind, SamplerKind::Scout | SamplerKind::ScoutFinite) {
            let t = self.scout.temperature;
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::config("scout.temperature must lie in (0, 1]"));
            }
            if !positive(self.scout.scale) {
                return Err(Error::config("scout.scale must be positive"));
            }
            if self.scout.swap_interval == Some(0) {
                return Err(Error::config("scout.swap_interval must be at least 1"));
            }
        }
        if self.kind.is_finite() {
            let f = self.finite_threshold();
            let s = self.bank_size();
            if f == 0 || f >= self.iterations {
                return Err(Error::config("finite.threshold must satisfy 0 < F < M"));
            }
            if s == 0 || s > f + 1 {
                return Err(Error::config("finite.bank_size must satisfy 0 < s ≤ F + 1"));
            }
        }
        if self.cholesky_stride == Some(0) {
            return Err(Error::config("cholesky_stride must be at least 1"));
        }
        Ok(())
    }
}

/// Accept and attempt counts of one chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainTally {
    pub accepted: u64,
    pub attempted: u64,
}

impl ChainTally {
    fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// A swap attempt between two chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapEvent {
    pub iteration: usize,
    /// Lower chain index of the pair (0 is the main/cold chain).
    pub pair: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CholeskySnapshot {
    pub iteration: usize,
    pub factor: CholeskyFactor,
}

/// State of a sampler after its last iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub factor: Option<CholeskyFactor>,
    pub scout: Option<Vec<f64>>,
    pub iteration: usize,
    /// Main chain first, then scout or tempered chains.
    pub tallies: Vec<ChainTally>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub kind: SamplerKind,
    pub seed: u64,
    pub dim: usize,
    /// Row-major `iterations × dim`; row `t` is the main chain after step `t`.
    pub samples: Vec<f64>,
    /// Main-chain acceptance per iteration.
    pub accepted: Vec<bool>,
    pub swaps: Vec<SwapEvent>,
    pub snapshots: Vec<CholeskySnapshot>,
    /// First iteration of the non-adaptive phase, for the finite variants.
    pub phase_boundary: Option<usize>,
    pub bank: Option<CholeskyBank>,
    /// Bank fingerprint when the frozen phase began and when it ended.
    pub bank_fingerprints: Option<(u64, u64)>,
    pub final_state: ChainState,
    /// Step size at the end of the run (differs from `dm.gamma` only when
    /// shrinking on rejection).
    pub final_gamma: Option<f64>,
}

impl RunResult {
    pub(crate) fn with_capacity(kind: SamplerKind, seed: u64, dim: usize, iterations: usize) -> Self {
        Self {
            kind,
            seed,
            dim,
            samples: Vec::with_capacity(iterations * dim),
            accepted: Vec::with_capacity(iterations),
            swaps: Vec::new(),
            snapshots: Vec::new(),
            phase_boundary: None,
            bank: None,
            bank_fingerprints: None,
            final_state: ChainState {
                x: Vec::new(),
                factor: None,
                scout: None,
                iteration: 0,
                tallies: Vec::new(),
            },
            final_gamma: None,
        }
    }

    pub(crate) fn push(&mut self, x: &[f64], accepted: bool) {
        self.samples.extend_from_slice(x);
        self.accepted.push(accepted);
    }

    /// Number of retained rows.
    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.samples[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dim)
    }

    /// Rows from `burn_in` onwards, as a flat slice.
    pub fn retained(&self, burn_in: usize) -> &[f64] {
        let start = burn_in.min(self.len()) * self.dim;
        &self.samples[start..]
    }

    pub fn main_tally(&self) -> ChainTally {
        self.final_state.tallies.first().copied().unwrap_or_default()
    }
}

/// Runs the sampler named by `config.kind`.
pub fn run<T: Target + ?Sized>(target: &T, config: &SamplerConfig) -> Result<RunResult> {
    match config.kind {
        SamplerKind::Rwm => run_rwm(target, config),
        SamplerKind::Arwm => run_arwm(target, config),
        SamplerKind::Mala => run_mala(target, config),
        SamplerKind::Pt => run_pt(target, config),
        SamplerKind::Dm => run_dm_perpetual(target, config),
        SamplerKind::DmFinite => run_dm_finite(target, config),
        SamplerKind::Scout => run_scout_perpetual(target, config),
        SamplerKind::ScoutFinite => run_scout_finite(target, config),
    }
}

/// Accepts with probability `min{1, exp(log_ratio)}`.
///
/// A uniform is drawn only when the ratio is below one.
pub fn accept_log_ratio<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() {
        return false;
    }
    let u: f64 = rng.random();
    u.ln() < log_ratio
}

/// Metropolis rule `min{1, p(y)/p(x)}` evaluated in log space.
pub fn metropolis_accept<T, R>(target: &T, x: &[f64], y: &[f64], rng: &mut R) -> Result<bool>
where
    T: Target + ?Sized,
    R: Rng + ?Sized,
{
    let lx = checked_log_density(target, x)?;
    let ly = checked_log_density(target, y)?;
    Ok(accept_log_ratio(ly - lx, rng))
}

/// Log-density at a proposal; NaN is an error, `-∞` is a plain rejection.
pub(crate) fn proposal_log_density<T: Target + ?Sized>(target: &T, y: &[f64]) -> Result<f64> {
    let lp = target.log_density(y);
    if lp.is_nan() {
        Err(Error::NanLogDensity)
    } else {
        Ok(lp)
    }
}

pub(crate) fn initial_log_density<T: Target + ?Sized>(target: &T, x0: &[f64]) -> Result<f64> {
    let lp = checked_log_density(target, x0)?;
    if !lp.is_finite() {
        return Err(Error::NonFiniteCurrent);
    }
    Ok(lp)
}

pub(crate) fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(rand_distr::StandardNormal);
    }
}

pub(crate) fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}
