//! Divergence-minimization MCMC.
//!
//! The divergence-minimization (DM) sampler adapts a Gaussian random-walk
//! proposal `N(x, L Lᵀ)` at every iteration by taking one stochastic
//! gradient-ascent step on a lower bound of
//! `exp(-β·KL(q‖p)) · E_q[α(x, y)]` with respect to the Cholesky factor `L`.
//! Scout MCMC pairs a DM main chain with a single heavily tempered random-walk
//! chain and periodically proposes to swap the two. Both samplers come in a
//! perpetually adapting form and a two-phase form whose second phase is an
//! ordinary Metropolis-Hastings chain driven by a frozen bank of factors.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! experiment harness and the command-line interface live in `scout-cli`.
//!
//! ```
//! use scout_core::samplers::{run, SamplerConfig, SamplerKind};
//! use scout_core::targets::Banana;
//!
//! let target = Banana::default();
//! let mut config = SamplerConfig::new(SamplerKind::Dm, 2_000, vec![0.0, 0.0]);
//! config.seed = 7;
//! let result = run(&target, &config).unwrap();
//! assert_eq!(result.len(), 2_000);
//! ```
#![no_std]

extern crate alloc;

pub mod diagnostics;
pub mod divergence;
mod error;
pub mod linalg;
pub mod rng;
pub mod samplers;
pub mod targets;

pub use error::{Error, Result};
pub use linalg::CholeskyFactor;
