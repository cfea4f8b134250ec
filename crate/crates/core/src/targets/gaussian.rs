use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::Target;
use crate::{Error, Result};

/// Axis-aligned Gaussian `N(mean, diag(std²))`, used for sanity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    std: Vec<f64>,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != std.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: std.len(),
            });
        }
        if std.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::config("Gaussian standard deviations must be positive"));
        }
        let log_norm = -std.iter().map(|s| s.ln()).sum::<f64>()
            - 0.5 * mean.len() as f64 * (2.0 * PI).ln();
        Ok(Self {
            mean,
            std,
            log_norm,
        })
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("positive dimension")
    }

    pub fn isotropic(dim: usize, std: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![std; dim])
    }
}

impl Target for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let q: f64 = x
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| {
                let z = (x - m) / s;
                z * z
            })
            .sum();
        self.log_norm - 0.5 * q
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        for (((g, x), m), s) in grad.iter_mut().zip(x).zip(&self.mean).zip(&self.std) {
            *g = -(x - m) / (s * s);
        }
    }

    fn true_mean(&self) -> Option<Vec<f64>> {
        Some(self.mean.clone())
    }

    fn true_second_moment(&self) -> Option<Vec<f64>> {
        Some(
            self.mean
                .iter()
                .zip(&self.std)
                .map(|(m, s)| m * m + s * s)
                .collect(),
        )
    }

    fn direct_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        Some(
            self.mean
                .iter()
                .zip(&self.std)
                .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        vec![self.mean.clone()]
    }
}
