use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{check_input, Target};
use crate::linalg::log_sum_exp;
use crate::Result;

/// Equal-weight mixture of `N(±r·e_i, I)` over every basis vector `e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    dim: usize,
    radius: f64,
    centers: Vec<Vec<f64>>,
    log_norm: f64,
}

impl Default for BasisVector {
    fn default() -> Self {
        Self::new(4, 10.0)
    }
}

impl BasisVector {
    pub fn new(dim: usize, radius: f64) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let mut centers = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; dim];
                c[i] = sign * radius;
                centers.push(c);
            }
        }
        let log_norm = -((2 * dim) as f64).ln() - 0.5 * dim as f64 * (2.0 * PI).ln();
        Self {
            dim,
            radius,
            centers,
            log_norm,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn component_terms(&self, x: &[f64]) -> Vec<f64> {
        self.centers
            .iter()
            .map(|c| {
                let q: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                self.log_norm - 0.5 * q
            })
            .collect()
    }
}

impl Target for BasisVector {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        log_sum_exp(&self.component_terms(x))
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(x, grad);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let terms = self.component_terms(x);
        let total = log_sum_exp(&terms);
        grad.copy_from_slice(x);
        grad.iter_mut().for_each(|g| *g = -*g);
        // ∇ = Σ w_k (μ_k − x) = Σ w_k μ_k − x.
        for (t, c) in terms.iter().zip(&self.centers) {
            let w = (t - total).exp();
            for (g, m) in grad.iter_mut().zip(c) {
                *g += w * m;
            }
        }
        total
    }

    fn true_mean(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }

    fn true_second_moment(&self) -> Option<Vec<f64>> {
        // Each axis carries mass ±r in 2 of the 2d components.
        let r2 = self.radius * self.radius;
        Some(vec![1.0 + r2 / self.dim as f64; self.dim])
    }

    fn direct_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let k = rng.random_range(0..self.centers.len());
        Some(
            self.centers[k]
                .iter()
                .map(|m| m + rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        self.centers.clone()
    }
}

/// `log p(x)` of the default 4D basis-vector mixture.
pub fn basis_vector_log_density(x: &[f64]) -> Result<f64> {
    check_input(4, x)?;
    Ok(BasisVector::default().log_density(x))
}
