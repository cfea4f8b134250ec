use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{accept_log_ratio, fill_standard_normal, proposal_log_density};
use crate::linalg::{gaussian_log_density, squared_distance, CholeskyFactor, Fnv1a};
use crate::targets::Target;
use crate::{Error, Result};

/// Positions and factors recorded during an adaptive phase.
///
/// Once built the bank is never modified; the non-adaptive phase only reads
/// it through nearest-neighbour lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyBank {
    dim: usize,
    positions: Vec<Vec<f64>>,
    factors: Vec<CholeskyFactor>,
    /// Adaptive-phase iteration each entry was recorded at.
    iterations: Vec<usize>,
}

impl CholeskyBank {
    pub fn new(positions: Vec<Vec<f64>>, factors: Vec<CholeskyFactor>) -> Result<Self> {
        let iterations = (0..positions.len()).collect();
        Self::with_iterations(positions, factors, iterations)
    }

    pub fn with_iterations(
        positions: Vec<Vec<f64>>,
        factors: Vec<CholeskyFactor>,
        iterations: Vec<usize>,
    ) -> Result<Self> {
        let Some(first) = positions.first() else {
            return Err(Error::EmptyBank);
        };
        let dim = first.len();
        if factors.len() != positions.len() || iterations.len() != positions.len() {
            return Err(Error::config("bank positions and factors differ in length"));
        }
        for (p, f) in positions.iter().zip(&factors) {
            if p.len() != dim || f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: if p.len() != dim { p.len() } else { f.dim() },
                });
            }
        }
        Ok(Self {
            dim,
            positions,
            factors,
            iterations,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn factors(&self) -> &[CholeskyFactor] {
        &self.factors
    }

    pub fn iterations(&self) -> &[usize] {
        &self.iterations
    }

    /// Index of the stored position closest to `z` in Euclidean distance;
    /// ties go to the lowest index.
    pub fn nearest_index(&self, z: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.positions.iter().enumerate() {
            let d = squared_distance(p, z);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Hash over every stored value, for immutability checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.positions.len() as u64);
        for ((p, f), it) in self.positions.iter().zip(&self.factors).zip(&self.iterations) {
            h.write_u64(*it as u64);
            for v in p {
                h.write_u64(v.to_bits());
            }
            h.write_u64(f.fingerprint());
        }
        h.finish()
    }
}

/// Factor stored with the bank position nearest to `z`.
pub fn nearest_bank_factor<'a>(bank: &'a CholeskyBank, z: &[f64]) -> &'a CholeskyFactor {
    &bank.factors[bank.nearest_index(z)]
}

/// Outcome of one frozen-bank Metropolis-Hastings step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenStep {
    pub accepted: bool,
    pub log_alpha: f64,
}

/// Time-invariant Metropolis-Hastings kernel driven by a [`CholeskyBank`].
///
/// From `x` it proposes `y ~ N(x, C Cᵀ)` with `C` the bank factor nearest
/// to `x`, and accepts with
/// `min{1, p(y) q(x | y) / (p(x) q(y | x))}`, where the reverse density
/// uses the factor nearest to `y`.
#[derive(Debug, Clone, Copy)]
pub struct FrozenKernel<'a> {
    bank: &'a CholeskyBank,
}

impl<'a> FrozenKernel<'a> {
    pub fn new(bank: &'a CholeskyBank) -> Self {
        Self { bank }
    }

    pub fn bank(&self) -> &'a CholeskyBank {
        self.bank
    }

    /// `log α_f` before the `min{0, ·}`.
    pub fn log_acceptance(&self, x: &[f64], lp_x: f64, y: &[f64], lp_y: f64) -> f64 {
        let fwd = self.bank.nearest_index(x);
        let rev = self.bank.nearest_index(y);
        let mut log_ratio = lp_y - lp_x;
        if fwd != rev {
            let q_fwd = gaussian_log_density(y, x, &self.bank.factors[fwd]);
            let q_rev = gaussian_log_density(x, y, &self.bank.factors[rev]);
            log_ratio += q_rev - q_fwd;
        }
        log_ratio
    }

    /// Advances `(x, lp_x)` by one step.
    pub fn step<T, R>(&self, target: &T, x: &mut [f64], lp_x: &mut f64, rng: &mut R) -> Result<FrozenStep>
    where
        T: Target + ?Sized,
        R: Rng + ?Sized,
    {
        let k = x.len();
        let factor = nearest_bank_factor(self.bank, x);
        let mut eps = vec![0.0; k];
        fill_standard_normal(rng, &mut eps);
        let mut y = vec![0.0; k];
        factor.mul_vec(&eps, &mut y);
        y.iter_mut().zip(x.iter()).for_each(|(y, x)| *y += x);
        let lp_y = proposal_log_density(target, &y)?;
        let log_alpha = self.log_acceptance(x, *lp_x, &y, lp_y);
        let accepted = accept_log_ratio(log_alpha, rng);
        if accepted {
            x.copy_from_slice(&y);
            *lp_x = lp_y;
        }
        Ok(FrozenStep {
            accepted,
            log_alpha,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank_1d() -> CholeskyBank {
        CholeskyBank::new(
            vec![vec![-1.0], vec![1.0], vec![1.0]],
            vec![
                CholeskyFactor::scaled_identity(1, 0.5).unwrap(),
                CholeskyFactor::scaled_identity(1, 2.0).unwrap(),
                CholeskyFactor::scaled_identity(1, 3.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_bank_is_rejected() {
        assert_eq!(CholeskyBank::new(vec![], vec![]), Err(Error::EmptyBank));
    }

    #[test]
    fn nearest_prefers_lowest_index_on_ties() {
        let bank = bank_1d();
        assert_eq!(bank.nearest_index(&[1.0]), 1);
        assert_eq!(nearest_bank_factor(&bank, &[5.0]).get(0, 0), 2.0);
        // Equidistant from -1 and 1.
        assert_eq!(bank.nearest_index(&[0.0]), 0);
    }

    #[test]
    fn single_entry_bank_is_symmetric() {
        let bank = CholeskyBank::new(
            vec![vec![0.0, 0.0]],
            vec![CholeskyFactor::from_rows(&[[1.0, 0.0], [0.3, 0.7]]).unwrap()],
        )
        .unwrap();
        let k = FrozenKernel::new(&bank);
        let la = k.log_acceptance(&[0.1, 0.2], -1.5, &[3.0, -4.0], -2.25);
        assert_eq!(la, -0.75);
    }

    #[test]
    fn fingerprint_tracks_contents() {
        let a = bank_1d();
        let mut positions = a.positions().to_vec();
        positions[0][0] = -1.0 + 1e-12;
        let b = CholeskyBank::new(positions, a.factors().to_vec()).unwrap();
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
