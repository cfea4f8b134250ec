//! Small dense linear algebra on row-major `f64` buffers.
//!
//! Dimensions in this crate are tiny (2 to 42), so everything here is a
//! straightforward loop over a `Vec<f64>`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Smallest value a diagonal entry of a [`CholeskyFactor`] may take.
pub const DIAG_FLOOR: f64 = 1e-6;

/// Lower-triangular factor `L` of a proposal covariance `L Lᵀ`.
///
/// Entries above the diagonal are exactly zero and every diagonal entry is at
/// least [`DIAG_FLOOR`], so `L Lᵀ` is always symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CholeskyFactor {
    dim: usize,
    data: Vec<f64>,
}

impl CholeskyFactor {
    /// `scale · I`.
    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = scale;
        }
        Self::from_row_major(dim, data)
    }

    /// Builds a factor from a full row-major `dim × dim` buffer.
    ///
    /// Rejects nonzero upper-triangle entries and diagonals below the floor.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFactor("dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        for i in 0..dim {
            for j in 0..dim {
                let v = data[i * dim + j];
                if !v.is_finite() {
                    return Err(Error::InvalidFactor("non-finite entry"));
                }
                if j > i && v != 0.0 {
                    return Err(Error::InvalidFactor("nonzero entry above the diagonal"));
                }
            }
            let d = data[i * dim + i];
            if d < DIAG_FLOOR {
                return Err(Error::DiagonalBelowFloor { index: i, value: d });
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds a factor from nested rows, e.g. `&[[2.0, 0.0], [0.5, 1.0]]`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, data)
    }

    /// Lower Cholesky factor of a symmetric positive definite matrix.
    pub fn decompose(dim: usize, cov: &[f64]) -> Result<Self> {
        let data = cholesky_lower(dim, cov)?;
        // A valid decomposition can still produce a tiny pivot.
        let mut f = Self { dim, data };
        f.floor_diagonal();
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `Σ log L_ii`, i.e. `½ log det(L Lᵀ)`.
    pub fn log_diag_sum(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).ln()).sum()
    }

    /// `out = L v`.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        let k = self.dim;
        for i in 0..k {
            let row = &self.data[i * k..i * k + i + 1];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Solves `L z = rhs` by forward substitution, writing `z` into `out`.
    pub fn solve_lower(&self, rhs: &[f64], out: &mut [f64]) {
        let k = self.dim;
        for i in 0..k {
            let row = &self.data[i * k..i * k + i];
            let acc: f64 = row.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
            out[i] = (rhs[i] - acc) / self.data[i * k + i];
        }
    }

    /// Row-major `L Lᵀ`.
    pub fn covariance(&self) -> Vec<f64> {
        let k = self.dim;
        let mut cov = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|m| self.get(i, m) * self.get(j, m)).sum();
                cov[i * k + j] = s;
                cov[j * k + i] = s;
            }
        }
        cov
    }

    /// `L += step · G` on the lower triangle, then floors the diagonal.
    ///
    /// Entries of `g` above the diagonal are ignored.
    pub(crate) fn add_scaled_lower(&mut self, step: f64, g: &[f64]) {
        let k = self.dim;
        for i in 0..k {
            for j in 0..=i {
                self.data[i * k + j] += step * g[i * k + j];
            }
        }
        self.floor_diagonal();
    }

    fn floor_diagonal(&mut self) {
        let k = self.dim;
        for i in 0..k {
            let d = &mut self.data[i * k + i];
            // NaN also lands on the floor.
            if !(*d >= DIAG_FLOOR) {
                *d = DIAG_FLOOR;
            }
        }
    }

    /// 64-bit FNV-1a over the dimension and the raw entry bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.dim as u64);
        for v in &self.data {
            h.write_u64(v.to_bits());
        }
        h.finish()
    }
}

/// Log-density of `N(mean, L Lᵀ)` at `x`.
pub fn gaussian_log_density(x: &[f64], mean: &[f64], factor: &CholeskyFactor) -> f64 {
    let k = factor.dim();
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let mut z = vec![0.0; k];
    factor.solve_lower(&diff, &mut z);
    let quad: f64 = z.iter().map(|v| v * v).sum();
    -0.5 * quad - factor.log_diag_sum() - 0.5 * k as f64 * (2.0 * core::f64::consts::PI).ln()
}

/// Lower Cholesky factor of a row-major SPD matrix, without flooring.
pub fn cholesky_lower(dim: usize, a: &[f64]) -> Result<Vec<f64>> {
    if a.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            got: a.len(),
        });
    }
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for m in 0..j {
                s -= l[i * dim + m] * l[j * dim + m];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// `log Σ exp(v_i)` with max subtraction. Returns `-∞` for an empty or
/// all-`-∞` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}
