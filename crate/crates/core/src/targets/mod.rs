//! Target densities.
//!
//! Every target exposes an unnormalized-or-normalized log-density and its
//! hand-coded gradient. Where the construction permits, a target also knows
//! its true moments and can draw exact samples, which the test-suite uses as
//! an independent oracle.

use alloc::vec::Vec;
use core::ops::Range;
use rand::RngCore;

use crate::{Error, Result};

mod banana;
mod basis;
mod gaussian;
mod horseshoe;

pub use banana::{
    banana_bunch_log_density, banana_log_density, double_banana_log_density, Banana,
    BananaMixture, BananaParams, BUNCH_APEX_DISTANCE, BUNCH_CURVATURE, BUNCH_SCALE_ALONG,
    BUNCH_SCALE_ACROSS, DOUBLE_BANANA_REFLECTION_Y,
};
pub use basis::{basis_vector_log_density, BasisVector};
pub use gaussian::Gaussian;
pub use horseshoe::{
    generate_horseshoe_data, horseshoe_log_posterior, Horseshoe, HorseshoeRegressionData,
    HORSESHOE_SIGNAL,
};

/// A differentiable target density on `ℝ^dim`.
pub trait Target {
    fn dim(&self) -> usize;

    /// `log p(x)`. May be `-∞`; must not be NaN for finite `x`.
    fn log_density(&self, x: &[f64]) -> f64;

    /// Writes `∇ log p(x)` into `grad`.
    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]);

    /// Both at once; targets override this when the two share work.
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.grad_log_density(x, grad);
        self.log_density(x)
    }

    /// Known `E[X]` over [`Target::moment_coordinates`].
    fn true_mean(&self) -> Option<Vec<f64>> {
        None
    }

    /// Known elementwise `E[X²]` over [`Target::moment_coordinates`].
    fn true_second_moment(&self) -> Option<Vec<f64>> {
        None
    }

    /// Coordinates the declared moments refer to. All of them by default;
    /// the horseshoe posterior only declares the regression coefficients.
    fn moment_coordinates(&self) -> Range<usize> {
        0..self.dim()
    }

    /// An exact draw from the target, when one is cheap to produce.
    fn direct_sample(&self, _rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        None
    }

    /// Mode locations used for visit counting.
    fn modes(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

impl<T: Target + ?Sized> Target for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        (**self).grad_log_density(x, grad)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(x, grad)
    }
    fn true_mean(&self) -> Option<Vec<f64>> {
        (**self).true_mean()
    }
    fn true_second_moment(&self) -> Option<Vec<f64>> {
        (**self).true_second_moment()
    }
    fn moment_coordinates(&self) -> Range<usize> {
        (**self).moment_coordinates()
    }
    fn direct_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        (**self).direct_sample(rng)
    }
    fn modes(&self) -> Vec<Vec<f64>> {
        (**self).modes()
    }
}

impl<T: Target + ?Sized> Target for alloc::boxed::Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        (**self).grad_log_density(x, grad)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(x, grad)
    }
    fn true_mean(&self) -> Option<Vec<f64>> {
        (**self).true_mean()
    }
    fn true_second_moment(&self) -> Option<Vec<f64>> {
        (**self).true_second_moment()
    }
    fn moment_coordinates(&self) -> Range<usize> {
        (**self).moment_coordinates()
    }
    fn direct_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        (**self).direct_sample(rng)
    }
    fn modes(&self) -> Vec<Vec<f64>> {
        (**self).modes()
    }
}

pub(crate) fn check_input(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteInput { index }),
        None => Ok(()),
    }
}

/// `log p(x)` with input and output validation.
pub fn checked_log_density<T: Target + ?Sized>(target: &T, x: &[f64]) -> Result<f64> {
    check_input(target.dim(), x)?;
    let lp = target.log_density(x);
    if lp.is_nan() {
        return Err(Error::NanLogDensity);
    }
    Ok(lp)
}
