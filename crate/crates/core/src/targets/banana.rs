//! Banana-shaped densities and mixtures of them.
//!
//! A banana is the image of `(z1, z2) ~ N(0, diag(σ1², σ2²))` under the
//! unit-Jacobian map `(z1, z2) ↦ (z1, z2 − b·z1²)`, followed by a rotation and a
//! translation. Its apex (the mode) sits at the translation and its tails bend
//! towards negative local `u2`. In three dimensions the banana lives in a
//! coordinate plane and the remaining axis is an independent Gaussian.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::{check_input, Target};
use crate::linalg::log_sum_exp;
use crate::{Error, Result};

/// Horizontal line the second double-banana component is mirrored through.
pub const DOUBLE_BANANA_REFLECTION_Y: f64 = -25.0;

/// Distance of every banana-bunch apex from the origin.
pub const BUNCH_APEX_DISTANCE: f64 = 40.0;
/// Along-ridge scale of each banana-bunch component.
pub const BUNCH_SCALE_ALONG: f64 = 10.0;
/// Across-ridge and out-of-plane scale of each banana-bunch component.
pub const BUNCH_SCALE_ACROSS: f64 = 1.0;
/// Curvature `b` of the banana-bunch components, the smaller root of
/// `(40 − 100b)² + 2(100b)² + 102 = 1200`, which makes `E[X_i²] = 400`.
pub const BUNCH_CURVATURE: f64 = 0.101_015_467_617_224_48;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BananaParams {
    /// Curvature `b`.
    pub curvature: f64,
    /// `σ1`, scale along the ridge before bending.
    pub scale_x: f64,
    /// `σ2`, scale across the ridge.
    pub scale_y: f64,
    /// Counter-clockwise rotation of the local frame, in radians.
    pub rotation: f64,
    /// Apex location; its length fixes the dimension (2 or 3).
    pub translation: Vec<f64>,
    /// Axes carrying the local `(u1, u2)` coordinates.
    pub plane: (usize, usize),
    /// Scale of the out-of-plane axis in 3D.
    pub scale_perp: f64,
}

impl Default for BananaParams {
    fn default() -> Self {
        Self {
            curvature: 0.067,
            scale_x: 10.0,
            scale_y: 1.0,
            rotation: 0.0,
            translation: vec![0.0, 0.0],
            plane: (0, 1),
            scale_perp: 1.0,
        }
    }
}

impl BananaParams {
    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d != 2 && d != 3 {
            return Err(Error::config("banana translation must have length 2 or 3"));
        }
        let (a, b) = self.plane;
        if a == b || a >= d || b >= d {
            return Err(Error::config("banana plane axes must be distinct and in range"));
        }
        for s in [self.scale_x, self.scale_y, self.scale_perp] {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::config("banana scales must be positive"));
            }
        }
        if !self.curvature.is_finite() || !self.rotation.is_finite() {
            return Err(Error::config("banana curvature and rotation must be finite"));
        }
        if self.translation.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("banana translation must be finite"));
        }
        Ok(())
    }
}

/// A single banana density.
#[derive(Debug, Clone, PartialEq)]
pub struct Banana {
    params: BananaParams,
    cos: f64,
    sin: f64,
    perp: Option<usize>,
    log_norm: f64,
}

impl Default for Banana {
    fn default() -> Self {
        Self::new(BananaParams::default()).expect("default banana parameters are valid")
    }
}

/// `cos` and `sin` with values within rounding of 0 or ±1 snapped, so quarter
/// turns stay exact.
fn snapped_cos_sin(theta: f64) -> (f64, f64) {
    let snap = |v: f64| {
        if v.abs() < 1e-15 {
            0.0
        } else if (v.abs() - 1.0).abs() < 1e-15 {
            v.signum()
        } else {
            v
        }
    };
    (snap(theta.cos()), snap(theta.sin()))
}

impl Banana {
    pub fn new(params: BananaParams) -> Result<Self> {
        params.validate()?;
        let (cos, sin) = snapped_cos_sin(params.rotation);
        let d = params.dim();
        let perp = (d == 3).then(|| 3 - params.plane.0 - params.plane.1);
        let mut log_norm = -(2.0 * PI).ln() - params.scale_x.ln() - params.scale_y.ln();
        if perp.is_some() {
            log_norm -= 0.5 * (2.0 * PI).ln() + params.scale_perp.ln();
        }
        Ok(Self {
            params,
            cos,
            sin,
            perp,
            log_norm,
        })
    }

    pub fn params(&self) -> &BananaParams {
        &self.params
    }

    /// Local coordinates `(u1, u2, w)` of `x`.
    #[inline]
    fn local(&self, x: &[f64]) -> (f64, f64, f64) {
        let (a, b) = self.params.plane;
        let t = &self.params.translation;
        let da = x[a] - t[a];
        let db = x[b] - t[b];
        let u1 = self.cos * da + self.sin * db;
        let u2 = -self.sin * da + self.cos * db;
        let w = self.perp.map_or(0.0, |c| x[c] - t[c]);
        (u1, u2, w)
    }

    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = &self.params;
        let (u1, u2, w) = self.local(x);
        let z1 = u1;
        let z2 = u2 + p.curvature * u1 * u1;
        let sx2 = p.scale_x * p.scale_x;
        let sy2 = p.scale_y * p.scale_y;
        let sp2 = p.scale_perp * p.scale_perp;
        let mut q = z1 * z1 / sx2 + z2 * z2 / sy2;
        if self.perp.is_some() {
            q += w * w / sp2;
        }
        if let Some(g) = grad {
            let g2 = -z2 / sy2;
            let g1 = -z1 / sx2 + g2 * 2.0 * p.curvature * u1;
            let (a, b) = p.plane;
            g[a] = self.cos * g1 - self.sin * g2;
            g[b] = self.sin * g1 + self.cos * g2;
            if let Some(c) = self.perp {
                g[c] = -w / sp2;
            }
        }
        self.log_norm - 0.5 * q
    }

    /// `log p(x)` together with its gradient.
    pub fn log_density_with_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(x, Some(grad))
    }

    fn from_local(&self, u1: f64, u2: f64, w: f64) -> Vec<f64> {
        let p = &self.params;
        let (a, b) = p.plane;
        let mut x = p.translation.clone();
        x[a] += self.cos * u1 - self.sin * u2;
        x[b] += self.sin * u1 + self.cos * u2;
        if let Some(c) = self.perp {
            x[c] += w;
        }
        x
    }

    pub fn mean(&self) -> Vec<f64> {
        let p = &self.params;
        self.from_local(0.0, -p.curvature * p.scale_x * p.scale_x, 0.0)
    }

    /// Closed-form elementwise `E[X²]`.
    pub fn second_moment(&self) -> Vec<f64> {
        let p = &self.params;
        let mean = self.mean();
        let sx2 = p.scale_x * p.scale_x;
        let var_u1 = sx2;
        // Var(z2 − b z1²) = σ2² + b² Var(z1²) = σ2² + 2 b² σ1⁴.
        let var_u2 = p.scale_y * p.scale_y + 2.0 * p.curvature * p.curvature * sx2 * sx2;
        let (a, b) = p.plane;
        let mut m2: Vec<f64> = mean.iter().map(|m| m * m).collect();
        m2[a] += self.cos * self.cos * var_u1 + self.sin * self.sin * var_u2;
        m2[b] += self.sin * self.sin * var_u1 + self.cos * self.cos * var_u2;
        if let Some(c) = self.perp {
            m2[c] += p.scale_perp * p.scale_perp;
        }
        m2
    }

    pub fn apex(&self) -> Vec<f64> {
        self.params.translation.clone()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let p = &self.params;
        let z1 = p.scale_x * rng.sample::<f64, _>(StandardNormal);
        let z2 = p.scale_y * rng.sample::<f64, _>(StandardNormal);
        let w = if self.perp.is_some() {
            p.scale_perp * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        self.from_local(z1, z2 - p.curvature * z1 * z1, w)
    }
}

impl Target for Banana {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.eval(x, None)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.eval(x, Some(grad));
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(x, Some(grad))
    }

    fn true_mean(&self) -> Option<Vec<f64>> {
        Some(self.mean())
    }

    fn true_second_moment(&self) -> Option<Vec<f64>> {
        Some(self.second_moment())
    }

    fn direct_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        Some(self.sample(rng))
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        vec![self.apex()]
    }
}

/// `log p(x)` of a single banana.
pub fn banana_log_density(params: &BananaParams, x: &[f64]) -> Result<f64> {
    check_input(params.dim(), x)?;
    Ok(Banana::new(params.clone())?.log_density(x))
}

/// Equal-weight mixture of bananas of a common dimension.
#[derive(Debug, Clone)]
pub struct BananaMixture {
    components: Vec<Banana>,
    log_weight: f64,
    true_mean: Vec<f64>,
    true_second_moment: Vec<f64>,
    modes: Vec<Vec<f64>>,
}

impl BananaMixture {
    pub fn new(components: Vec<Banana>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::config("a mixture needs at least one component"));
        };
        let dim = first.dim();
        if components.iter().any(|c| c.dim() != dim) {
            return Err(Error::config("mixture components must share a dimension"));
        }
        let n = components.len() as f64;
        let mut true_mean = vec![0.0; dim];
        let mut true_second_moment = vec![0.0; dim];
        let mut modes: Vec<Vec<f64>> = Vec::new();
        for c in &components {
            for (acc, v) in true_mean.iter_mut().zip(c.mean()) {
                *acc += v / n;
            }
            for (acc, v) in true_second_moment.iter_mut().zip(c.second_moment()) {
                *acc += v / n;
            }
            let apex = c.apex();
            if !modes.iter().any(|m| m == &apex) {
                modes.push(apex);
            }
        }
        Ok(Self {
            components,
            log_weight: -n.ln(),
            true_mean,
            true_second_moment,
            modes,
        })
    }

    /// Two bananas, the second mirrored through `y = reflection_y`.
    ///
    /// The mirror image of a banana rotated by `θ` is the same banana rotated
    /// by `π − θ` (the density is even in `u1`), so the mixture mean lies on
    /// the reflection line by symmetry.
    pub fn double_banana(first: BananaParams, reflection_y: f64) -> Result<Self> {
        if first.dim() != 2 {
            return Err(Error::config("double banana components are 2D"));
        }
        let mut second = first.clone();
        second.rotation = PI - first.rotation;
        second.translation = vec![first.translation[0], 2.0 * reflection_y - first.translation[1]];
        Self::new(vec![Banana::new(first)?, Banana::new(second)?])
    }

    /// Default double banana: apexes at `(0, 0)` and `(0, −50)`, tails of each
    /// crossing the other's around `y = −25`.
    pub fn default_double_banana() -> Self {
        Self::double_banana(Self::double_banana_component(), DOUBLE_BANANA_REFLECTION_Y)
            .expect("valid double banana")
    }

    pub fn double_banana_component() -> BananaParams {
        BananaParams {
            curvature: 0.067,
            scale_x: 10.0,
            scale_y: 1.0,
            ..BananaParams::default()
        }
    }

    /// Twelve bananas in ℝ³, four per coordinate plane. In the plane of axes
    /// `(a, b)` the four apexes sit at `±d·e_a` and `±d·e_b`, and each banana
    /// bends back towards the origin. Every point `±d·e_i` is the apex of
    /// exactly two components, giving six modes.
    pub fn banana_bunch(apex_distance: f64, curvature: f64, along: f64, across: f64) -> Result<Self> {
        let mut comps = Vec::with_capacity(12);
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
            for (apex_axis, other) in [(a, b), (b, a)] {
                for sign in [1.0, -1.0] {
                    let mut translation = vec![0.0; 3];
                    translation[apex_axis] = sign * apex_distance;
                    // u1 along `other`, u2 pointing away from the origin.
                    let rotation = if sign > 0.0 { 0.0 } else { PI };
                    comps.push(Banana::new(BananaParams {
                        curvature,
                        scale_x: along,
                        scale_y: across,
                        rotation,
                        translation,
                        plane: (other, apex_axis),
                        scale_perp: across,
                    })?);
                }
            }
        }
        Self::new(comps)
    }

    pub fn default_banana_bunch() -> Self {
        Self::banana_bunch(
            BUNCH_APEX_DISTANCE,
            BUNCH_CURVATURE,
            BUNCH_SCALE_ALONG,
            BUNCH_SCALE_ACROSS,
        )
        .expect("valid banana bunch")
    }

    pub fn components(&self) -> &[Banana] {
        &self.components
    }

    /// Per-component `log w_k + log p_k(x)`.
    pub fn component_log_densities(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| self.log_weight + c.log_density(x))
            .collect()
    }
}

impl Target for BananaMixture {
    fn dim(&self) -> usize {
        self.true_mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        log_sum_exp(&self.component_log_densities(x))
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(x, grad);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dim();
        let k = self.components.len();
        let mut lps = vec![0.0; k];
        let mut grads = vec![0.0; k * d];
        for (i, c) in self.components.iter().enumerate() {
            lps[i] = self.log_weight + c.log_density_with_grad(x, &mut grads[i * d..(i + 1) * d]);
        }
        let total = log_sum_exp(&lps);
        grad.iter_mut().for_each(|g| *g = 0.0);
        if total == f64::NEG_INFINITY {
            return total;
        }
        for i in 0..k {
            let w = (lps[i] - total).exp();
            if w == 0.0 {
                continue;
            }
            for (g, gi) in grad.iter_mut().zip(&grads[i * d..(i + 1) * d]) {
                *g += w * gi;
            }
        }
        total
    }

    fn true_mean(&self) -> Option<Vec<f64>> {
        Some(self.true_mean.clone())
    }

    fn true_second_moment(&self) -> Option<Vec<f64>> {
        Some(self.true_second_moment.clone())
    }

    fn direct_sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let k = rng.random_range(0..self.components.len());
        Some(self.components[k].sample(rng))
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        self.modes.clone()
    }
}

/// `log p(x)` of the default double banana.
pub fn double_banana_log_density(x: &[f64]) -> Result<f64> {
    check_input(2, x)?;
    Ok(BananaMixture::default_double_banana().log_density(x))
}

/// `log p(x)` of the default banana bunch.
pub fn banana_bunch_log_density(x: &[f64]) -> Result<f64> {
    check_input(3, x)?;
    Ok(BananaMixture::default_banana_bunch().log_density(x))
}
