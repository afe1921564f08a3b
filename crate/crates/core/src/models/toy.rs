//! Analytic two-dimensional test system.
//!
//! `V(x₁, x₂) = (x₁² - 1)² + (x₂ - x₁)²/(2ε)` with `ξ(x) = x₁`. The
//! Gaussian in `x₂` integrates to a constant, so the marginal of `x₁` is
//! exactly `∝ exp(-β (x₁² - 1)²)` and `x₂ | x₁ ~ Normal(x₁, ε/β)` is the
//! exact reconstruction.

use super::Normal1;
use crate::error::{Error, Result};
use crate::model::{CoordinateProjection, Interval, LevelSetChart, ReactionCoordinate, SystemModel};
use crate::rng::RngStream;
use crate::samplers::{FreeEnergy, Reconstruction};

/// `A(u) = (u² - 1)²` and `A'(u)`.
#[inline]
pub fn toy_free_energy(u: f64) -> (f64, f64) {
    let s = u * u - 1.0;
    (s * s, 4.0 * u * s)
}

#[derive(Debug, Clone)]
pub struct ToyModel {
    epsilon: f64,
    beta: f64,
    rc: CoordinateProjection,
}

impl ToyModel {
    pub fn new(epsilon: f64, beta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon and beta must be positive (epsilon {epsilon}, beta {beta})"
            )));
        }
        Ok(Self {
            epsilon,
            beta,
            rc: CoordinateProjection {
                index: 0,
                periodic: false,
            },
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `H = [-2.5, 2.5]`; `A(±2.5) ≈ 27.6`.
    pub fn domain() -> Interval {
        Interval::closed(-2.5, 2.5)
    }

    pub fn initial_state() -> Vec<f64> {
        vec![1.0, 1.0]
    }
}

impl SystemModel for ToyModel {
    fn name(&self) -> &str {
        "toy"
    }

    fn dim(&self) -> usize {
        2
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn potential(&self, x: &[f64]) -> Result<f64> {
        let d = x[1] - x[0];
        Ok(toy_free_energy(x[0]).0 + d * d / (2.0 * self.epsilon))
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let d = (x[1] - x[0]) / self.epsilon;
        out[0] = toy_free_energy(x[0]).1 - d;
        out[1] = d;
        Ok(())
    }

    fn reaction_coordinate(&self) -> &dyn ReactionCoordinate {
        &self.rc
    }
}

impl LevelSetChart for ToyModel {
    fn level_dim(&self) -> usize {
        1
    }

    fn level_bounds(&self, z: f64, half_width_sd: f64) -> Vec<(f64, f64)> {
        let w = half_width_sd * (self.epsilon / self.beta).sqrt();
        vec![(z - w, z + w)]
    }

    fn embed(&self, z: f64, params: &[f64], out: &mut [f64]) {
        out[0] = z;
        out[1] = params[0];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyFreeEnergy;

impl FreeEnergy for ToyFreeEnergy {
    fn value(&self, z: f64) -> f64 {
        toy_free_energy(z).0
    }

    fn derivative(&self, z: f64) -> f64 {
        toy_free_energy(z).1
    }
}

/// `x₂ ~ Normal(z, ε/β)`, the exact conditional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyReconstruction {
    normal: Normal1,
}

impl ToyReconstruction {
    pub fn exact(model: &ToyModel) -> Self {
        Self {
            normal: Normal1::new(model.epsilon / model.beta),
        }
    }

    /// `x₂ ~ Normal(z, variance)`; inexact unless `variance = ε/β`.
    pub fn with_variance(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "reconstruction variance must be positive, got {variance}"
            )));
        }
        Ok(Self {
            normal: Normal1::new(variance),
        })
    }

    pub fn variance(&self) -> f64 {
        self.normal.var()
    }
}

impl Reconstruction for ToyReconstruction {
    fn sample(&self, z: f64, rng: &mut RngStream) -> Vec<f64> {
        vec![z, z + self.normal.sd() * rng.standard_normal()]
    }

    fn log_density(&self, x: &[f64], z: f64) -> f64 {
        self.normal.log_density(x[1], z)
    }
}
