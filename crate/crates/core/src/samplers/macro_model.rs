use std::fmt;
use std::sync::Arc;

use crate::model::Interval;

/// Approximate free energy `Ā(z)` of the reaction coordinate.
pub trait FreeEnergy: Send + Sync {
    fn value(&self, z: f64) -> f64;
    fn derivative(&self, z: f64) -> f64;
}

/// Macroscopic target `μ̄₀(z) ∝ exp(-β Ā(z))` on the domain `H`.
#[derive(Clone)]
pub struct MacroModel {
    free_energy: Arc<dyn FreeEnergy>,
    domain: Interval,
    beta: f64,
}

impl MacroModel {
    pub fn new(free_energy: Arc<dyn FreeEnergy>, domain: Interval, beta: f64) -> Self {
        Self {
            free_energy,
            domain,
            beta,
        }
    }

    pub fn free_energy(&self) -> &dyn FreeEnergy {
        self.free_energy.as_ref()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `log μ̄₀(z)` up to the normalising constant.
    #[inline]
    pub fn log_density(&self, z: f64) -> f64 {
        -self.beta * self.free_energy.value(z)
    }
}

impl fmt::Debug for MacroModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MacroModel")
            .field("domain", &self.domain)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}
