use std::f64::consts::PI;
use std::sync::Arc;

use super::macro_model::MacroModel;
use crate::effective::CoefficientTable;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Family of macroscopic proposal moves `q₀(z'|z)`.
#[derive(Debug, Clone)]
pub enum ProposalKind {
    /// Euler–Maruyama step of `dz = -Ā'(z) dt + √(2β⁻¹) dW`.
    Langevin,
    /// `dz = √(2β⁻¹) dW`; symmetric.
    Brownian,
    /// Euler–Maruyama step of the effective dynamics
    /// `dz = b(z) dt + √(2β⁻¹) σ(z) dW` with tabulated coefficients.
    Effective(Arc<CoefficientTable>),
}

#[derive(Debug, Clone)]
pub struct MacroProposalKernel {
    kind: ProposalKind,
    dt: f64,
}

/// A proposed reaction-coordinate value with both transition log-densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroProposal {
    pub z: f64,
    pub log_q_fwd: f64,
    pub log_q_rev: f64,
}

impl MacroProposalKernel {
    pub fn new(kind: ProposalKind, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "macroscopic time step must be positive, got {dt}"
            )));
        }
        Ok(Self { kind, dt })
    }

    pub fn kind(&self) -> &ProposalKind {
        &self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Mean and variance of the Gaussian transition from `z`.
    #[inline]
    fn moments(&self, macro_model: &MacroModel, z: f64) -> (f64, f64) {
        let base_var = 2.0 * self.dt / macro_model.beta();
        match &self.kind {
            ProposalKind::Langevin => {
                (z - macro_model.free_energy().derivative(z) * self.dt, base_var)
            }
            ProposalKind::Brownian => (z, base_var),
            ProposalKind::Effective(table) => {
                let c = table.interpolate_clamped(z);
                (z + c.b * self.dt, base_var * c.sigma2)
            }
        }
    }

    /// `log q₀(to | from)`.
    pub fn log_density(&self, macro_model: &MacroModel, from: f64, to: f64) -> f64 {
        let (mean, var) = self.moments(macro_model, from);
        gaussian_log_density(to, mean, var, log_normalizer(var))
    }

    /// Deterministic proposal for a given standard normal draw `eta`.
    pub fn propose_with_noise(&self, macro_model: &MacroModel, z: f64, eta: f64) -> MacroProposal {
        let (mean, var) = self.moments(macro_model, z);
        let z_new = mean + var.sqrt() * eta;
        let (mean_rev, var_rev) = self.moments(macro_model, z_new);
        let norm_fwd = log_normalizer(var);
        // Langevin and Brownian moves share the variance in both directions.
        let norm_rev = if var_rev == var { norm_fwd } else { log_normalizer(var_rev) };
        MacroProposal {
            z: z_new,
            log_q_fwd: gaussian_log_density(z_new, mean, var, norm_fwd),
            log_q_rev: gaussian_log_density(z, mean_rev, var_rev, norm_rev),
        }
    }
}

#[inline]
fn log_normalizer(var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln()
}

#[inline]
fn gaussian_log_density(v: f64, mean: f64, var: f64, log_norm: f64) -> f64 {
    let d = v - mean;
    log_norm - d * d / (2.0 * var)
}

/// Draws `z' ~ q₀(·|z)`. The proposal may leave the domain; the acceptance
/// step rejects it.
pub fn macro_propose(
    kernel: &MacroProposalKernel,
    macro_model: &MacroModel,
    z: f64,
    rng: &mut RngStream,
) -> MacroProposal {
    kernel.propose_with_noise(macro_model, z, rng.standard_normal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Interval;
    use crate::samplers::FreeEnergy;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    struct Constant;
    impl FreeEnergy for Constant {
        fn value(&self, _z: f64) -> f64 {
            3.0
        }
        fn derivative(&self, _z: f64) -> f64 {
            0.0
        }
    }

    struct DoubleWell;
    impl FreeEnergy for DoubleWell {
        fn value(&self, z: f64) -> f64 {
            104.0 * ((z - FRAC_PI_2).powi(2) - 0.3838f64.powi(2)).powi(2)
        }
        fn derivative(&self, z: f64) -> f64 {
            let u = z - FRAC_PI_2;
            416.0 * u * (u * u - 0.3838f64.powi(2))
        }
    }

    fn mm<F: FreeEnergy + 'static>(f: F) -> MacroModel {
        MacroModel::new(Arc::new(f), Interval::closed(0.0, PI), 1.0)
    }

    #[test]
    fn rejects_bad_time_step() {
        assert!(MacroProposalKernel::new(ProposalKind::Brownian, 0.0).is_err());
        assert!(MacroProposalKernel::new(ProposalKind::Brownian, f64::NAN).is_err());
    }

    #[test]
    fn langevin_with_flat_free_energy_is_brownian() {
        let m = mm(Constant);
        let lang = MacroProposalKernel::new(ProposalKind::Langevin, 0.01).unwrap();
        let brown = MacroProposalKernel::new(ProposalKind::Brownian, 0.01).unwrap();
        for eta in [-2.0, -0.1, 0.0, 0.7, 3.0] {
            assert_eq!(
                lang.propose_with_noise(&m, 1.3, eta),
                brown.propose_with_noise(&m, 1.3, eta)
            );
        }
    }

    #[test]
    fn langevin_at_symmetric_point_with_zero_noise_stays() {
        let m = mm(DoubleWell);
        let k = MacroProposalKernel::new(ProposalKind::Langevin, 0.01).unwrap();
        let p = k.propose_with_noise(&m, FRAC_PI_2, 0.0);
        assert_eq!(p.z, FRAC_PI_2);
    }

    #[test]
    fn log_density_is_normalised() {
        // Trapezoid over ±10 sd.
        let m = mm(DoubleWell);
        let k = MacroProposalKernel::new(ProposalKind::Langevin, 0.01).unwrap();
        let from = 1.2;
        let (mean, var) = k.moments(&m, from);
        let sd = var.sqrt();
        let n = 20_000;
        let (a, b) = (mean - 10.0 * sd, mean + 10.0 * sd);
        let h = (b - a) / n as f64;
        let total: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * k.log_density(&m, from, a + i as f64 * h).exp()
            })
            .sum::<f64>()
            * h;
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    proptest! {
        #[test]
        fn brownian_is_exactly_symmetric(z in 0.0f64..3.0, eta in -4.0f64..4.0) {
            let m = mm(DoubleWell);
            let k = MacroProposalKernel::new(ProposalKind::Brownian, 0.01).unwrap();
            let p = k.propose_with_noise(&m, z, eta);
            prop_assert_eq!(p.log_q_fwd.to_bits(), p.log_q_rev.to_bits());
        }
    }
}
