use super::accept::acceptance_from_log_ratio;
use super::chain::{SamplerKind, Step, StepOutcome};
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::rng::RngStream;
use crate::state::MicroState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MalaOutcome {
    pub accepted: bool,
    /// The proposal had a non-finite or out-of-domain energy and was rejected.
    pub non_finite: bool,
}

/// One Metropolis-adjusted Langevin step, updating `x` in place.
///
/// Proposal `x' = x - ∇V(x) dt + √(2 dt/β) η`; the acceptance ratio uses the
/// Euler–Maruyama Gaussian transition density in both directions. On
/// rejection `x` is left untouched.
pub fn mala_step<M: SystemModel + ?Sized>(
    model: &M,
    x: &mut MicroState,
    dt: f64,
    rng: &mut RngStream,
) -> Result<MalaOutcome> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    x.ensure_gradient(model)?;
    let beta = model.beta();
    let v = x.potential(model)?;
    let coords = x.coords();
    let grad = x.cached_gradient().expect("gradient cached above");
    let noise = (2.0 * dt / beta).sqrt();

    let proposal: Vec<f64> = coords
        .iter()
        .zip(grad)
        .map(|(&xi, &gi)| xi - gi * dt + noise * rng.standard_normal())
        .collect();

    let mut grad_new = vec![0.0; proposal.len()];
    let v_new = match model.potential_and_gradient(&proposal, &mut grad_new) {
        Ok(v) if v.is_finite() && grad_new.iter().all(|g| g.is_finite()) => v,
        _ => {
            // The uniform is still consumed so that the stream stays aligned
            // with the number of proposals.
            rng.uniform();
            return Ok(MalaOutcome {
                accepted: false,
                non_finite: true,
            });
        }
    };

    let scale = 4.0 * dt / beta;
    let mut fwd = 0.0;
    let mut rev = 0.0;
    for i in 0..proposal.len() {
        let f = proposal[i] - coords[i] + grad[i] * dt;
        let r = coords[i] - proposal[i] + grad_new[i] * dt;
        fwd += f * f;
        rev += r * r;
    }
    let log_ratio = -beta * (v_new - v) + (fwd - rev) / scale;
    let accepted = rng.accept(acceptance_from_log_ratio(log_ratio));
    if accepted {
        let mut next = MicroState::new(proposal)?;
        // Reuse the energies computed for the proposal.
        next.set_evaluated(v_new, grad_new);
        *x = next;
    }
    Ok(MalaOutcome {
        accepted,
        non_finite: false,
    })
}

/// MALA as a chain [`Step`].
pub struct Mala<'a> {
    model: &'a dyn SystemModel,
    dt: f64,
}

impl<'a> Mala<'a> {
    pub fn new(model: &'a dyn SystemModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { model, dt })
    }
}

impl Step for Mala<'_> {
    fn kind(&self) -> SamplerKind {
        SamplerKind::Mala
    }

    fn step(&self, state: &mut MicroState, rng: &mut RngStream) -> Result<StepOutcome> {
        let out = mala_step(self.model, state, self.dt, rng)?;
        Ok(StepOutcome {
            macro_proposed: false,
            macro_accepted: false,
            micro_proposed: true,
            micro_accepted: out.accepted,
            non_finite: out.non_finite,
            alpha_f: None,
        })
    }
}
