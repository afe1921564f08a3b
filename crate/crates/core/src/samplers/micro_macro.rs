use super::accept::acceptance_from_log_ratio;
use super::chain::{SamplerKind, Step, StepOutcome};
use super::kernel::{macro_propose, MacroProposalKernel};
use super::macro_model::MacroModel;
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::rng::RngStream;
use crate::state::MicroState;

/// Reconstruction distribution `ν̄(x|z)` on the level set `ξ(x) = z`.
///
/// `log_density` must use one normalising constant for every `z`, so that
/// ratios across different level sets are meaningful.
pub trait Reconstruction: Send + Sync {
    /// Draws chart coordinates `x` with `ξ(x) = z`.
    fn sample(&self, z: f64, rng: &mut RngStream) -> Vec<f64>;

    fn log_density(&self, x: &[f64], z: f64) -> f64;
}

/// Macroscopic Metropolis–Hastings acceptance
/// `min{1, μ̄₀(z') q₀(z|z') / (μ̄₀(z) q₀(z'|z))}`; zero outside the domain.
pub fn macro_accept_prob(
    macro_model: &MacroModel,
    z: f64,
    z_new: f64,
    log_q_fwd: f64,
    log_q_rev: f64,
) -> f64 {
    if !macro_model.domain().contains(z_new) {
        return 0.0;
    }
    let log_ratio = macro_model.log_density(z_new) - macro_model.log_density(z) + log_q_rev
        - log_q_fwd;
    acceptance_from_log_ratio(log_ratio)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineAcceptance {
    pub alpha: f64,
    /// Some log term was non-finite; `alpha` is then zero.
    pub non_finite: bool,
}

/// `log μ(x) - log μ̄₀(z) - log ν̄(x|z)`, the per-state weight whose
/// difference is the fine-level log acceptance ratio.
fn fine_weight<M, R>(
    model: &M,
    macro_model: &MacroModel,
    recon: &R,
    x: &mut MicroState,
    z: f64,
) -> Option<f64>
where
    M: SystemModel + ?Sized,
    R: Reconstruction + ?Sized,
{
    let v = x.potential(model).ok()?;
    let w = -model.beta() * v - macro_model.log_density(z) - recon.log_density(x.coords(), z);
    w.is_finite().then_some(w)
}

fn fine_acceptance<M, R>(
    model: &M,
    macro_model: &MacroModel,
    recon: &R,
    x_n: &mut MicroState,
    z_n: f64,
    x_new: &mut MicroState,
    z_new: f64,
) -> FineAcceptance
where
    M: SystemModel + ?Sized,
    R: Reconstruction + ?Sized,
{
    let current = fine_weight(model, macro_model, recon, x_n, z_n);
    let proposed = fine_weight(model, macro_model, recon, x_new, z_new);
    match (current, proposed) {
        (Some(wn), Some(wp)) => FineAcceptance {
            alpha: acceptance_from_log_ratio(wp - wn),
            non_finite: false,
        },
        _ => FineAcceptance {
            alpha: 0.0,
            non_finite: true,
        },
    }
}

/// Fine-level acceptance
/// `min{1, μ(x') μ̄₀(z_n) ν̄(x_n|z_n) / (μ(x_n) μ̄₀(z') ν̄(x'|z'))}` with
/// `z = ξ(x)`.
pub fn micro_accept_prob<M, R>(
    model: &M,
    macro_model: &MacroModel,
    recon: &R,
    x_n: &MicroState,
    x_new: &MicroState,
) -> Result<FineAcceptance>
where
    M: SystemModel + ?Sized,
    R: Reconstruction + ?Sized,
{
    let rc = model.reaction_coordinate();
    let z_n = rc.value(x_n.coords())?;
    let z_new = rc.value(x_new.coords())?;
    let mut a = x_n.clone();
    let mut b = x_new.clone();
    Ok(fine_acceptance(
        model,
        macro_model,
        recon,
        &mut a,
        z_n,
        &mut b,
        z_new,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MmOutcome {
    pub macro_accepted: bool,
    pub micro_accepted: bool,
    pub alpha_f: Option<f64>,
    pub non_finite: bool,
}

/// One micro-macro step, updating `x` in place.
///
/// 1. restrict `z_n = ξ(x)`;
/// 2. propose `z' ~ q₀(·|z_n)` and accept with `α_CG`; on rejection `x` is
///    unchanged;
/// 3. reconstruct `x' ~ ν̄(·|z')` and accept with `α_F`.
///
/// Exactly one macroscopic proposal is consumed per call.
pub fn mm_step<M, R>(
    model: &M,
    macro_model: &MacroModel,
    kernel: &MacroProposalKernel,
    recon: &R,
    x: &mut MicroState,
    rng: &mut RngStream,
) -> Result<MmOutcome>
where
    M: SystemModel + ?Sized,
    R: Reconstruction + ?Sized,
{
    let z_n = x.reaction_coordinate(model)?;
    if !macro_model.domain().contains(z_n) {
        return Err(Error::InvalidArgument(format!(
            "current reaction coordinate {z_n} lies outside the macroscopic domain"
        )));
    }

    let proposal = macro_propose(kernel, macro_model, z_n, rng);
    let alpha_cg = macro_accept_prob(
        macro_model,
        z_n,
        proposal.z,
        proposal.log_q_fwd,
        proposal.log_q_rev,
    );
    if !rng.accept(alpha_cg) {
        return Ok(MmOutcome::default());
    }

    let z_new = proposal.z;
    let mut x_new = MicroState::new(recon.sample(z_new, rng))?;
    let fine = fine_acceptance(model, macro_model, recon, x, z_n, &mut x_new, z_new);
    let accepted = rng.accept(fine.alpha);
    if accepted {
        x_new.reaction_coordinate(model)?;
        *x = x_new;
    }
    Ok(MmOutcome {
        macro_accepted: true,
        micro_accepted: accepted,
        alpha_f: Some(fine.alpha),
        non_finite: fine.non_finite,
    })
}

/// The micro-macro sampler as a chain [`Step`].
pub struct MicroMacro<'a> {
    pub model: &'a dyn SystemModel,
    pub macro_model: &'a MacroModel,
    pub kernel: &'a MacroProposalKernel,
    pub reconstruction: &'a dyn Reconstruction,
}

impl<'a> MicroMacro<'a> {
    pub fn new(
        model: &'a dyn SystemModel,
        macro_model: &'a MacroModel,
        kernel: &'a MacroProposalKernel,
        reconstruction: &'a dyn Reconstruction,
    ) -> Self {
        Self {
            model,
            macro_model,
            kernel,
            reconstruction,
        }
    }
}

impl Step for MicroMacro<'_> {
    fn kind(&self) -> SamplerKind {
        SamplerKind::MicroMacro
    }

    fn step(&self, state: &mut MicroState, rng: &mut RngStream) -> Result<StepOutcome> {
        let out = mm_step(
            self.model,
            self.macro_model,
            self.kernel,
            self.reconstruction,
            state,
            rng,
        )?;
        Ok(StepOutcome {
            macro_proposed: true,
            macro_accepted: out.macro_accepted,
            micro_proposed: out.macro_accepted,
            micro_accepted: out.micro_accepted,
            non_finite: out.non_finite,
            alpha_f: out.alpha_f,
        })
    }
}
