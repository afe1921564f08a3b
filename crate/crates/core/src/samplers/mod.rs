//! Markov chain kernels and the chain driver.
//!
//! * [`mala_step`]: Metropolis-adjusted Euler–Maruyama step on the full
//!   microscopic configuration.
//! * [`macro_propose`] / [`macro_accept_prob`]: Metropolis–Hastings on the
//!   reaction coordinate with target `μ̄₀ ∝ exp(-β Ā)`.
//! * [`mm_step`]: restriction, macroscopic proposal, reconstruction and
//!   fine-level correction.
//! * [`run_chain`] / [`run_ensemble`]: sequential chains and seeded replicas.

mod accept;
mod chain;
mod ensemble;
mod kernel;
mod macro_model;
mod mala;
mod micro_macro;

pub use accept::{acceptance_from_log_ratio, LOG_RATIO_FLOOR};
pub use chain::{run_chain, ChainOptions, ChainTrace, SamplerKind, Step, StepOutcome, TraceRecord};
pub use ensemble::{run_ensemble, EnsembleOptions};
pub use kernel::{macro_propose, MacroProposal, MacroProposalKernel, ProposalKind};
pub use macro_model::{FreeEnergy, MacroModel};
pub use mala::{mala_step, Mala, MalaOutcome};
pub use micro_macro::{
    macro_accept_prob, micro_accept_prob, mm_step, FineAcceptance, MicroMacro, MmOutcome,
    Reconstruction,
};
