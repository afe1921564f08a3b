//! Micro-macro Markov chain Monte Carlo (mM-MCMC) with direct reconstruction.
//!
//! The sampler alternates between a cheap Metropolis–Hastings chain on a
//! scalar reaction coordinate `z = ξ(x)` and a reconstruction step that draws
//! a full microscopic configuration on the level set `ξ(x) = z'`, followed by
//! a fine-level accept/reject that restores the exact Gibbs measure
//! `μ(x) ∝ exp(-β V(x))`.
//!
//! The crate is organised as
//!
//! * [`model`], [`state`], [`rng`], [`density`]: shared foundational types;
//! * [`samplers`]: MALA, the macroscopic kernel, the composite micro-macro
//!   step, the chain driver and the replica ensemble;
//! * [`models`]: the three-atom molecule, united-atom butane and an analytic
//!   toy model;
//! * [`effective`]: Gauss–Legendre level-set quadrature for free energies and
//!   effective-dynamics coefficients, and the interpolation table;
//! * [`diagnostics`]: K_corr, replicate variance, efficiency gain, histograms
//!   and total-variation distance.
//!
//! ```
//! use micromacro::models::three_atom::{ThreeAtomModel, ThreeAtomFreeEnergy, ThreeAtomReconstruction};
//! use micromacro::samplers::{MacroModel, MacroProposalKernel, MicroMacro, ProposalKind, run_chain, ChainOptions};
//! use micromacro::{MicroState, RngStream, SystemModel};
//! use std::sync::Arc;
//!
//! let model = ThreeAtomModel::new(1e-4, 1.0).unwrap();
//! let macro_model = MacroModel::new(Arc::new(ThreeAtomFreeEnergy::A1), ThreeAtomModel::domain(), 1.0);
//! let kernel = MacroProposalKernel::new(ProposalKind::Langevin, 0.01).unwrap();
//! let recon = ThreeAtomReconstruction::exact(&model);
//! let sampler = MicroMacro::new(&model, &macro_model, &kernel, &recon);
//!
//! let x0 = MicroState::new(vec![1.0, 0.0, 1.0]).unwrap();
//! let mut rng = RngStream::new(7, 0);
//! let rc = |x: &MicroState| model.reaction_coordinate().value(x.coords()).unwrap();
//! let trace = run_chain(&sampler, x0, 1000, rc, &mut rng, ChainOptions::default()).unwrap();
//! assert_eq!(trace.macro_proposed, 1000);
//! assert_eq!(trace.micro_proposed, trace.macro_accepted);
//! ```

pub mod density;
pub mod diagnostics;
pub mod effective;
pub mod error;
pub mod model;
pub mod models;
pub mod rng;
pub mod samplers;
pub mod state;

pub use density::{gibbs_log_density, gradient_check};
pub use error::{Error, Result};
pub use model::{
    wrap_angle, CoordinateProjection, Interval, LevelSetChart, PlanarAngle, ReactionCoordinate,
    SystemModel,
};
pub use rng::{RngStream, GENERATOR};
pub use state::MicroState;
