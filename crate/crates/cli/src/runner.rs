//! Builds samplers from a configuration and runs seeded replica ensembles.

use std::sync::Arc;

use micromacro::diagnostics::{
    efficiency_gain, estimate_kcorr, histogram, replicate_variance, GainReport, Histogram,
};
use micromacro::effective::{
    effective_coefficients, uniform_grid, CoefficientTable, QuadratureSpec, TabulatedFreeEnergy,
};
use micromacro::models::butane::{ButaneModel, ButaneReconstruction, TorsionFreeEnergy};
use micromacro::models::three_atom::{
    ThreeAtomFreeEnergy, ThreeAtomModel, ThreeAtomReconstruction,
};
use micromacro::models::toy::{ToyFreeEnergy, ToyModel, ToyReconstruction};
use micromacro::samplers::{
    run_chain, run_ensemble, ChainOptions, EnsembleOptions, FreeEnergy, MacroModel,
    MacroProposalKernel, Mala, MicroMacro, ProposalKind, Reconstruction, Step, TraceRecord,
};
use micromacro::{Interval, MicroState, RngStream, SystemModel};

use crate::config::{
    ExperimentConfig, FreeEnergyChoice, ModelKind, ProposalChoice, ReconstructionChoice,
    SamplerChoice,
};
use crate::error::CliError;

/// A bundled model with its natural initial state and domain.
pub enum BuiltModel {
    ThreeAtom(ThreeAtomModel),
    Butane(ButaneModel),
    Toy(ToyModel),
}

impl BuiltModel {
    pub fn new(config: &ExperimentConfig) -> Result<Self, CliError> {
        Ok(match config.model {
            ModelKind::ThreeAtom => Self::ThreeAtom(ThreeAtomModel::new(config.epsilon, config.beta)?),
            ModelKind::Butane => Self::Butane(ButaneModel::new(config.beta)?),
            ModelKind::Toy => Self::Toy(ToyModel::new(config.epsilon, config.beta)?),
        })
    }

    pub fn system(&self) -> &dyn SystemModel {
        match self {
            Self::ThreeAtom(m) => m,
            Self::Butane(m) => m,
            Self::Toy(m) => m,
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            Self::ThreeAtom(_) => ThreeAtomModel::domain(),
            Self::Butane(_) => ButaneModel::domain(),
            Self::Toy(_) => ToyModel::domain(),
        }
    }

    /// `(1, 0, 1)` for the three-atom molecule, the all-trans equilibrium
    /// for butane, `(1, 1)` for the toy model.
    pub fn initial_state(&self) -> Vec<f64> {
        match self {
            Self::ThreeAtom(_) => ThreeAtomModel::initial_state(),
            Self::Butane(m) => m.equilibrium(0.0),
            Self::Toy(_) => ToyModel::initial_state(),
        }
    }

    fn exact_free_energy(&self) -> Arc<dyn FreeEnergy> {
        match self {
            Self::ThreeAtom(_) => Arc::new(ThreeAtomFreeEnergy::A1),
            Self::Butane(m) => Arc::new(TorsionFreeEnergy(*m.params())),
            Self::Toy(_) => Arc::new(ToyFreeEnergy),
        }
    }

    /// Quadrature coefficient table on `nodes` equispaced points of `H`.
    pub fn coefficient_table(&self, nodes: usize, quad_nodes: usize) -> Result<CoefficientTable, CliError> {
        let grid = uniform_grid(self.domain(), nodes);
        let spec = QuadratureSpec::with_nodes(quad_nodes);
        Ok(match self {
            Self::ThreeAtom(m) => effective_coefficients(m, &grid, &spec)?,
            Self::Butane(m) => effective_coefficients(m, &grid, &spec)?,
            Self::Toy(m) => effective_coefficients(m, &grid, &spec)?,
        })
    }

    fn reconstruction(&self, choice: ReconstructionChoice) -> Box<dyn Reconstruction> {
        match (self, choice) {
            (Self::ThreeAtom(m), ReconstructionChoice::Nu2) => {
                Box::new(ThreeAtomReconstruction::widened(m))
            }
            (Self::ThreeAtom(m), _) => Box::new(ThreeAtomReconstruction::exact(m)),
            (Self::Butane(m), _) => Box::new(ButaneReconstruction::new(m)),
            (Self::Toy(m), _) => Box::new(ToyReconstruction::exact(m)),
        }
    }
}

/// Everything a sampler step borrows, built once per experiment.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: BuiltModel,
    mm: Option<(MacroModel, MacroProposalKernel, Box<dyn Reconstruction>)>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        let model = BuiltModel::new(&config)?;
        let table = if config.needs_table() {
            Some(Arc::new(load_or_build_table(&config, &model)?))
        } else {
            None
        };
        let mm = match config.mm {
            None => None,
            Some(s) => {
                let free_energy: Arc<dyn FreeEnergy> = match s.free_energy {
                    FreeEnergyChoice::A1 => Arc::new(ThreeAtomFreeEnergy::A1),
                    FreeEnergyChoice::A2 => Arc::new(ThreeAtomFreeEnergy::A2),
                    FreeEnergyChoice::A3 => Arc::new(ThreeAtomFreeEnergy::A3),
                    FreeEnergyChoice::Exact => model.exact_free_energy(),
                    FreeEnergyChoice::Table => {
                        Arc::new(TabulatedFreeEnergy(table.clone().expect("table built")))
                    }
                };
                let kind = match s.proposal {
                    ProposalChoice::Langevin => ProposalKind::Langevin,
                    ProposalChoice::Brownian => ProposalKind::Brownian,
                    ProposalChoice::Effective => {
                        ProposalKind::Effective(table.clone().expect("table built"))
                    }
                };
                let macro_model = MacroModel::new(free_energy, model.domain(), config.beta);
                let kernel = MacroProposalKernel::new(kind, s.dt_macro)?;
                Some((macro_model, kernel, model.reconstruction(s.reconstruction)))
            }
        };
        Ok(Self { config, model, mm })
    }

    fn step(&self) -> Result<Box<dyn Step + '_>, CliError> {
        let system = self.model.system();
        Ok(match (&self.config.sampler, &self.mm) {
            (SamplerChoice::Mala, _) => {
                Box::new(Mala::new(system, self.config.dt_micro.expect("validated"))?)
            }
            (SamplerChoice::Mm, Some((macro_model, kernel, recon))) => {
                Box::new(MicroMacro::new(system, macro_model, kernel, recon.as_ref()))
            }
            (SamplerChoice::Mm, None) => unreachable!("validated mm settings"),
        })
    }
}

fn load_or_build_table(config: &ExperimentConfig, model: &BuiltModel) -> Result<CoefficientTable, CliError> {
    match &config.table_file {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!(
                "cannot open table_file {}: {e}",
                path.display()
            )))?;
            CoefficientTable::read_from(std::io::BufReader::new(file))
                .map_err(|e| CliError::Config(format!("table_file {}: {e}", path.display())))
        }
        None => model.coefficient_table(config.table_nodes, config.quad_nodes),
    }
}

/// Per-replica statistics; `records` is empty unless traces are written.
#[derive(Debug, Clone)]
pub struct ReplicaResult {
    pub replica: usize,
    pub n_steps: usize,
    pub mean: f64,
    pub kcorr: Option<f64>,
    pub macro_proposed: u64,
    pub macro_accepted: u64,
    pub micro_proposed: u64,
    pub micro_accepted: u64,
    pub non_finite: u64,
    pub alpha_f_min: Option<f64>,
    pub wall_time: f64,
    pub histogram: Histogram,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub replicas: Vec<ReplicaResult>,
    /// Pooled over replicas.
    pub histogram: Histogram,
    /// `None` with a single replica.
    pub replicate_variance: Option<f64>,
    /// Sum of per-chain sampling-loop times.
    pub wall_time: f64,
}

impl EnsembleResult {
    fn total(&self, f: impl Fn(&ReplicaResult) -> u64) -> u64 {
        self.replicas.iter().map(f).sum()
    }

    pub fn macro_proposed(&self) -> u64 {
        self.total(|r| r.macro_proposed)
    }

    pub fn macro_accepted(&self) -> u64 {
        self.total(|r| r.macro_accepted)
    }

    pub fn micro_proposed(&self) -> u64 {
        self.total(|r| r.micro_proposed)
    }

    pub fn micro_accepted(&self) -> u64 {
        self.total(|r| r.micro_accepted)
    }

    pub fn non_finite(&self) -> u64 {
        self.total(|r| r.non_finite)
    }

    /// Accepted macroscopic values per step; MALA reports 0.
    pub fn macro_acceptance_rate(&self) -> f64 {
        ratio(self.macro_accepted(), self.macro_proposed())
    }

    /// Accepted microscopic states per microscopic proposal.
    pub fn micro_acceptance_rate(&self) -> f64 {
        ratio(self.micro_accepted(), self.micro_proposed())
    }

    pub fn alpha_f_min(&self) -> Option<f64> {
        self.replicas
            .iter()
            .filter_map(|r| r.alpha_f_min)
            .reduce(f64::min)
    }

    pub fn grand_mean(&self) -> f64 {
        self.replicas.iter().map(|r| r.mean).sum::<f64>() / self.replicas.len() as f64
    }

    pub fn replica_means(&self) -> Vec<f64> {
        self.replicas.iter().map(|r| r.mean).collect()
    }

    /// Mean of the per-replica K_corr estimates that exist.
    pub fn mean_kcorr(&self) -> Option<f64> {
        let k: Vec<f64> = self.replicas.iter().filter_map(|r| r.kcorr).collect();
        (!k.is_empty()).then(|| k.iter().sum::<f64>() / k.len() as f64)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Runs every replica of `experiment` on `threads` workers.
pub fn run_experiment(experiment: &Experiment, threads: Option<usize>) -> Result<EnsembleResult, CliError> {
    let config = &experiment.config;
    let step = experiment.step()?;
    let system = experiment.model.system();
    let rc = system.reaction_coordinate();
    let domain = experiment.model.domain();
    let x0 = MicroState::new(experiment.model.initial_state())?;
    let options = EnsembleOptions {
        n_replicas: config.n_replicas,
        base_seed: config.base_seed,
        threads,
    };
    let step: &(dyn Step + '_) = step.as_ref();

    let replicas = run_ensemble(options, |replica, rng: &mut RngStream| {
        let observable = |x: &MicroState| {
            x.cached_reaction_coordinate()
                .map_or_else(|| rc.value(x.coords()).unwrap_or(f64::NAN), |z| z)
        };
        let trace = run_chain(step, x0.clone(), config.n_steps, observable, rng, ChainOptions::default())?;
        if let Some(failure) = &trace.failure {
            return Err(micromacro::Error::InvalidArgument(format!(
                "replica {replica}: {failure}"
            )));
        }
        let series = trace.observables();
        let kcorr = series
            .get(config.kcorr_burn_in..)
            .and_then(|s| estimate_kcorr(s).ok());
        let histogram = histogram(&series, config.histogram_bins, domain.lo, domain.hi)?;
        let records = if config.write_traces {
            trace
                .records
                .into_iter()
                .filter(|r| r.step % config.thin == 0)
                .collect()
        } else {
            Vec::new()
        };
        Ok(ReplicaResult {
            replica,
            n_steps: trace.n_steps,
            mean: trace.mean,
            kcorr,
            macro_proposed: trace.macro_proposed,
            macro_accepted: trace.macro_accepted,
            micro_proposed: trace.micro_proposed,
            micro_accepted: trace.micro_accepted,
            non_finite: trace.non_finite,
            alpha_f_min: trace.alpha_f_min,
            wall_time: trace.wall_time,
            histogram,
            records,
        })
    })
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let n = replicas.len() as f64;
    let bins = config.histogram_bins;
    let mut pooled = Histogram {
        lo: domain.lo,
        hi: domain.hi,
        masses: vec![0.0; bins],
        overflow: 0.0,
        count: 0,
    };
    for r in &replicas {
        for (m, v) in pooled.masses.iter_mut().zip(&r.histogram.masses) {
            *m += v / n;
        }
        pooled.overflow += r.histogram.overflow / n;
        pooled.count += r.histogram.count;
    }
    let means: Vec<f64> = replicas.iter().map(|r| r.mean).collect();
    Ok(EnsembleResult {
        config: config.clone(),
        replicate_variance: replicate_variance(&means).ok(),
        wall_time: replicas.iter().map(|r| r.wall_time).sum(),
        replicas,
        histogram: pooled,
    })
}

/// Checks that two configurations describe the same estimation problem.
pub fn check_comparable(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<(), CliError> {
    let mut diffs = Vec::new();
    if a.model != b.model {
        diffs.push("model");
    }
    if a.epsilon != b.epsilon {
        diffs.push("epsilon");
    }
    if a.beta != b.beta {
        diffs.push("beta");
    }
    if a.observable != b.observable {
        diffs.push("observable");
    }
    if a.n_steps != b.n_steps {
        diffs.push("n_steps");
    }
    if a.n_replicas != b.n_replicas {
        diffs.push("n_replicas");
    }
    if a.base_seed != b.base_seed {
        diffs.push("base_seed");
    }
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "compared configurations differ in: {}",
            diffs.join(", ")
        )))
    }
}

/// Gain of `mm` over the reference ensemble `micro`.
pub fn gain_report(micro: &EnsembleResult, mm: &EnsembleResult) -> Result<GainReport, CliError> {
    let (Some(var_micro), Some(var_mm)) = (micro.replicate_variance, mm.replicate_variance) else {
        return Err(CliError::Config(
            "compare needs n_replicas >= 2 to estimate variances".into(),
        ));
    };
    let gain = efficiency_gain(var_micro, var_mm, micro.wall_time, mm.wall_time)?;
    Ok(GainReport::new(
        gain,
        mm.macro_acceptance_rate(),
        mm.micro_acceptance_rate(),
        micro.micro_acceptance_rate(),
    ))
}
