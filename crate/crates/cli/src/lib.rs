//! Configuration-driven experiment runner for the micro-macro sampler.
//!
//! The binary `micromacro` wraps [`commands`]; the pieces are public so that
//! integration tests can drive experiments without spawning processes.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod selftest;

pub mod commands {
    use std::path::{Path, PathBuf};

    use micromacro::diagnostics::GainReport;

    use crate::config::ExperimentConfig;
    use crate::error::CliError;
    use crate::output::{resolve_dir, write_ensemble, write_gain, write_table, OutputGuard};
    use crate::runner::{check_comparable, gain_report, run_experiment, EnsembleResult, Experiment};

    /// Command-line overrides shared by all subcommands.
    #[derive(Debug, Clone, Default)]
    pub struct Overrides {
        pub threads: Option<usize>,
        pub seed: Option<u64>,
        pub out: Option<PathBuf>,
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::from_file(path)?;
        if let Some(seed) = overrides.seed {
            config.base_seed = seed;
        }
        Ok(config)
    }

    /// `run`: one ensemble, written to the output directory.
    pub fn run(config: ExperimentConfig, overrides: &Overrides) -> Result<(PathBuf, EnsembleResult), CliError> {
        let dir = resolve_dir(&config, overrides.out.as_deref());
        let experiment = Experiment::new(config)?;
        let result = run_experiment(&experiment, overrides.threads)?;
        let mut guard = OutputGuard::new();
        write_ensemble(&mut guard, &dir, &result)?;
        guard.commit();
        Ok((dir, result))
    }

    /// `compare`: both ensembles plus `gain.txt`, under `micro/` and `mm/`.
    pub fn compare(
        micro: ExperimentConfig,
        mm: ExperimentConfig,
        overrides: &Overrides,
    ) -> Result<(PathBuf, GainReport), CliError> {
        check_comparable(&micro, &mm)?;
        if micro.n_replicas < 2 {
            return Err(CliError::Config("compare needs n_replicas >= 2".into()));
        }
        let dir = resolve_dir(&mm, overrides.out.as_deref());
        let micro_result = run_experiment(&Experiment::new(micro)?, overrides.threads)?;
        let mm_result = run_experiment(&Experiment::new(mm)?, overrides.threads)?;
        let report = gain_report(&micro_result, &mm_result)?;
        let mut guard = OutputGuard::new();
        guard.create_dir(&dir)?;
        write_ensemble(&mut guard, &dir.join("micro"), &micro_result)?;
        write_ensemble(&mut guard, &dir.join("mm"), &mm_result)?;
        write_gain(&mut guard, &dir, &report)?;
        guard.commit();
        Ok((dir, report))
    }

    /// `coeffs`: quadrature coefficient table over the model's domain.
    pub fn coeffs(config: ExperimentConfig, overrides: &Overrides) -> Result<PathBuf, CliError> {
        let dir = resolve_dir(&config, overrides.out.as_deref());
        let model = crate::runner::BuiltModel::new(&config)?;
        let run = || model.coefficient_table(config.table_nodes, config.quad_nodes);
        let table = match overrides.threads {
            Some(t) => rayon_pool(t)?.install(run)?,
            None => run()?,
        };
        let mut guard = OutputGuard::new();
        write_table(&mut guard, &dir, &table)?;
        guard.commit();
        Ok(dir.join("coefficients.txt"))
    }

    fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
    }
}
