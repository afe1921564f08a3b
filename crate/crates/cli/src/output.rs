//! Trace, histogram, summary and gain files.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use micromacro::diagnostics::{GainReport, KCORR_WINDOW_CONSTANT};
use micromacro::effective::CoefficientTable;
use micromacro::GENERATOR;

use crate::config::ExperimentConfig;
use crate::runner::EnsembleResult;

/// Files written so far; removed again unless [`commit`](Self::commit) is
/// called.
pub struct OutputGuard {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        Self {
            files: Vec::new(),
            dirs: Vec::new(),
            committed: false,
        }
    }

    /// Creates `dir` (and parents), remembering the directories that did not
    /// exist before.
    pub fn create_dir(&mut self, dir: &Path) -> std::io::Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        fs::create_dir_all(dir)?;
        // Innermost last so cleanup removes children first.
        self.dirs.extend(missing.into_iter().rev());
        Ok(())
    }

    pub fn write(&mut self, path: PathBuf, contents: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> std::io::Result<()> {
        self.files.push(path.clone());
        let mut out = BufWriter::new(fs::File::create(&path)?);
        contents(&mut out)?;
        out.flush()
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Default for OutputGuard {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |v| v.to_string())
}

/// `key = value` summary with a trailing `[replica_means]` block.
pub fn summary_text(result: &EnsembleResult) -> String {
    let c = &result.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("model", c.model.to_string());
    if c.model != crate::config::ModelKind::Butane {
        kv("epsilon", c.epsilon.to_string());
    }
    kv("beta", c.beta.to_string());
    kv("sampler", c.sampler.to_string());
    if let Some(dt) = c.dt_micro {
        kv("dt_micro", dt.to_string());
    }
    if let Some(mm) = &c.mm {
        kv("free_energy", mm.free_energy.to_string());
        kv("proposal", mm.proposal.to_string());
        kv("reconstruction", mm.reconstruction.to_string());
        kv("dt_macro", mm.dt_macro.to_string());
    }
    kv("observable", c.observable.to_string());
    kv("generator", GENERATOR.to_string());
    kv("base_seed", c.base_seed.to_string());
    kv("n_steps", c.n_steps.to_string());
    kv("n_replicas", c.n_replicas.to_string());
    kv("macro_proposed", result.macro_proposed().to_string());
    kv("macro_accepted", result.macro_accepted().to_string());
    kv("micro_proposed", result.micro_proposed().to_string());
    kv("micro_accepted", result.micro_accepted().to_string());
    kv("non_finite", result.non_finite().to_string());
    kv("macro_acc_rate", result.macro_acceptance_rate().to_string());
    kv("micro_acc_rate", result.micro_acceptance_rate().to_string());
    kv("alpha_f_min", opt(result.alpha_f_min()));
    kv("mean", result.grand_mean().to_string());
    kv("replicate_variance", opt(result.replicate_variance));
    kv("kcorr_mean", opt(result.mean_kcorr()));
    kv("kcorr_window_constant", KCORR_WINDOW_CONSTANT.to_string());
    kv("kcorr_burn_in", c.kcorr_burn_in.to_string());
    kv("histogram_bins", c.histogram_bins.to_string());
    kv("histogram_overflow", result.histogram.overflow.to_string());
    kv("wall_time", result.wall_time.to_string());
    s.push_str("\n[replica_means]\n");
    for r in &result.replicas {
        let _ = writeln!(s, "{} = {}", r.replica, r.mean);
    }
    s
}

pub fn gain_text(report: &GainReport) -> String {
    format!(
        "macro_acc_rate = {}\nmicro_acc_rate = {}\nreference_acc_rate = {}\nvariance_gain = {}\nruntime_gain = {}\ntotal_gain = {}\n",
        report.macro_acc_rate,
        report.micro_acc_rate,
        report.reference_acc_rate,
        report.variance_gain,
        report.runtime_gain,
        report.total_gain,
    )
}

/// Writes traces, `histogram.csv` and `summary.txt` into `dir`.
pub fn write_ensemble(guard: &mut OutputGuard, dir: &Path, result: &EnsembleResult) -> std::io::Result<()> {
    guard.create_dir(dir)?;
    if result.config.write_traces {
        for r in &result.replicas {
            guard.write(dir.join(format!("trace_{}.csv", r.replica)), |out| {
                writeln!(out, "step,observable,macro_accepted,micro_accepted")?;
                for rec in &r.records {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        rec.step,
                        rec.observable,
                        rec.macro_accepted as u8,
                        rec.micro_accepted as u8
                    )?;
                }
                Ok(())
            })?;
        }
    }
    let h = &result.histogram;
    guard.write(dir.join("histogram.csv"), |out| {
        writeln!(out, "bin_lo,bin_hi,mass")?;
        for k in 0..h.bins() {
            let (lo, hi) = h.bin_edges(k);
            writeln!(out, "{lo},{hi},{}", h.masses[k])?;
        }
        Ok(())
    })?;
    let summary = summary_text(result);
    guard.write(dir.join("summary.txt"), |out| out.write_all(summary.as_bytes()))
}

pub fn write_gain(guard: &mut OutputGuard, dir: &Path, report: &GainReport) -> std::io::Result<()> {
    guard.create_dir(dir)?;
    let text = gain_text(report);
    guard.write(dir.join("gain.txt"), |out| out.write_all(text.as_bytes()))
}

pub fn write_table(guard: &mut OutputGuard, dir: &Path, table: &CoefficientTable) -> Result<(), crate::error::CliError> {
    guard.create_dir(dir)?;
    let path = dir.join("coefficients.txt");
    let mut buf = Vec::new();
    table.write_to(&mut buf)?;
    guard.write(path, |out| out.write_all(&buf))?;
    Ok(())
}

/// Output directory after `--out`.
pub fn resolve_dir(config: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir.map_or_else(|| config.output_dir.clone(), Path::to_path_buf)
}
