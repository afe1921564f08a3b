//! Flat `key = value` experiment configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: line {line}: {message}")]
    Line {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    ThreeAtom,
    Butane,
    Toy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerChoice {
    Mala,
    Mm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeEnergyChoice {
    A1,
    A2,
    A3,
    /// The model's exact free energy (`A1` for the three-atom molecule).
    Exact,
    /// Interpolated from a quadrature coefficient table.
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalChoice {
    Langevin,
    Brownian,
    /// Drift `b(z)` and diffusion `σ²(z)` from the coefficient table.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionChoice {
    Nu1,
    Nu2,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    RcValue,
}

macro_rules! keyword_enum {
    ($ty:ty { $($text:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($variant),)+
                    _ => Err(format!(
                        "unknown value `{s}` (expected one of: {})",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = match self {
                    $(v if *v == $variant => $text,)+
                    _ => unreachable!(),
                };
                f.write_str(s)
            }
        }
    };
}

keyword_enum!(ModelKind {
    "three_atom" => ModelKind::ThreeAtom,
    "butane" => ModelKind::Butane,
    "toy" => ModelKind::Toy,
});
keyword_enum!(SamplerChoice {
    "mala" => SamplerChoice::Mala,
    "mm" => SamplerChoice::Mm,
});
keyword_enum!(FreeEnergyChoice {
    "A1" => FreeEnergyChoice::A1,
    "A2" => FreeEnergyChoice::A2,
    "A3" => FreeEnergyChoice::A3,
    "exact" => FreeEnergyChoice::Exact,
    "table" => FreeEnergyChoice::Table,
});
keyword_enum!(ProposalChoice {
    "langevin" => ProposalChoice::Langevin,
    "brownian" => ProposalChoice::Brownian,
    "effective" => ProposalChoice::Effective,
});
keyword_enum!(ReconstructionChoice {
    "nu1" => ReconstructionChoice::Nu1,
    "nu2" => ReconstructionChoice::Nu2,
    "exact" => ReconstructionChoice::Exact,
});
keyword_enum!(Observable {
    "rc_value" => Observable::RcValue,
});

/// Micro-macro variant fields, all mandatory for `sampler = mm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmSettings {
    pub free_energy: FreeEnergyChoice,
    pub proposal: ProposalChoice,
    pub reconstruction: ReconstructionChoice,
    pub dt_macro: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub epsilon: f64,
    pub beta: f64,
    pub sampler: SamplerChoice,
    /// Required for `mala`.
    pub dt_micro: Option<f64>,
    /// Required for `mm`.
    pub mm: Option<MmSettings>,
    pub n_steps: usize,
    pub n_replicas: usize,
    pub base_seed: u64,
    pub observable: Observable,
    pub output_dir: PathBuf,
    pub thin: usize,
    pub write_traces: bool,
    pub histogram_bins: usize,
    /// Leading samples dropped before estimating K_corr.
    pub kcorr_burn_in: usize,
    /// Coefficient-table grid size for `table` / `effective`.
    pub table_nodes: usize,
    /// Gauss–Legendre nodes per level-set dimension.
    pub quad_nodes: usize,
    /// Read the coefficient table from this file instead of computing it.
    pub table_file: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "model",
    "epsilon",
    "beta",
    "sampler",
    "dt_micro",
    "dt_macro",
    "free_energy",
    "proposal",
    "reconstruction",
    "n_steps",
    "n_replicas",
    "base_seed",
    "observable",
    "output_dir",
    "thin",
    "write_traces",
    "histogram_bins",
    "kcorr_burn_in",
    "table_nodes",
    "quad_nodes",
    "table_file",
];

impl ModelKind {
    pub fn default_epsilon(self) -> f64 {
        match self {
            ModelKind::ThreeAtom => 1e-6,
            ModelKind::Butane => 0.0,
            ModelKind::Toy => 1e-2,
        }
    }

    pub fn default_beta(self) -> f64 {
        match self {
            ModelKind::Butane => 1e-2,
            _ => 1.0,
        }
    }

    pub fn default_quad_nodes(self) -> usize {
        match self {
            ModelKind::Butane => 10,
            _ => 64,
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Parser<'a> {
    path: &'a str,
    entries: HashMap<String, Entry>,
}

impl Parser<'_> {
    fn line_error(&self, line: usize, message: impl Into<String>) -> ConfigError {
        ConfigError::Line {
            path: self.path.to_string(),
            line,
            message: message.into(),
        }
    }

    fn invalid(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            path: self.path.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| self.line_error(e.line, format!("{key}: {err}"))),
        }
    }

    fn required<T: FromStr>(&self, key: &str, why: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| self.invalid(format!("missing key `{key}` ({why})")))
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64, ConfigError> {
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            let line = self.entries.get(key).map_or(0, |e| e.line);
            Err(self.line_error(line, format!("{key} must be a positive number, got {value}")))
        }
    }

    fn at_least_one(&self, key: &str, value: usize) -> Result<usize, ConfigError> {
        if value >= 1 {
            Ok(value)
        } else {
            let line = self.entries.get(key).map_or(0, |e| e.line);
            Err(self.line_error(line, format!("{key} must be at least 1")))
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses configuration text; `origin` names the source in messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut p = Parser {
            path: origin,
            entries: HashMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(p.line_error(line, format!("expected `key = value`, got `{content}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(p.line_error(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(p.line_error(line, format!("empty value for `{key}`")));
            }
            if let Some(prev) = p.entries.get(key) {
                return Err(p.line_error(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            p.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }

        let model: ModelKind = p.required("model", "always required")?;
        let sampler: SamplerChoice = p.required("sampler", "always required")?;
        let epsilon = match (model, p.parse::<f64>("epsilon")?) {
            (ModelKind::Butane, Some(_)) => {
                let line = p.entries["epsilon"].line;
                return Err(p.line_error(line, "epsilon does not apply to butane"));
            }
            (ModelKind::Butane, None) => 0.0,
            (_, Some(e)) => p.positive("epsilon", e)?,
            (m, None) => m.default_epsilon(),
        };
        let beta = p.positive("beta", p.parse("beta")?.unwrap_or(model.default_beta()))?;

        let dt_micro = match p.parse::<f64>("dt_micro")? {
            Some(v) => Some(p.positive("dt_micro", v)?),
            None => None,
        };
        if sampler == SamplerChoice::Mala && dt_micro.is_none() {
            return Err(p.invalid("missing key `dt_micro` (required for sampler = mala)"));
        }

        let mm = if sampler == SamplerChoice::Mm {
            let why = "required for sampler = mm";
            let dt_macro: f64 = p.required("dt_macro", why)?;
            let settings = MmSettings {
                free_energy: p.required("free_energy", why)?,
                proposal: p.required("proposal", why)?,
                reconstruction: p.required("reconstruction", why)?,
                dt_macro: p.positive("dt_macro", dt_macro)?,
            };
            validate_variants(&p, model, &settings)?;
            Some(settings)
        } else {
            None
        };

        let n_steps = p.at_least_one("n_steps", p.parse("n_steps")?.unwrap_or(1_000_000))?;
        let n_replicas = p.at_least_one("n_replicas", p.parse("n_replicas")?.unwrap_or(1))?;
        let thin = p.at_least_one("thin", p.parse("thin")?.unwrap_or(1))?;
        let histogram_bins =
            p.at_least_one("histogram_bins", p.parse("histogram_bins")?.unwrap_or(100))?;
        let table_nodes = p.parse("table_nodes")?.unwrap_or(micromacro::effective::DEFAULT_GRID_NODES);
        if table_nodes < 2 {
            let line = p.entries["table_nodes"].line;
            return Err(p.line_error(line, "table_nodes must be at least 2"));
        }
        let quad_nodes = p.at_least_one(
            "quad_nodes",
            p.parse("quad_nodes")?.unwrap_or(model.default_quad_nodes()),
        )?;

        Ok(Self {
            model,
            epsilon,
            beta,
            sampler,
            dt_micro,
            mm,
            n_steps,
            n_replicas,
            base_seed: p.parse("base_seed")?.unwrap_or(0),
            observable: p.parse("observable")?.unwrap_or(Observable::RcValue),
            output_dir: p.parse::<PathBuf>("output_dir")?.unwrap_or_else(|| PathBuf::from("out")),
            thin,
            write_traces: p.parse("write_traces")?.unwrap_or(true),
            histogram_bins,
            kcorr_burn_in: p.parse("kcorr_burn_in")?.unwrap_or(0),
            table_nodes,
            quad_nodes,
            table_file: p.parse("table_file")?,
        })
    }

    /// Whether a coefficient table must be built or loaded.
    pub fn needs_table(&self) -> bool {
        self.mm.is_some_and(|m| {
            m.free_energy == FreeEnergyChoice::Table || m.proposal == ProposalChoice::Effective
        })
    }
}

fn validate_variants(p: &Parser<'_>, model: ModelKind, s: &MmSettings) -> Result<(), ConfigError> {
    use FreeEnergyChoice as F;
    use ReconstructionChoice as R;
    let line = |key: &str| p.entries.get(key).map_or(0, |e| e.line);
    if model != ModelKind::ThreeAtom && matches!(s.free_energy, F::A1 | F::A2 | F::A3) {
        return Err(p.line_error(
            line("free_energy"),
            format!("free_energy = {} is only defined for three_atom", s.free_energy),
        ));
    }
    if model != ModelKind::ThreeAtom && matches!(s.reconstruction, R::Nu1 | R::Nu2) {
        return Err(p.line_error(
            line("reconstruction"),
            format!("reconstruction = {} is only defined for three_atom", s.reconstruction),
        ));
    }
    Ok(())
}
