use std::time::Instant;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::state::MicroState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Mala,
    MicroMacro,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Mala => "mala",
            SamplerKind::MicroMacro => "mm",
        }
    }
}

/// What happened during one chain step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutcome {
    pub macro_proposed: bool,
    pub macro_accepted: bool,
    pub micro_proposed: bool,
    pub micro_accepted: bool,
    pub non_finite: bool,
    /// Fine-level acceptance probability, when one was computed.
    pub alpha_f: Option<f64>,
}

/// A Markov kernel that advances a microscopic state in place.
///
/// The state may only change when the outcome reports `micro_accepted`;
/// [`run_chain`] reuses the previous observable value otherwise.
pub trait Step: Sync {
    fn kind(&self) -> SamplerKind;
    fn step(&self, state: &mut MicroState, rng: &mut RngStream) -> Result<StepOutcome>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub observable: f64,
    pub macro_accepted: bool,
    pub micro_accepted: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    /// Keep every `thin`-th record; counters and the mean use every step.
    pub thin: usize,
    /// Keep per-step records at all.
    pub record: bool,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            thin: 1,
            record: true,
        }
    }
}

impl ChainOptions {
    pub fn summary_only() -> Self {
        Self {
            thin: 1,
            record: false,
        }
    }
}

/// Output of [`run_chain`].
#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub kind: SamplerKind,
    pub records: Vec<TraceRecord>,
    pub n_steps: usize,
    /// Mean of the observable over all completed steps.
    pub mean: f64,
    pub macro_proposed: u64,
    pub macro_accepted: u64,
    pub micro_proposed: u64,
    pub micro_accepted: u64,
    /// Proposals rejected because their energy was non-finite or out of domain.
    pub non_finite: u64,
    /// Smallest fine-level acceptance probability computed, if any.
    pub alpha_f_min: Option<f64>,
    pub wall_time: f64,
    pub seed: u64,
    pub stream_id: u64,
    pub final_state: MicroState,
    /// Set when a step failed; the trace then covers only the steps before it.
    pub failure: Option<String>,
}

impl ChainTrace {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }

    /// Accepted macroscopic proposals over macroscopic proposals (equal to
    /// the number of chain steps for the micro-macro sampler).
    pub fn macro_acceptance_rate(&self) -> f64 {
        ratio(self.macro_accepted, self.macro_proposed)
    }

    /// Accepted microscopic proposals over microscopic proposals; for the
    /// micro-macro sampler this is relative to accepted macroscopic values.
    pub fn micro_acceptance_rate(&self) -> f64 {
        ratio(self.micro_accepted, self.micro_proposed)
    }

    pub fn observables(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.observable).collect()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Iterates `step` `n` times from `x0`, recording `observable` of the state
/// produced by every step (a rejection records the repeated value).
///
/// A failing step stops the chain; the partial trace is returned with
/// [`ChainTrace::failure`] set.
pub fn run_chain<S, O>(
    step: &S,
    x0: MicroState,
    n: usize,
    observable: O,
    rng: &mut RngStream,
    options: ChainOptions,
) -> Result<ChainTrace>
where
    S: Step + ?Sized,
    O: Fn(&MicroState) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidArgument("chain length must be at least 1".into()));
    }
    let thin = options.thin.max(1);
    let mut trace = ChainTrace {
        kind: step.kind(),
        records: Vec::with_capacity(if options.record { n / thin + 1 } else { 0 }),
        n_steps: 0,
        mean: 0.0,
        macro_proposed: 0,
        macro_accepted: 0,
        micro_proposed: 0,
        micro_accepted: 0,
        non_finite: 0,
        alpha_f_min: None,
        wall_time: 0.0,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        final_state: x0.clone(),
        failure: None,
    };

    let mut state = x0;
    let mut sum = 0.0;
    let mut last = None;
    let start = Instant::now();
    for i in 0..n {
        let out = match step.step(&mut state, rng) {
            Ok(out) => out,
            Err(e) => {
                trace.failure = Some(format!("step {i}: {e}"));
                break;
            }
        };
        trace.macro_proposed += out.macro_proposed as u64;
        trace.macro_accepted += out.macro_accepted as u64;
        trace.micro_proposed += out.micro_proposed as u64;
        trace.micro_accepted += out.micro_accepted as u64;
        trace.non_finite += out.non_finite as u64;
        if let Some(a) = out.alpha_f {
            trace.alpha_f_min = Some(trace.alpha_f_min.map_or(a, |m| m.min(a)));
        }
        // A step that accepted nothing left the state untouched.
        let value = match last {
            Some(v) if !out.micro_accepted => v,
            _ => observable(&state),
        };
        last = Some(value);
        sum += value;
        if options.record && i % thin == 0 {
            trace.records.push(TraceRecord {
                step: i,
                observable: value,
                macro_accepted: out.macro_accepted,
                micro_accepted: out.micro_accepted,
            });
        }
        trace.n_steps = i + 1;
    }
    trace.wall_time = start.elapsed().as_secs_f64();
    trace.mean = if trace.n_steps > 0 {
        sum / trace.n_steps as f64
    } else {
        f64::NAN
    };
    trace.final_state = state;
    Ok(trace)
}
