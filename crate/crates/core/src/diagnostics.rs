//! Estimators and gain metrics for comparing samplers.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::effective::GaussLegendre;
use crate::error::{Error, Result};

/// Automatic-windowing constant `c` in `W ≥ c·K(W)`.
pub const KCORR_WINDOW_CONSTANT: f64 = 5.0;
/// Lower floor for K_corr estimates.
pub const KCORR_FLOOR: f64 = 1e-3;
/// Shortest series accepted by [`estimate_kcorr`].
pub const KCORR_MIN_LENGTH: usize = 100;

/// Biased sample autocorrelation `ρ̂(t)` for `t = 0..n`, via zero-padded FFT.
pub fn autocorrelation(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData("autocorrelation needs two points".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let c0 = buf[0].re;
    if !(c0 > 0.0) {
        return Err(Error::InsufficientData(
            "series has zero variance; autocorrelation undefined".into(),
        ));
    }
    Ok(buf[..n].iter().map(|c| c.re / c0).collect())
}

/// Autocorrelation factor `K_corr = 1 + 2 Σ_{t=1}^{W} ρ̂(t)`, with `W` the
/// smallest window satisfying `W ≥ 5·(1 + 2 Σ_{t≤W} ρ̂(t))`. Floored at
/// [`KCORR_FLOOR`].
pub fn estimate_kcorr(series: &[f64]) -> Result<f64> {
    if series.len() < KCORR_MIN_LENGTH {
        return Err(Error::InsufficientData(format!(
            "K_corr needs at least {KCORR_MIN_LENGTH} points, got {}",
            series.len()
        )));
    }
    let rho = autocorrelation(series)?;
    let mut k = 1.0;
    for (w, r) in rho.iter().enumerate().skip(1) {
        k += 2.0 * r;
        if w as f64 >= KCORR_WINDOW_CONSTANT * k {
            break;
        }
    }
    Ok(k.max(KCORR_FLOOR))
}

/// Unbiased sample variance of per-replica estimates.
pub fn replicate_variance(replicate_means: &[f64]) -> Result<f64> {
    let n = replicate_means.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "replicate variance needs at least 2 replicas, got {n}"
        )));
    }
    let mean = replicate_means.iter().sum::<f64>() / n as f64;
    Ok(replicate_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64)
}

/// Efficiency of the micro-macro sampler relative to a microscopic one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReport {
    pub macro_acc_rate: f64,
    /// Relative to accepted macroscopic values.
    pub micro_acc_rate: f64,
    /// Acceptance rate of the microscopic reference sampler.
    pub reference_acc_rate: f64,
    pub runtime_gain: f64,
    pub variance_gain: f64,
    pub total_gain: f64,
}

/// The gain factors of [`GainReport`], without acceptance rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    pub variance_gain: f64,
    pub runtime_gain: f64,
    pub total_gain: f64,
}

/// `Var_micro / Var_mM` times `T_micro / T_mM`.
pub fn efficiency_gain(var_micro: f64, var_mm: f64, t_micro: f64, t_mm: f64) -> Result<Gain> {
    for (name, v) in [
        ("var_micro", var_micro),
        ("var_mm", var_mm),
        ("t_micro", t_micro),
        ("t_mm", t_mm),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    let variance_gain = var_micro / var_mm;
    let runtime_gain = t_micro / t_mm;
    Ok(Gain {
        variance_gain,
        runtime_gain,
        total_gain: variance_gain * runtime_gain,
    })
}

impl GainReport {
    pub fn new(gain: Gain, macro_acc_rate: f64, micro_acc_rate: f64, reference_acc_rate: f64) -> Self {
        Self {
            macro_acc_rate,
            micro_acc_rate,
            reference_acc_rate,
            runtime_gain: gain.runtime_gain,
            variance_gain: gain.variance_gain,
            total_gain: gain.total_gain,
        }
    }
}

/// Probability masses over equal-width bins, with out-of-range counts kept
/// separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub masses: Vec<f64>,
    /// Fraction of values outside `[lo, hi]`.
    pub overflow: f64,
    pub count: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.bins() as f64;
        (self.lo + k as f64 * w, self.lo + (k + 1) as f64 * w)
    }

    pub fn bin_index(&self, value: f64) -> Option<usize> {
        bin_index(value, self.lo, self.hi, self.bins())
    }
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    let k = ((v - lo) / (hi - lo) * bins as f64) as usize;
    Some(k.min(bins - 1))
}

/// Normalised histogram of `series` on `[lo, hi]`. Masses are fractions of
/// the whole series, so in-range masses plus overflow sum to one.
pub fn histogram(series: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "histogram needs bins >= 1 and a non-degenerate range (bins {bins}, [{lo}, {hi}])"
        )));
    }
    let mut counts = vec![0usize; bins];
    let mut outside = 0usize;
    for &v in series {
        match bin_index(v, lo, hi, bins) {
            Some(k) => counts[k] += 1,
            None => outside += 1,
        }
    }
    let n = series.len().max(1) as f64;
    Ok(Histogram {
        lo,
        hi,
        masses: counts.iter().map(|&c| c as f64 / n).collect(),
        overflow: outside as f64 / n,
        count: series.len(),
    })
}

/// Bin masses of the density `∝ exp(log_density)` on `[lo, hi]`, by
/// Gauss–Legendre quadrature inside every bin, normalised to sum to one.
pub fn density_bin_masses<F: Fn(f64) -> f64>(
    log_density: F,
    bins: usize,
    lo: f64,
    hi: f64,
    nodes_per_bin: usize,
) -> Result<Vec<f64>> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidArgument("degenerate binning".into()));
    }
    let rule = GaussLegendre::new(nodes_per_bin);
    let w = (hi - lo) / bins as f64;
    // Shift by the largest log density on the nodes to avoid overflow.
    let mut shift = f64::NEG_INFINITY;
    for k in 0..bins {
        let a = lo + k as f64 * w;
        for &x in rule.nodes() {
            shift = shift.max(log_density(a + 0.5 * w * (x + 1.0)));
        }
    }
    let raw: Vec<f64> = (0..bins)
        .map(|k| {
            let a = lo + k as f64 * w;
            rule.integrate(a, a + w, |z| (log_density(z) - shift).exp())
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidArgument("density does not integrate to a finite positive value".into()));
    }
    Ok(raw.iter().map(|m| m / total).collect())
}

/// Total-variation distance `½ Σ |p_i - q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
