//! Benchmark systems: the three-atom molecule, united-atom butane and an
//! analytic two-dimensional toy model.

pub mod butane;
pub mod three_atom;
pub mod toy;

use crate::rng::RngStream;

/// Draws from `Normal(mean, sd²)` restricted to `(lo, hi)` by rejection.
/// Returns the value and the number of rejected draws.
pub(crate) fn truncated_normal(
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    rng: &mut RngStream,
) -> (f64, u32) {
    let mut rejected = 0;
    loop {
        let v = mean + sd * rng.standard_normal();
        if v > lo && v < hi {
            return (v, rejected);
        }
        rejected += 1;
    }
}

/// Fixed-variance normal with its log-normalizer precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Normal1 {
    var: f64,
    sd: f64,
    half_precision: f64,
    log_norm: f64,
}

impl Normal1 {
    pub(crate) fn new(var: f64) -> Self {
        Self {
            var,
            sd: var.sqrt(),
            half_precision: 0.5 / var,
            log_norm: -0.5 * (2.0 * std::f64::consts::PI * var).ln(),
        }
    }

    pub(crate) fn var(&self) -> f64 {
        self.var
    }

    pub(crate) fn sd(&self) -> f64 {
        self.sd
    }

    /// `log N(v; mean, var)`.
    #[inline]
    pub(crate) fn log_density(&self, v: f64, mean: f64) -> f64 {
        let d = v - mean;
        self.log_norm - d * d * self.half_precision
    }
}
