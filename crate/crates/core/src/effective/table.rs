use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::Interval;
use crate::samplers::FreeEnergy;

pub const DEFAULT_GRID_NODES: usize = 512;

/// `n` equispaced nodes from `domain.lo` to `domain.hi` inclusive.
pub fn uniform_grid(domain: Interval, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two nodes");
    let h = domain.width() / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { domain.hi } else { domain.lo + i as f64 * h })
        .collect()
}

/// Interpolated effective-dynamics coefficients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub b: f64,
    pub sigma2: f64,
    pub a: f64,
}

/// Drift, squared diffusion and free energy tabulated on a strictly
/// increasing grid, with piecewise-linear interpolation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    grid: Vec<f64>,
    b: Vec<f64>,
    sigma2: Vec<f64>,
    a: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(grid: Vec<f64>, b: Vec<f64>, sigma2: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if n < 2 || b.len() != n || sigma2.len() != n || a.len() != n {
            return Err(Error::InvalidArgument(format!(
                "table columns must share a length of at least 2 (grid {}, b {}, sigma2 {}, a {})",
                n,
                b.len(),
                sigma2.len(),
                a.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        let all_finite = [&grid, &b, &sigma2, &a]
            .iter()
            .all(|c| c.iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(Error::InvalidArgument("table values must be finite".into()));
        }
        if sigma2.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidArgument("sigma2 must be positive".into()));
        }
        Ok(Self { grid, b, sigma2, a })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    pub fn sigma2_values(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Segment index `k` with `grid[k] <= z <= grid[k+1]`, and the weight
    /// of the right node.
    fn locate(&self, z: f64) -> (usize, f64) {
        let n = self.grid.len();
        let k = match self.grid.partition_point(|&g| g <= z) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let t = (z - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
        (k, t)
    }

    fn lerp(column: &[f64], k: usize, t: f64) -> f64 {
        if t == 0.0 {
            column[k]
        } else if t == 1.0 {
            column[k + 1]
        } else {
            column[k] + t * (column[k + 1] - column[k])
        }
    }

    fn at(&self, k: usize, t: f64) -> Coefficients {
        Coefficients {
            b: Self::lerp(&self.b, k, t),
            sigma2: Self::lerp(&self.sigma2, k, t),
            a: Self::lerp(&self.a, k, t),
        }
    }

    /// Piecewise-linear interpolation; no extrapolation.
    pub fn interpolate(&self, z: f64) -> Result<Coefficients> {
        let (lo, hi) = self.range();
        if !(z >= lo && z <= hi) {
            return Err(Error::OutOfRange { z, lo, hi });
        }
        let (k, t) = self.locate(z);
        Ok(self.at(k, t))
    }

    /// Interpolation with `z` clamped into the grid range.
    pub fn interpolate_clamped(&self, z: f64) -> Coefficients {
        let (lo, hi) = self.range();
        let (k, t) = self.locate(z.clamp(lo, hi));
        self.at(k, t)
    }

    /// Slope of the free-energy column on the segment containing `z`
    /// (end segments outside the grid).
    pub fn free_energy_slope(&self, z: f64) -> f64 {
        let (k, _) = self.locate(z);
        (self.a[k + 1] - self.a[k]) / (self.grid[k + 1] - self.grid[k])
    }

    /// Plain-text format: header `z b sigma2 a`, one row per node, 17
    /// significant digits.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "z b sigma2 a")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e}",
                self.grid[i], self.b[i], self.sigma2[i], self.a[i]
            )?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut cols: [Vec<f64>; 4] = Default::default();
        let mut header_seen = false;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if !header_seen {
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields != ["z", "b", "sigma2", "a"] {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected header `z b sigma2 a`, found `{trimmed}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 4 columns, found {}", fields.len()),
                });
            }
            for (col, field) in cols.iter_mut().zip(&fields) {
                col.push(field.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("`{field}` is not a number"),
                })?);
            }
        }
        let [z, b, s, a] = cols;
        Self::new(z, b, s, a)
    }
}

/// Free energy read from the `a` column of a coefficient table.
#[derive(Debug, Clone)]
pub struct TabulatedFreeEnergy(pub Arc<CoefficientTable>);

impl FreeEnergy for TabulatedFreeEnergy {
    fn value(&self, z: f64) -> f64 {
        self.0.interpolate_clamped(z).a
    }

    fn derivative(&self, z: f64) -> f64 {
        self.0.free_energy_slope(z)
    }
}
