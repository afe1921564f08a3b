//! Model traits: potentials, reaction coordinates and level-set charts.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Scalar reaction coordinate `ξ: ℝ^d → ℝ`.
pub trait ReactionCoordinate: Send + Sync {
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Writes `∇ξ(x)` into `out` (length `d`).
    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// `Δξ(x)`; the default uses central differences of [`gradient`](Self::gradient).
    fn laplacian(&self, x: &[f64]) -> Result<f64> {
        let d = x.len();
        let mut xp = x.to_vec();
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        let mut sum = 0.0;
        for i in 0..d {
            let h = 1e-5 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            self.gradient(&xp, &mut gp)?;
            xp[i] = x[i] - h;
            self.gradient(&xp, &mut gm)?;
            xp[i] = x[i];
            sum += (gp[i] - gm[i]) / (2.0 * h);
        }
        Ok(sum)
    }

    /// Gram "matrix" `G = ∇ξᵀ∇ξ`, a scalar for one output.
    fn gram(&self, x: &[f64]) -> Result<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient(x, &mut g)?;
        Ok(g.iter().map(|v| v * v).sum())
    }
}

/// `V`, `∇V`, `β` and the reaction coordinate of a microscopic system.
pub trait SystemModel: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Inverse temperature `β`.
    fn beta(&self) -> f64;

    fn potential(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn potential_and_gradient(&self, x: &[f64], out: &mut [f64]) -> Result<f64> {
        self.gradient(x, out)?;
        self.potential(x)
    }

    fn reaction_coordinate(&self) -> &dyn ReactionCoordinate;
}

/// A parameterisation of the level sets `Σ(z) = {ξ(x) = z}` used by the
/// quadrature routines: `x = embed(z, p)` for `p` in a box of dimension
/// [`level_dim`](Self::level_dim).
pub trait LevelSetChart: SystemModel {
    fn level_dim(&self) -> usize;

    /// Integration box on `Σ(z)`: the region within `half_width_sd` standard
    /// deviations of the conditional mean in every level-set direction.
    fn level_bounds(&self, z: f64, half_width_sd: f64) -> Vec<(f64, f64)>;

    fn embed(&self, z: f64, params: &[f64], out: &mut [f64]);
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Interval on the real line with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: true,
        }
    }

    pub fn contains(&self, z: f64) -> bool {
        let above = if self.lo_closed { z >= self.lo } else { z > self.lo };
        let below = if self.hi_closed { z <= self.hi } else { z < self.hi };
        above && below
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `ξ(x) = x[index]`, optionally wrapped into `(-π, π]` for torsions.
#[derive(Debug, Clone, Copy)]
pub struct CoordinateProjection {
    pub index: usize,
    pub periodic: bool,
}

impl ReactionCoordinate for CoordinateProjection {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let v = *x.get(self.index).ok_or(Error::Dimension {
            expected: self.index + 1,
            got: x.len(),
        })?;
        Ok(if self.periodic { wrap_angle(v) } else { v })
    }

    fn gradient(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        out[self.index] = 1.0;
        Ok(())
    }

    fn laplacian(&self, _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

/// Polar angle `θ = atan2(x[y_index], x[x_index])`.
#[derive(Debug, Clone, Copy)]
pub struct PlanarAngle {
    pub x_index: usize,
    pub y_index: usize,
}

impl ReactionCoordinate for PlanarAngle {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let (px, py) = (x[self.x_index], x[self.y_index]);
        if px == 0.0 && py == 0.0 {
            return Err(Error::Domain {
                index: self.x_index,
                value: px,
            });
        }
        Ok(py.atan2(px))
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (px, py) = (x[self.x_index], x[self.y_index]);
        let r2 = px * px + py * py;
        if r2 == 0.0 {
            return Err(Error::Domain {
                index: self.x_index,
                value: px,
            });
        }
        out.fill(0.0);
        out[self.x_index] = -py / r2;
        out[self.y_index] = px / r2;
        Ok(())
    }

    // atan2 is harmonic away from the origin.
    fn laplacian(&self, _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}
