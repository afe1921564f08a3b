//! United-atom butane in internal coordinates.
//!
//! The chart is `(r₁, r₂, r₃, θ₁, θ₂, φ)`: three C–C bond lengths, two
//! C–C–C bending angles (radians) and the central torsion. The potential is
//! separable,
//!
//! ```text
//! V = Σ ½k_b(rᵢ - r₀)² + Σ ½k_a(θⱼ - θ₀)² + c₀ + c₁cos φ + c₂cos²φ + c₃cos³φ
//! ```
//!
//! so the torsion polynomial is the exact free energy of `φ` and the
//! bond/angle Gaussians are the exact reconstruction distribution.

use std::f64::consts::PI;

use super::{truncated_normal, Normal1};
use crate::error::{Error, Result};
use crate::model::{
    wrap_angle, CoordinateProjection, Interval, LevelSetChart, ReactionCoordinate, SystemModel,
};
use crate::rng::RngStream;
use crate::samplers::{FreeEnergy, Reconstruction};

pub const TORSION_INDEX: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButaneParams {
    pub bond_k: f64,
    pub bond_r0: f64,
    pub angle_k: f64,
    /// Radians.
    pub angle_theta0: f64,
    pub torsion: [f64; 4],
}

impl Default for ButaneParams {
    fn default() -> Self {
        Self {
            bond_k: 1.17e6,
            bond_r0: 1.53,
            angle_k: 62500.0,
            angle_theta0: 112.0f64.to_radians(),
            torsion: [1031.36, 2037.82, 158.52, -3227.7],
        }
    }
}

impl ButaneParams {
    /// Torsion polynomial and its derivative in `φ`.
    #[inline]
    pub fn torsion_energy(&self, phi: f64) -> (f64, f64) {
        let [c0, c1, c2, c3] = self.torsion;
        let (s, c) = phi.sin_cos();
        let value = c0 + c * (c1 + c * (c2 + c * c3));
        let dvalue = -s * (c1 + c * (2.0 * c2 + 3.0 * c * c3));
        (value, dvalue)
    }
}

#[derive(Debug, Clone)]
pub struct ButaneModel {
    params: ButaneParams,
    beta: f64,
    rc: CoordinateProjection,
}

impl ButaneModel {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_params(ButaneParams::default(), beta)
    }

    pub fn with_params(params: ButaneParams, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            params,
            beta,
            rc: CoordinateProjection {
                index: TORSION_INDEX,
                periodic: true,
            },
        })
    }

    pub fn params(&self) -> &ButaneParams {
        &self.params
    }

    /// `H = (-π, π]`.
    pub fn domain() -> Interval {
        Interval::left_open(-PI, PI)
    }

    /// All bonds and angles at rest, given torsion.
    pub fn equilibrium(&self, phi: f64) -> Vec<f64> {
        let p = &self.params;
        vec![p.bond_r0, p.bond_r0, p.bond_r0, p.angle_theta0, p.angle_theta0, phi]
    }

    fn check_domain(x: &[f64]) -> Result<()> {
        if x.len() != 6 {
            return Err(Error::Dimension {
                expected: 6,
                got: x.len(),
            });
        }
        for (i, &r) in x[..3].iter().enumerate() {
            if !(r > 0.0) {
                return Err(Error::Domain { index: i, value: r });
            }
        }
        for (i, &t) in x[3..5].iter().enumerate() {
            if !(t > 0.0 && t < PI) {
                return Err(Error::Domain {
                    index: 3 + i,
                    value: t,
                });
            }
        }
        if !x[5].is_finite() {
            return Err(Error::Domain {
                index: 5,
                value: x[5],
            });
        }
        Ok(())
    }
}

impl SystemModel for ButaneModel {
    fn name(&self) -> &str {
        "butane"
    }

    fn dim(&self) -> usize {
        6
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn potential(&self, x: &[f64]) -> Result<f64> {
        Self::check_domain(x)?;
        let p = &self.params;
        let bonds: f64 = x[..3].iter().map(|r| (r - p.bond_r0).powi(2)).sum();
        let angles: f64 = x[3..5].iter().map(|t| (t - p.angle_theta0).powi(2)).sum();
        Ok(0.5 * p.bond_k * bonds + 0.5 * p.angle_k * angles + p.torsion_energy(x[5]).0)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.potential_and_gradient(x, out).map(|_| ())
    }

    fn potential_and_gradient(&self, x: &[f64], out: &mut [f64]) -> Result<f64> {
        Self::check_domain(x)?;
        let p = &self.params;
        let mut bonds = 0.0;
        for i in 0..3 {
            let d = x[i] - p.bond_r0;
            bonds += d * d;
            out[i] = p.bond_k * d;
        }
        let mut angles = 0.0;
        for j in 3..5 {
            let d = x[j] - p.angle_theta0;
            angles += d * d;
            out[j] = p.angle_k * d;
        }
        let (t, dt) = p.torsion_energy(x[5]);
        out[5] = dt;
        Ok(0.5 * p.bond_k * bonds + 0.5 * p.angle_k * angles + t)
    }

    fn reaction_coordinate(&self) -> &dyn ReactionCoordinate {
        &self.rc
    }
}

impl LevelSetChart for ButaneModel {
    fn level_dim(&self) -> usize {
        5
    }

    fn level_bounds(&self, _z: f64, half_width_sd: f64) -> Vec<(f64, f64)> {
        let p = &self.params;
        let wb = half_width_sd / (self.beta * p.bond_k).sqrt();
        let wa = half_width_sd / (self.beta * p.angle_k).sqrt();
        let mut b = vec![(p.bond_r0 - wb, p.bond_r0 + wb); 3];
        b.extend(std::iter::repeat_n(
            ((p.angle_theta0 - wa).max(0.0), (p.angle_theta0 + wa).min(PI)),
            2,
        ));
        b
    }

    fn embed(&self, z: f64, params: &[f64], out: &mut [f64]) {
        out[..5].copy_from_slice(params);
        out[5] = z;
    }
}

/// Torsion polynomial as the free energy of `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionFreeEnergy(pub ButaneParams);

impl FreeEnergy for TorsionFreeEnergy {
    fn value(&self, z: f64) -> f64 {
        self.0.torsion_energy(z).0
    }

    fn derivative(&self, z: f64) -> f64 {
        self.0.torsion_energy(z).1
    }
}

/// Exact reconstruction: independent Gaussians for bonds
/// (variance `1/(βk_b)`, truncated to `r > 0`) and angles (variance
/// `1/(βk_a)`, truncated to `(0, π)`), torsion fixed to `φ`.
///
/// The truncation mass is below double precision and is left out of the
/// normaliser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButaneReconstruction {
    params: ButaneParams,
    bond: Normal1,
    angle: Normal1,
}

impl ButaneReconstruction {
    pub fn new(model: &ButaneModel) -> Self {
        let p = model.params;
        Self {
            params: p,
            bond: Normal1::new(1.0 / (model.beta * p.bond_k)),
            angle: Normal1::new(1.0 / (model.beta * p.angle_k)),
        }
    }
}

impl Reconstruction for ButaneReconstruction {
    fn sample(&self, z: f64, rng: &mut RngStream) -> Vec<f64> {
        let p = &self.params;
        let bsd = self.bond.sd();
        let asd = self.angle.sd();
        let mut x = Vec::with_capacity(6);
        for _ in 0..3 {
            x.push(truncated_normal(p.bond_r0, bsd, 0.0, f64::INFINITY, rng).0);
        }
        for _ in 0..2 {
            x.push(truncated_normal(p.angle_theta0, asd, 0.0, PI, rng).0);
        }
        x.push(wrap_angle(z));
        x
    }

    fn log_density(&self, x: &[f64], _z: f64) -> f64 {
        let p = &self.params;
        x[..3]
            .iter()
            .map(|&r| self.bond.log_density(r, p.bond_r0))
            .chain(
                x[3..5]
                    .iter()
                    .map(|&t| self.angle.log_density(t, p.angle_theta0)),
            )
            .sum()
    }
}
