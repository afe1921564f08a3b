//! Planar three-atom molecule.
//!
//! Atom B sits at the origin, atom A on the x-axis at `x_a`, atom C at
//! `(x_c, y_c)`. Two stiff bonds of equilibrium length 1 and a bimodal
//! bending potential in `θ = atan2(y_c, x_c)`:
//!
//! ```text
//! V = (x_a - 1)²/(2ε) + (r_c - 1)²/(2ε) + 104((θ - π/2)² - 0.3838²)²
//! ```
//!
//! The reaction coordinate is `θ`. Densities follow the printed
//! `(x_a, r_c)` parameterisation of the level sets, without a `1/r_c`
//! co-area factor.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{truncated_normal, Normal1};
use crate::error::{Error, Result};
use crate::model::{Interval, LevelSetChart, PlanarAngle, ReactionCoordinate, SystemModel};
use crate::rng::RngStream;
use crate::samplers::{FreeEnergy, Reconstruction};

/// Half the bending stiffness, `208 / 2`.
pub const ANGLE_PREFACTOR: f64 = 104.0;
/// Distance of both bending minima from `π/2`.
pub const WELL_OFFSET: f64 = 0.3838;
/// Well offset of the shifted free energy `Ā²`.
pub const SHIFTED_WELL_OFFSET: f64 = 0.4838;

/// `104((θ - π/2)² - c²)²` and its derivative.
#[inline]
fn double_well(theta: f64, offset: f64) -> (f64, f64) {
    let u = theta - FRAC_PI_2;
    let s = u * u - offset * offset;
    (ANGLE_PREFACTOR * s * s, 4.0 * ANGLE_PREFACTOR * u * s)
}

#[derive(Debug, Clone)]
pub struct ThreeAtomModel {
    epsilon: f64,
    beta: f64,
    rc: PlanarAngle,
}

impl ThreeAtomModel {
    pub fn new(epsilon: f64, beta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon and beta must be positive (epsilon {epsilon}, beta {beta})"
            )));
        }
        Ok(Self {
            epsilon,
            beta,
            rc: PlanarAngle {
                x_index: 1,
                y_index: 2,
            },
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Macroscopic domain `H = [0, π]`; both wells are interior.
    pub fn domain() -> Interval {
        Interval::closed(0.0, PI)
    }

    /// `(1, 0, 1)`: the saddle `θ = π/2` with both bonds at rest length.
    pub fn initial_state() -> Vec<f64> {
        vec![1.0, 0.0, 1.0]
    }

    /// Configuration with given bond lengths and angle.
    pub fn from_internal(x_a: f64, r_c: f64, theta: f64) -> Vec<f64> {
        vec![x_a, r_c * theta.cos(), r_c * theta.sin()]
    }

    fn polar(x: &[f64]) -> Result<(f64, f64)> {
        let r = x[1].hypot(x[2]);
        if r == 0.0 {
            return Err(Error::Domain {
                index: 1,
                value: x[1],
            });
        }
        Ok((r, x[2].atan2(x[1])))
    }
}

impl SystemModel for ThreeAtomModel {
    fn name(&self) -> &str {
        "three_atom"
    }

    fn dim(&self) -> usize {
        3
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn potential(&self, x: &[f64]) -> Result<f64> {
        let (r, theta) = Self::polar(x)?;
        let da = x[0] - 1.0;
        let dr = r - 1.0;
        let (angle, _) = double_well(theta, WELL_OFFSET);
        Ok((da * da + dr * dr) / (2.0 * self.epsilon) + angle)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.potential_and_gradient(x, out).map(|_| ())
    }

    fn potential_and_gradient(&self, x: &[f64], out: &mut [f64]) -> Result<f64> {
        let (r, theta) = Self::polar(x)?;
        let da = x[0] - 1.0;
        let dr = r - 1.0;
        let (angle, dangle) = double_well(theta, WELL_OFFSET);
        let bond = dr / (self.epsilon * r);
        let r2 = r * r;
        out[0] = da / self.epsilon;
        out[1] = bond * x[1] - dangle * x[2] / r2;
        out[2] = bond * x[2] + dangle * x[1] / r2;
        Ok((da * da + dr * dr) / (2.0 * self.epsilon) + angle)
    }

    fn reaction_coordinate(&self) -> &dyn ReactionCoordinate {
        &self.rc
    }
}

impl LevelSetChart for ThreeAtomModel {
    fn level_dim(&self) -> usize {
        2
    }

    fn level_bounds(&self, _z: f64, half_width_sd: f64) -> Vec<(f64, f64)> {
        let w = half_width_sd * (self.epsilon / self.beta).sqrt();
        vec![(1.0 - w, 1.0 + w), ((1.0 - w).max(0.0), 1.0 + w)]
    }

    fn embed(&self, z: f64, params: &[f64], out: &mut [f64]) {
        out[0] = params[0];
        out[1] = params[1] * z.cos();
        out[2] = params[1] * z.sin();
    }
}

/// The three approximate free energies of the bending angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeAtomFreeEnergy {
    /// Exact: `104((θ - π/2)² - 0.3838²)²`.
    A1,
    /// Wells moved outwards by 0.1 rad.
    A2,
    /// `A1 + cos θ`, unequal well depths.
    A3,
}

impl FreeEnergy for ThreeAtomFreeEnergy {
    fn value(&self, z: f64) -> f64 {
        match self {
            Self::A1 => double_well(z, WELL_OFFSET).0,
            Self::A2 => double_well(z, SHIFTED_WELL_OFFSET).0,
            Self::A3 => double_well(z, WELL_OFFSET).0 + z.cos(),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Self::A1 => double_well(z, WELL_OFFSET).1,
            Self::A2 => double_well(z, SHIFTED_WELL_OFFSET).1,
            Self::A3 => double_well(z, WELL_OFFSET).1 - z.sin(),
        }
    }
}

/// Gaussian reconstruction of `(x_a, r_c)` at fixed `θ`, with variance
/// `scale·ε/β` in both directions. `scale = 1` is the exact conditional
/// (`ν̄¹`); `scale = 2` doubles the variance (`ν̄²`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeAtomReconstruction {
    normal: Normal1,
}

impl ThreeAtomReconstruction {
    pub fn new(model: &ThreeAtomModel, variance_scale: f64) -> Self {
        Self {
            normal: Normal1::new(variance_scale * model.epsilon / model.beta),
        }
    }

    /// `ν̄¹ = ν`.
    pub fn exact(model: &ThreeAtomModel) -> Self {
        Self::new(model, 1.0)
    }

    /// `ν̄²`, twice the exact variance.
    pub fn widened(model: &ThreeAtomModel) -> Self {
        Self::new(model, 2.0)
    }

    pub fn variance(&self) -> f64 {
        self.normal.var()
    }

    /// Draw with the number of `r_c ≤ 0` rejections.
    pub fn draw(&self, theta: f64, rng: &mut RngStream) -> (Vec<f64>, u32) {
        let sd = self.normal.sd();
        let x_a = 1.0 + sd * rng.standard_normal();
        let (r_c, rejected) = truncated_normal(1.0, sd, 0.0, f64::INFINITY, rng);
        (ThreeAtomModel::from_internal(x_a, r_c, theta), rejected)
    }
}

impl Reconstruction for ThreeAtomReconstruction {
    fn sample(&self, z: f64, rng: &mut RngStream) -> Vec<f64> {
        self.draw(z, rng).0
    }

    fn log_density(&self, x: &[f64], _z: f64) -> f64 {
        let r = x[1].hypot(x[2]);
        self.normal.log_density(x[0], 1.0) + self.normal.log_density(r, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{gibbs_log_density, gradient_check};
    use crate::state::MicroState;

    #[test]
    fn minima_have_zero_energy() {
        let m = ThreeAtomModel::new(1e-6, 1.0).unwrap();
        for theta in [FRAC_PI_2 - WELL_OFFSET, FRAC_PI_2 + WELL_OFFSET] {
            let x = MicroState::new(ThreeAtomModel::from_internal(1.0, 1.0, theta)).unwrap();
            let v = m.potential(x.coords()).unwrap();
            assert!(v.abs() < 1e-12, "{v}");
            assert!(gibbs_log_density(&m, &x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_energy() {
        let m = ThreeAtomModel::new(1e-6, 1.0).unwrap();
        let x = MicroState::new(vec![1.0, 0.0, 1.0]).unwrap();
        let expected = 104.0 * 0.3838f64.powi(4);
        assert!((expected - 2.2566).abs() < 1e-4);
        assert!((m.potential(x.coords()).unwrap() - expected).abs() < 1e-12);
        assert!((gibbs_log_density(&m, &x).unwrap() + expected).abs() < 1e-12);
    }

    #[test]
    fn stretched_bond_adds_one_half() {
        let eps = 1e-4;
        let m = ThreeAtomModel::new(eps, 1.0).unwrap();
        let v = m.potential(&[1.0 + eps.sqrt(), 0.0, 1.0]).unwrap();
        let expected = 104.0 * 0.3838f64.powi(4) + 0.5;
        assert!((v - expected).abs() < 1e-10, "{v} vs {expected}");
    }

    #[test]
    fn origin_is_out_of_domain() {
        let m = ThreeAtomModel::new(1e-4, 1.0).unwrap();
        assert!(matches!(m.potential(&[1.0, 0.0, 0.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn free_energy_variants() {
        use ThreeAtomFreeEnergy::*;
        for s in [-1.0, 1.0] {
            assert!(A1.value(FRAC_PI_2 + s * WELL_OFFSET).abs() < 1e-12);
            assert!(A2.value(FRAC_PI_2 + s * SHIFTED_WELL_OFFSET).abs() < 1e-12);
        }
        let t = FRAC_PI_2 + WELL_OFFSET;
        let diff = A3.value(t) - A1.value(t);
        assert!((diff - t.cos()).abs() < 1e-15);
        assert!((diff + 0.3744).abs() < 1e-4);
        assert_eq!(A1.derivative(FRAC_PI_2), 0.0);
    }

    #[test]
    fn free_energy_derivatives_match_finite_differences() {
        use ThreeAtomFreeEnergy::*;
        for f in [A1, A2, A3] {
            for k in 0..50 {
                let z = 0.05 + k as f64 * 0.06;
                let h = 1e-6;
                let fd = (f.value(z + h) - f.value(z - h)) / (2.0 * h);
                let g = f.derivative(z);
                assert!((fd - g).abs() / g.abs().max(1.0) < 1e-5, "{f:?} at {z}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences_near_wells() {
        let m = ThreeAtomModel::new(1e-6, 1.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..200 {
            let sd = 1e-3;
            let theta = PI * rng.uniform();
            let x = ThreeAtomModel::from_internal(
                1.0 + 3.0 * sd * rng.standard_normal(),
                1.0 + 3.0 * sd * rng.standard_normal(),
                theta,
            );
            let s = MicroState::new(x).unwrap();
            assert!(gradient_check(&m, &s, 1e-6) < 1e-5);
        }
    }

    #[test]
    fn reconstruction_lands_on_level_set() {
        let m = ThreeAtomModel::new(1e-4, 1.0).unwrap();
        let r = ThreeAtomReconstruction::exact(&m);
        let mut rng = RngStream::new(3, 0);
        let rc = m.reaction_coordinate();
        let mut worst: f64 = 0.0;
        for _ in 0..100_000 {
            let theta = PI * rng.uniform();
            let x = r.sample(theta, &mut rng);
            worst = worst.max((rc.value(&x).unwrap() - theta).abs());
            assert!(r.log_density(&x, theta).is_finite());
        }
        // atan2(r sin θ, r cos θ) recovers θ up to rounding.
        assert!(worst <= 4.0 * f64::EPSILON, "{worst}");
    }

    #[test]
    fn exact_reconstruction_moments() {
        let eps = 1e-4;
        let m = ThreeAtomModel::new(eps, 1.0).unwrap();
        let r = ThreeAtomReconstruction::exact(&m);
        let mut rng = RngStream::new(17, 0);
        let n = 100_000;
        let mut rs = Vec::with_capacity(n);
        let mut rejected = 0;
        for _ in 0..n {
            let (x, rej) = r.draw(1.0, &mut rng);
            rejected += rej;
            rs.push(x[1].hypot(x[2]));
        }
        let mean = rs.iter().sum::<f64>() / n as f64;
        let var = rs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Standard error of the mean is sqrt(1e-4 / 1e5); allow 4 of them.
        assert!((mean - 1.0).abs() < 4.0 * (eps / n as f64).sqrt());
        assert!((var / eps - 1.0).abs() < 0.05);
        assert_eq!(rejected, 0);
    }

    #[test]
    fn no_negative_radius_rejections_at_small_epsilon() {
        let m = ThreeAtomModel::new(1e-4, 1.0).unwrap();
        let r = ThreeAtomReconstruction::exact(&m);
        let mut rng = RngStream::new(5, 0);
        let total: u32 = (0..1_000_000).map(|_| r.draw(2.0, &mut rng).1).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn reconstruction_normalisation_is_theta_independent() {
        let m = ThreeAtomModel::new(1e-4, 1.0).unwrap();
        let r = ThreeAtomReconstruction::widened(&m);
        let a = ThreeAtomModel::from_internal(1.01, 0.99, 0.4);
        let b = ThreeAtomModel::from_internal(1.01, 0.99, 2.4);
        assert!((r.log_density(&a, 0.4) - r.log_density(&b, 2.4)).abs() < 1e-9);
    }
}
