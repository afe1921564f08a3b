//! Built-in invariant suite; every check has an independent oracle.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use micromacro::diagnostics::{density_bin_masses, estimate_kcorr, histogram, tv_distance};
use micromacro::effective::{
    free_energy_quadrature, uniform_grid, CoefficientTable, QuadratureSpec,
};
use micromacro::models::butane::ButaneModel;
use micromacro::models::three_atom::{
    ThreeAtomFreeEnergy, ThreeAtomModel, ThreeAtomReconstruction, WELL_OFFSET,
};
use micromacro::models::toy::{toy_free_energy, ToyFreeEnergy, ToyModel, ToyReconstruction};
use micromacro::samplers::{
    macro_accept_prob, micro_accept_prob, run_chain, ChainOptions, FreeEnergy, MacroModel,
    MacroProposalKernel, MicroMacro, ProposalKind, Reconstruction,
};
use micromacro::{gradient_check, MicroState, RngStream, SystemModel};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

const PAIRS: usize = 10_000;

fn macro_identity() -> Result<String, String> {
    let beta = 1.0;
    let dt = 0.01;
    let fe = ThreeAtomFreeEnergy::A3;
    let mm = MacroModel::new(Arc::new(fe), ThreeAtomModel::domain(), beta);
    let k = MacroProposalKernel::new(ProposalKind::Langevin, dt).map_err(err)?;
    let log_q = |from: f64, to: f64| {
        let var = 2.0 * dt / beta;
        let d = to - from + fe.derivative(from) * dt;
        -0.5 * d * d / var - 0.5 * (2.0 * PI * var).ln()
    };
    let mut rng = RngStream::new(9001, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..PAIRS {
        let a = 0.8 + (PI - 1.6) * rng.uniform();
        let b = a + 0.15 * rng.standard_normal();
        let l = -beta * (fe.value(b) - fe.value(a)) + log_q(b, a) - log_q(a, b);
        let ab = macro_accept_prob(&mm, a, b, k.log_density(&mm, a, b), k.log_density(&mm, b, a));
        let ba = macro_accept_prob(&mm, b, a, k.log_density(&mm, b, a), k.log_density(&mm, a, b));
        if ab != 1.0 && ba != 1.0 {
            return Err(format!("neither direction accepted surely at ({a}, {b})"));
        }
        if l.abs() < 700.0 {
            worst = worst.max(((ab / ba).ln() - l).abs() / l.abs().max(1.0));
        }
    }
    if worst < 1e-9 {
        Ok(format!("{PAIRS} pairs, max relative deviation {worst:.1e}"))
    } else {
        Err(format!("max relative deviation {worst:.3e}"))
    }
}

fn micro_identity() -> Result<String, String> {
    let (eps, beta) = (1e-2, 1.0);
    let model = ThreeAtomModel::new(eps, beta).map_err(err)?;
    let fe = ThreeAtomFreeEnergy::A2;
    let mm = MacroModel::new(Arc::new(fe), ThreeAtomModel::domain(), beta);
    let recon = ThreeAtomReconstruction::widened(&model);
    let var = recon.variance();
    let gauss = |v: f64| -0.5 * (v - 1.0).powi(2) / var - 0.5 * (2.0 * PI * var).ln();
    let weight = |x: &MicroState| -> Result<f64, String> {
        let c = x.coords();
        let theta = c[2].atan2(c[1]);
        let v = model.potential(c).map_err(err)?;
        Ok(-beta * v + beta * fe.value(theta) - gauss(c[0]) - gauss(c[1].hypot(c[2])))
    };
    let mut rng = RngStream::new(9002, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..PAIRS {
        let a = MicroState::new(recon.sample(0.2 + 2.7 * rng.uniform(), &mut rng)).map_err(err)?;
        let b = MicroState::new(recon.sample(0.2 + 2.7 * rng.uniform(), &mut rng)).map_err(err)?;
        let ab = micro_accept_prob(&model, &mm, &recon, &a, &b).map_err(err)?.alpha;
        let ba = micro_accept_prob(&model, &mm, &recon, &b, &a).map_err(err)?.alpha;
        if ab != 1.0 && ba != 1.0 {
            return Err("neither direction accepted surely".into());
        }
        let l = weight(&b)? - weight(&a)?;
        if l.abs() < 700.0 {
            worst = worst.max(((ab / ba).ln() - l).abs() / l.abs().max(1.0));
        }
    }
    if worst < 1e-9 {
        Ok(format!("{PAIRS} pairs, max relative deviation {worst:.1e}"))
    } else {
        Err(format!("max relative deviation {worst:.3e}"))
    }
}

fn gradients() -> Result<String, String> {
    let mut rng = RngStream::new(9003, 0);
    let mut worst: f64 = 0.0;
    let three = ThreeAtomModel::new(1e-4, 1.0).map_err(err)?;
    for _ in 0..500 {
        let x = ThreeAtomModel::from_internal(
            1.0 + 0.03 * rng.standard_normal(),
            1.0 + 0.03 * rng.standard_normal(),
            0.1 + (PI - 0.2) * rng.uniform(),
        );
        worst = worst.max(gradient_check(&three, &MicroState::new(x).map_err(err)?, 1e-6));
    }
    let butane = ButaneModel::new(1e-2).map_err(err)?;
    for _ in 0..500 {
        let mut x = butane.equilibrium(-PI + 2.0 * PI * rng.uniform());
        for v in x[..5].iter_mut() {
            *v += 0.01 * rng.standard_normal();
        }
        worst = worst.max(gradient_check(&butane, &MicroState::new(x).map_err(err)?, 1e-6));
    }
    let toy = ToyModel::new(1e-3, 1.0).map_err(err)?;
    for _ in 0..500 {
        let x1 = -2.0 + 4.0 * rng.uniform();
        let x = vec![x1, x1 + 0.05 * rng.standard_normal()];
        worst = worst.max(gradient_check(&toy, &MicroState::new(x).map_err(err)?, 1e-6));
    }
    if worst < 1e-5 {
        Ok(format!("1500 states on 3 models, max relative error {worst:.1e}"))
    } else {
        Err(format!("max relative error {worst:.3e}"))
    }
}

fn toy_stationarity() -> Result<String, String> {
    let beta = 1.0;
    let model = ToyModel::new(1e-2, beta).map_err(err)?;
    let mm = MacroModel::new(Arc::new(ToyFreeEnergy), ToyModel::domain(), beta);
    let k = MacroProposalKernel::new(ProposalKind::Langevin, 0.05).map_err(err)?;
    // Doubled reconstruction variance: the fine-level correction is active.
    let recon = ToyReconstruction::with_variance(2e-2).map_err(err)?;
    let step = MicroMacro::new(&model, &mm, &k, &recon);
    let mut rng = RngStream::new(9004, 0);
    let x0 = MicroState::new(ToyModel::initial_state()).map_err(err)?;
    let trace = run_chain(&step, x0, 1_000_000, |x| x.coords()[0], &mut rng, ChainOptions::default())
        .map_err(err)?;
    let (lo, hi) = (ToyModel::domain().lo, ToyModel::domain().hi);
    let h = histogram(&trace.observables(), 50, lo, hi).map_err(err)?;
    let exact = density_bin_masses(|u| -beta * toy_free_energy(u).0, 50, lo, hi, 16).map_err(err)?;
    let tv = tv_distance(&h.masses, &exact).map_err(err)?;
    if tv < 0.03 {
        Ok(format!("TV {tv:.4} over 10^6 steps"))
    } else {
        Err(format!("TV {tv:.4} >= 0.03"))
    }
}

fn kcorr_ar1() -> Result<String, String> {
    let mut rng = RngStream::new(9005, 0);
    let rho = 0.5;
    let mut x = rng.standard_normal() / (1.0f64 - rho * rho).sqrt();
    let series: Vec<f64> = (0..1_000_000)
        .map(|_| {
            x = rho * x + rng.standard_normal();
            x
        })
        .collect();
    let k = estimate_kcorr(&series).map_err(err)?;
    if (k - 3.0).abs() < 0.15 {
        Ok(format!("K_corr {k:.4} (expected 3)"))
    } else {
        Err(format!("K_corr {k:.4}, expected 3 ± 0.15"))
    }
}

fn quadrature_free_energies() -> Result<String, String> {
    let three = ThreeAtomModel::new(1e-4, 1.0).map_err(err)?;
    let spec = QuadratureSpec::default();
    let reference = free_energy_quadrature(&three, FRAC_PI_2 - WELL_OFFSET, &spec).map_err(err)?;
    let mut worst_three: f64 = 0.0;
    for i in 0..200 {
        let z = 0.05 + (PI - 0.1) * i as f64 / 199.0;
        let a = free_energy_quadrature(&three, z, &spec).map_err(err)? - reference;
        worst_three = worst_three.max((a - ThreeAtomFreeEnergy::A1.value(z)).abs());
    }
    let butane = ButaneModel::new(1e-2).map_err(err)?;
    let spec = QuadratureSpec::with_nodes(8);
    let reference = free_energy_quadrature(&butane, 0.0, &spec).map_err(err)?;
    let t0 = butane.params().torsion_energy(0.0).0;
    let mut worst_butane: f64 = 0.0;
    for i in 0..60 {
        let phi = -PI + 2.0 * PI * (i as f64 + 0.5) / 60.0;
        let a = free_energy_quadrature(&butane, phi, &spec).map_err(err)? - reference;
        worst_butane = worst_butane.max((a - (butane.params().torsion_energy(phi).0 - t0)).abs());
    }
    let detail = format!("three-atom {worst_three:.1e}, butane {worst_butane:.1e}");
    if worst_three < 1e-6 && worst_butane < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn interpolation_nodes() -> Result<String, String> {
    let grid = uniform_grid(ThreeAtomModel::domain(), 64);
    let b: Vec<f64> = grid.iter().map(|z| z.sin()).collect();
    let s: Vec<f64> = grid.iter().map(|z| 1.0 + z * z).collect();
    let a: Vec<f64> = grid.iter().map(|&z| ThreeAtomFreeEnergy::A1.value(z)).collect();
    let table = CoefficientTable::new(grid.clone(), b.clone(), s.clone(), a.clone()).map_err(err)?;
    for (k, &z) in grid.iter().enumerate() {
        let c = table.interpolate(z).map_err(err)?;
        if c.b != b[k] || c.sigma2 != s[k] || c.a != a[k] {
            return Err(format!("node {k} not reproduced exactly"));
        }
    }
    Ok(format!("{} nodes reproduced bit-exactly", grid.len()))
}

fn exact_reconstruction() -> Result<String, String> {
    let model = ThreeAtomModel::new(1e-6, 1.0).map_err(err)?;
    let mm = MacroModel::new(Arc::new(ThreeAtomFreeEnergy::A1), ThreeAtomModel::domain(), 1.0);
    let k = MacroProposalKernel::new(ProposalKind::Langevin, 0.01).map_err(err)?;
    let recon = ThreeAtomReconstruction::exact(&model);
    let step = MicroMacro::new(&model, &mm, &k, &recon);
    let mut rng = RngStream::new(9006, 0);
    let x0 = MicroState::new(ThreeAtomModel::initial_state()).map_err(err)?;
    let t = run_chain(&step, x0, 100_000, |_| 0.0, &mut rng, ChainOptions::summary_only()).map_err(err)?;
    let dev = 1.0 - t.alpha_f_min.unwrap_or(0.0);
    if dev < 1e-10 {
        Ok(format!("{} fine proposals, max |α_F - 1| = {dev:.1e}", t.micro_proposed))
    } else {
        Err(format!("max |α_F - 1| = {dev:.3e}"))
    }
}

/// Runs every check; never panics.
pub fn run_all() -> Vec<Check> {
    vec![
        check("macro MH ratio identity", macro_identity),
        check("micro MH ratio identity", micro_identity),
        check("gradient checks", gradients),
        check("toy stationarity", toy_stationarity),
        check("K_corr AR(1) oracle", kcorr_ar1),
        check("quadrature free energies", quadrature_free_energies),
        check("interpolation node exactness", interpolation_nodes),
        check("exact reconstruction", exact_reconstruction),
    ]
}
