use rayon::prelude::*;

use super::quadrature::GaussLegendre;
use super::table::CoefficientTable;
use crate::error::{Error, Result};
use crate::model::LevelSetChart;

/// Tensor Gauss–Legendre rule on the level-set box `mean ± half_width_sd·sd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes_per_dim: usize,
    pub half_width_sd: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_dim: 64,
            half_width_sd: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(nodes_per_dim: usize) -> Self {
        Self {
            nodes_per_dim,
            ..Self::default()
        }
    }
}

/// Per-node data on one level set, shifted by the smallest potential seen.
struct LevelSetSamples {
    v_min: f64,
    /// `(quadrature weight · exp(-β (V - v_min)), chart point)`
    weights: Vec<f64>,
    points: Vec<Vec<f64>>,
}

fn sample_level_set<M: LevelSetChart + ?Sized>(
    model: &M,
    z: f64,
    rule: &GaussLegendre,
    spec: &QuadratureSpec,
    keep_points: bool,
) -> Result<LevelSetSamples> {
    let bounds = model.level_bounds(z, spec.half_width_sd);
    let beta = model.beta();
    let mut x = vec![0.0; model.dim()];
    let mut raw = Vec::with_capacity(rule.len().pow(bounds.len() as u32));
    let mut points = Vec::new();
    let mut failure = None;
    rule.for_each_tensor_node(&bounds, |p, w| {
        model.embed(z, p, &mut x);
        match model.potential(&x) {
            Ok(v) if v.is_finite() => {
                raw.push((w, v));
                if keep_points {
                    points.push(x.clone());
                }
            }
            _ => failure = Some(()),
        }
    });
    if failure.is_some() || raw.is_empty() {
        return Err(Error::Quadrature { z, bounds });
    }
    let v_min = raw.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let weights = raw
        .iter()
        .map(|&(w, v)| w * (-beta * (v - v_min)).exp())
        .collect();
    Ok(LevelSetSamples {
        v_min,
        weights,
        points,
    })
}

/// `A(z) = -β⁻¹ ln ∫_{Σ(z)} exp(-β V)` over the model's level-set chart.
///
/// The additive constant depends only on the chart and the rule, so
/// differences `A(z₁) - A(z₂)` are meaningful.
pub fn free_energy_quadrature<M: LevelSetChart + ?Sized>(
    model: &M,
    z: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let rule = GaussLegendre::new(spec.nodes_per_dim);
    free_energy_with_rule(model, z, &rule, spec)
}

fn free_energy_with_rule<M: LevelSetChart + ?Sized>(
    model: &M,
    z: f64,
    rule: &GaussLegendre,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let s = sample_level_set(model, z, rule, spec, false)?;
    let total: f64 = s.weights.iter().sum();
    let a = s.v_min - total.ln() / model.beta();
    if a.is_finite() {
        Ok(a)
    } else {
        Err(Error::Quadrature {
            z,
            bounds: model.level_bounds(z, spec.half_width_sd),
        })
    }
}

/// Drift `b(z) = E[-∇V·∇ξ + β⁻¹Δξ | ξ = z]`, squared diffusion
/// `σ²(z) = E[|∇ξ|² | ξ = z]` and free energy `A(z)` on every grid node.
///
/// Grid nodes are processed in parallel; the free energy column is shifted
/// so that its minimum is zero.
pub fn effective_coefficients<M: LevelSetChart + ?Sized>(
    model: &M,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<CoefficientTable> {
    let rule = GaussLegendre::new(spec.nodes_per_dim);
    let beta = model.beta();
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&z| -> Result<(f64, f64, f64)> {
            let s = sample_level_set(model, z, &rule, spec, true)?;
            let rc = model.reaction_coordinate();
            let d = model.dim();
            let mut grad_v = vec![0.0; d];
            let mut grad_xi = vec![0.0; d];
            let (mut total, mut drift, mut diff) = (0.0, 0.0, 0.0);
            for (w, x) in s.weights.iter().zip(&s.points) {
                model.gradient(x, &mut grad_v)?;
                rc.gradient(x, &mut grad_xi)?;
                let dot: f64 = grad_v.iter().zip(&grad_xi).map(|(a, b)| a * b).sum();
                let norm2: f64 = grad_xi.iter().map(|g| g * g).sum();
                let lap = rc.laplacian(x)?;
                total += w;
                drift += w * (-dot + lap / beta);
                diff += w * norm2;
            }
            let a = s.v_min - total.ln() / beta;
            let row = (drift / total, diff / total, a);
            if row.0.is_finite() && row.1.is_finite() && row.2.is_finite() {
                Ok(row)
            } else {
                Err(Error::Quadrature {
                    z,
                    bounds: model.level_bounds(z, spec.half_width_sd),
                })
            }
        })
        .collect::<Result<_>>()?;
    let a_min = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    CoefficientTable::new(
        grid.to_vec(),
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2 - a_min).collect(),
    )
}
