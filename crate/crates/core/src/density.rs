use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::state::MicroState;

/// Unnormalised log Gibbs density `-β V(x)`; `Z_V` is never computed.
pub fn gibbs_log_density<M: SystemModel + ?Sized>(model: &M, x: &MicroState) -> Result<f64> {
    let v = match x.cached_potential() {
        Some(v) => v,
        None => model.potential(x.coords())?,
    };
    if !v.is_finite() {
        return Err(Error::NonFinitePotential { value: v });
    }
    Ok(-model.beta() * v)
}

/// Largest per-coordinate discrepancy between the analytic gradient and a
/// central difference with step `h·max(1, |x_i|)`, relative to
/// `max(1, |analytic|)`. Returns infinity if the potential is not finite
/// anywhere the stencil touches.
pub fn gradient_check<M: SystemModel + ?Sized>(model: &M, x: &MicroState, h: f64) -> f64 {
    let coords = x.coords();
    let mut grad = vec![0.0; coords.len()];
    if model.gradient(coords, &mut grad).is_err() {
        return f64::INFINITY;
    }
    let mut probe = coords.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..coords.len() {
        let step = h * coords[i].abs().max(1.0);
        probe[i] = coords[i] + step;
        let vp = model.potential(&probe);
        probe[i] = coords[i] - step;
        let vm = model.potential(&probe);
        probe[i] = coords[i];
        let (vp, vm) = match (vp, vm) {
            (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => (a, b),
            _ => return f64::INFINITY,
        };
        let fd = (vp - vm) / (2.0 * step);
        let err = (grad[i] - fd).abs() / grad[i].abs().max(1.0);
        if !err.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(err);
    }
    worst
}
