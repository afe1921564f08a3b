/// Lower clamp for log acceptance ratios; `exp(-745)` is the smallest
/// positive subnormal double.
pub const LOG_RATIO_FLOOR: f64 = -745.0;

/// `min{1, exp(log_ratio)}` evaluated without overflow. NaN maps to 0.
#[inline]
pub fn acceptance_from_log_ratio(log_ratio: f64) -> f64 {
    if log_ratio.is_nan() {
        return 0.0;
    }
    log_ratio.clamp(LOG_RATIO_FLOOR, 0.0).exp()
}
