//! Probability ratio and the clipped proximal surrogate.

pub const RATIO_CLAMP_MIN: f64 = 1e-6;
pub const RATIO_CLAMP_MAX: f64 = 1e6;

/// `exp(new_logp − old_logp)` clamped to `[1e-6, 1e6]`.
///
/// The returned flag is true when the clamp fired; callers keep a warning
/// counter. Both log-probs must be finite.
pub fn ratio(new_logp: f64, old_logp: f64) -> (f64, bool) {
    assert!(
        new_logp.is_finite() && old_logp.is_finite(),
        "ratio requires finite log-probs"
    );
    let raw = (new_logp - old_logp).exp();
    if raw < RATIO_CLAMP_MIN {
        (RATIO_CLAMP_MIN, true)
    } else if raw > RATIO_CLAMP_MAX {
        (RATIO_CLAMP_MAX, true)
    } else {
        (raw, false)
    }
}

/// Pessimistic clipped term `min(ρA, clip(ρ, 1−ε_low, 1+ε_high)·A)`.
///
/// The flag is true when the clip branch is both selected and binding —
/// exactly the transitions that contribute no gradient.
pub fn clipped_surrogate(rho: f64, adv: f64, eps_low: f64, eps_high: f64) -> (f64, bool) {
    debug_assert!(eps_low > 0.0 && eps_low < 1.0 && eps_high > 0.0 && eps_high < 1.0);
    let clipped_rho = rho.clamp(1.0 - eps_low, 1.0 + eps_high);
    let plain = rho * adv;
    let clipped = clipped_rho * adv;
    if clipped < plain {
        (clipped, clipped_rho != rho)
    } else {
        (plain, false)
    }
}
