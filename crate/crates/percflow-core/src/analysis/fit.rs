//! The empirical entropy-reward relationship `R = −a·exp(H) + b`, fitted
//! by ordinary least squares on the transformed regressor `exp(H)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Least-squares fit of reward on `exp(entropy)`.
///
/// `points` are `(H, R)` pairs. A constant reward gives `a = 0, b = R,
/// r² = 0` by convention; a constant entropy column is a degenerate
/// regressor and is rejected.
pub fn entropy_reward_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewSamples { need: 3, got: n });
    }
    let u: Vec<f64> = points.iter().map(|&(h, _)| h.exp()).collect();
    let r: Vec<f64> = points.iter().map(|&(_, rr)| rr).collect();
    let u_mean = u.iter().sum::<f64>() / n as f64;
    let r_mean = r.iter().sum::<f64>() / n as f64;
    let s_uu: f64 = u.iter().map(|v| (v - u_mean) * (v - u_mean)).sum();
    // Spread below rounding noise counts as no spread at all.
    let degenerate_floor = (f64::EPSILON * u_mean.abs().max(1.0)).powi(2) * n as f64;
    if s_uu <= degenerate_floor || !s_uu.is_finite() {
        return Err(Error::DegenerateRegressor);
    }
    let s_ur: f64 = u
        .iter()
        .zip(&r)
        .map(|(&uv, &rv)| (uv - u_mean) * (rv - r_mean))
        .sum();
    let slope = s_ur / s_uu;
    let intercept = r_mean - slope * u_mean;
    let ss_res: f64 = u
        .iter()
        .zip(&r)
        .map(|(&uv, &rv)| {
            let pred = slope * uv + intercept;
            (rv - pred) * (rv - pred)
        })
        .sum();
    let ss_tot: f64 = r.iter().map(|&rv| (rv - r_mean) * (rv - r_mean)).sum();
    let r_squared = if ss_tot <= f64::EPSILON {
        0.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        a: -slope,
        b: intercept,
        r_squared,
        n_points: n,
    })
}
