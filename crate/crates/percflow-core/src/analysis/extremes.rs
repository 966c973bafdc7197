//! Within-group advantage probabilities: the group softmax of advantages,
//! a sampled-group view of the advantage-tilted target distribution.

use crate::error::{Error, Result};

/// `(p_max, p_min)` of the normalized weights `exp(A_k)/Σ_j exp(A_j)`.
pub fn advantage_prob_extremes(advantages: &[f64]) -> Result<(f64, f64)> {
    let weights = advantage_probs(advantages)?;
    let p_max = weights.iter().cloned().fold(f64::MIN, f64::max);
    let p_min = weights.iter().cloned().fold(f64::MAX, f64::min);
    Ok((p_max, p_min))
}

/// Full normalized weight vector (sums to one).
pub fn advantage_probs(advantages: &[f64]) -> Result<Vec<f64>> {
    let k = advantages.len();
    if k < 2 {
        return Err(Error::GroupTooSmall { need: 2, got: k });
    }
    let m = advantages.iter().cloned().fold(f64::MIN, f64::max);
    let w: Vec<f64> = advantages.iter().map(|&a| (a - m).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}
