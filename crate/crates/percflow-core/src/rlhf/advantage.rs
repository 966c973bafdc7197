//! Group-relative advantages: rewards standardized within each rollout group.

use crate::error::{Error, Result};

/// Below this population std the whole group is treated as degenerate and
/// all advantages are zero (no division blow-up).
pub const STD_FLOOR: f64 = 1e-4;

/// `(R − mean)/std` with the population std and the degenerate-group floor.
pub fn group_advantage(rewards: &[f64]) -> Result<Vec<f64>> {
    let k = rewards.len();
    if k < 2 {
        return Err(Error::GroupTooSmall { need: 2, got: k });
    }
    let mean = rewards.iter().sum::<f64>() / k as f64;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / k as f64;
    let std = var.sqrt();
    if std < STD_FLOOR {
        return Ok(vec![0.0; k]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}
