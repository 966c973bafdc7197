//! Analytic reward landscapes over final samples, assigned per condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::CondId;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardKind {
    /// `exp(−‖x − center‖²/scale²)`, in (0, 1].
    Peak { center: Vec<f64>, scale: f64 },
    /// Max of two equal peaks.
    TwinPeaks { c1: Vec<f64>, c2: Vec<f64>, scale: f64 },
    /// `w · x`.
    Linear { w: Vec<f64> },
}

impl RewardKind {
    fn eval(&self, x0: &[f64]) -> f64 {
        match self {
            RewardKind::Peak { center, scale } => peak(x0, center, *scale),
            RewardKind::TwinPeaks { c1, c2, scale } => {
                peak(x0, c1, *scale).max(peak(x0, c2, *scale))
            }
            RewardKind::Linear { w } => w.iter().zip(x0).map(|(&a, &b)| a * b).sum(),
        }
    }
}

fn peak(x: &[f64], center: &[f64], scale: f64) -> f64 {
    let d2: f64 = x
        .iter()
        .zip(center)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    (-d2 / (scale * scale)).exp()
}

/// Per-condition reward assignment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardLandscape {
    per_condition: Vec<RewardKind>,
}

impl RewardLandscape {
    pub fn new(per_condition: Vec<RewardKind>) -> Result<Self> {
        if per_condition.is_empty() {
            return Err(Error::EmptyInput("reward landscape"));
        }
        Ok(RewardLandscape { per_condition })
    }

    pub fn n_conditions(&self) -> usize {
        self.per_condition.len()
    }

    /// Deterministic reward of a final sample under condition `c`.
    pub fn compute_reward(&self, x0: &[f64], c: CondId) -> Result<f64> {
        let kind = self
            .per_condition
            .get(c.0)
            .ok_or(Error::MissingLandscape(c.0))?;
        Ok(kind.eval(x0))
    }
}
