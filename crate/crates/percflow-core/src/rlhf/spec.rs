//! The regularizer family: a tagged choice with hyperparameters, plus the
//! shared clip width of the base surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which space an entropy bonus lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropySpace {
    /// Native per-step transition entropy — constant in θ, so the bonus
    /// moves no gradient (that futility is asserted by tests).
    Generation,
    /// Perceptual entropy, differentiated through the frozen map at the
    /// current-policy mean.
    Perceptual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularizerKind {
    None,
    /// KL to the frozen pretraining reference, weight β (default 0.001).
    KlRef { weight: f64 },
    /// Entropy bonus with weight (default 0.05).
    EntropyReg { space: EntropySpace, weight: f64 },
    /// Asymmetric surrogate clipping (default high = low + 0.1).
    ClipHigher { eps_low: f64, eps_high: f64 },
    /// Detach the top `rate` covariance-ranked transitions (default 0.25).
    ClipCov { rate: f64 },
    /// Reverse-KL penalty on the top `rate` covariance-ranked transitions.
    KlCov { rate: f64, beta: f64 },
    /// Perceptual-entropy reward shaping, λ ∈ {0.03, 0.05, 0.10}.
    Pec { lambda: f64 },
    /// Perceptual-vs-generation log-ratio reward shaping.
    Pcvae { lambda: f64 },
}

/// Valid regularizer tags, for error messages and CLI listings.
pub const REGULARIZER_TAGS: [&str; 8] = [
    "none",
    "kl_ref",
    "entropy_reg",
    "clip_higher",
    "clip_cov",
    "kl_cov",
    "pec",
    "pcvae",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    /// Base clip width ε of the surrogate.
    pub clip_eps: f64,
}

impl RegularizerSpec {
    pub const DEFAULT_CLIP_EPS: f64 = 0.2;

    pub fn none() -> Self {
        RegularizerSpec {
            kind: RegularizerKind::None,
            clip_eps: Self::DEFAULT_CLIP_EPS,
        }
    }

    pub fn with_kind(kind: RegularizerKind) -> Self {
        RegularizerSpec {
            kind,
            clip_eps: Self::DEFAULT_CLIP_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "clip_eps must be in (0,1), got {}",
                self.clip_eps
            )));
        }
        match self.kind {
            RegularizerKind::None => Ok(()),
            RegularizerKind::KlRef { weight } => require_nonneg(weight, "kl_ref weight"),
            RegularizerKind::EntropyReg { weight, .. } => {
                require_nonneg(weight, "entropy_reg weight")
            }
            RegularizerKind::ClipHigher { eps_low, eps_high } => {
                if eps_low > 0.0 && eps_low < 1.0 && eps_high > 0.0 && eps_high < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "clip_higher bounds must be in (0,1)".into(),
                    ))
                }
            }
            RegularizerKind::ClipCov { rate } => require_rate(rate, "clip_cov rate"),
            RegularizerKind::KlCov { rate, beta } => {
                require_rate(rate, "kl_cov rate")?;
                require_nonneg(beta, "kl_cov beta")
            }
            RegularizerKind::Pec { lambda } => require_nonneg(lambda, "pec lambda"),
            RegularizerKind::Pcvae { lambda } => require_nonneg(lambda, "pcvae lambda"),
        }
    }

    /// Effective `(ε_low, ε_high)` of the surrogate clip.
    pub fn clip_bounds(&self) -> (f64, f64) {
        match self.kind {
            RegularizerKind::ClipHigher { eps_low, eps_high } => (eps_low, eps_high),
            _ => (self.clip_eps, self.clip_eps),
        }
    }

    /// Short tag for logs and manifests.
    pub fn tag(&self) -> &'static str {
        match self.kind {
            RegularizerKind::None => "none",
            RegularizerKind::KlRef { .. } => "kl_ref",
            RegularizerKind::EntropyReg { .. } => "entropy_reg",
            RegularizerKind::ClipHigher { .. } => "clip_higher",
            RegularizerKind::ClipCov { .. } => "clip_cov",
            RegularizerKind::KlCov { .. } => "kl_cov",
            RegularizerKind::Pec { .. } => "pec",
            RegularizerKind::Pcvae { .. } => "pcvae",
        }
    }
}

fn require_nonneg(v: f64, what: &str) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be ≥ 0, got {v}")))
    }
}

fn require_rate(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be in (0,1), got {v}"
        )))
    }
}
