//! Numerical check of the mode-seeking gradient identity.
//!
//! For one Gaussian step `p_μ = N(μ, σ²)` and a linear advantage
//! `A(x) = γ·x`, the advantage-tilted target is `p_A = N(μ_old + σ²γ, σ²)`
//! in closed form, and the gradient of
//! `−KL(p_μ‖p_A) + KL(p_μ‖p_old)` at `μ = μ_old` is `(μ_A − μ_old)/σ² = γ`
//! — independent of σ. The REINFORCE estimator
//! `E[A(x)·∇_μ log p_μ(x)]` sampled at `μ_old` must agree.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One analytic configuration of the single-step 1-D check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Corollary1Config {
    /// Slope of the linear advantage A(x) = γ·x.
    pub gamma: f64,
    /// Standard deviation of the Gaussian step.
    pub sigma: f64,
    /// Mean of the old policy.
    pub mu_old: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientCheckReport {
    /// Monte-Carlo REINFORCE gradient at μ = μ_old.
    pub reinforce_grad: f64,
    /// Closed-form gradient of the KL difference (equals γ).
    pub kl_identity_grad: f64,
    pub cosine: f64,
    pub rel_err: f64,
    /// Standard error of the Monte-Carlo estimate.
    pub std_err: f64,
    pub n_samples: usize,
}

pub fn corollary1_gradient_check<R: Rng + ?Sized>(
    cfg: &Corollary1Config,
    rng: &mut R,
) -> Result<GradientCheckReport> {
    if cfg.n_samples < 100_000 {
        return Err(Error::TooFewSamples {
            need: 100_000,
            got: cfg.n_samples,
        });
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::InvalidParameter("sigma must be positive".into()));
    }
    let n = cfg.n_samples;
    let inv_var = 1.0 / (cfg.sigma * cfg.sigma);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n {
        let eps: f64 = rng.sample(StandardNormal);
        let x = cfg.mu_old + cfg.sigma * eps;
        // ∇_μ log N(x; μ, σ²) at μ = μ_old is (x − μ_old)/σ².
        let term = cfg.gamma * x * (x - cfg.mu_old) * inv_var;
        sum += term;
        sumsq += term * term;
    }
    let reinforce = sum / n as f64;
    let var = (sumsq / n as f64 - reinforce * reinforce).max(0.0);
    let std_err = (var / n as f64).sqrt();

    let analytic = cfg.gamma; // (μ_A − μ_old)/σ² with μ_A = μ_old + σ²γ.
    let cosine = if reinforce == 0.0 && analytic == 0.0 {
        1.0
    } else if reinforce.abs() < f64::MIN_POSITIVE || analytic.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        (reinforce * analytic).signum()
    };
    let rel_err = if analytic == 0.0 {
        reinforce.abs()
    } else {
        (reinforce - analytic).abs() / analytic.abs()
    };
    Ok(GradientCheckReport {
        reinforce_grad: reinforce,
        kl_identity_grad: analytic,
        cosine,
        rel_err,
        std_err,
        n_samples: n,
    })
}

/// The three reference configurations used by the check suite.
pub fn corollary1_reference_configs(n_samples: usize) -> [Corollary1Config; 3] {
    [
        Corollary1Config { gamma: 0.5, sigma: 1.0, mu_old: 0.0, n_samples },
        Corollary1Config { gamma: 0.0, sigma: 1.0, mu_old: 0.5, n_samples },
        Corollary1Config { gamma: 0.25, sigma: 2.0, mu_old: 1.0, n_samples },
    ]
}
