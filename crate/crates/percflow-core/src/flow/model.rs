//! The velocity-field model and the posterior transition mean it induces.
//!
//! The network sees `[x, time features, one-hot condition]` and predicts a
//! velocity `v` of the sample dimension. The reverse-step mean combines the
//! velocity with the score-correction drift
//!
//! ```text
//! μ = x − Δt·[ v + (σ²/(2s))·(x + (1−s)·v) ]
//! ```
//!
//! evaluated along the descending grid, so the deterministic part is the
//! probability-flow contraction and the noise term restores the marginals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Activation, ForwardCache, GradBundle, Mlp};

/// Index into the condition vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CondId(pub usize);

/// Velocity field `v(x, s, c)` backed by an [`Mlp`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VelocityModel {
    net: Mlp,
    sample_dim: usize,
    n_conditions: usize,
    time_freqs: usize,
}

/// Everything needed to push a gradient at the transition mean back onto
/// the network parameters.
pub struct MeanCache {
    cache: ForwardCache,
    /// dμ/dv is this scalar times the identity.
    pub v_coeff: f64,
}

impl VelocityModel {
    pub const DEFAULT_TIME_FREQS: usize = 4;

    /// Fresh model with hidden layers `hidden` (default [64, 64] upstream).
    pub fn new<R: Rng + ?Sized>(
        sample_dim: usize,
        n_conditions: usize,
        hidden: &[usize],
        activation: Activation,
        time_freqs: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if sample_dim == 0 || n_conditions == 0 {
            return Err(Error::InvalidParameter(
                "sample_dim and n_conditions must be positive".into(),
            ));
        }
        let in_dim = sample_dim + 1 + 2 * time_freqs + n_conditions;
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(in_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(sample_dim);
        let net = Mlp::new(&sizes, activation, rng)?;
        Ok(VelocityModel {
            net,
            sample_dim,
            n_conditions,
            time_freqs,
        })
    }

    pub fn sample_dim(&self) -> usize {
        self.sample_dim
    }

    pub fn n_conditions(&self) -> usize {
        self.n_conditions
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    /// `[x, s, sin/cos features, one-hot c]`.
    fn embed(&self, x: &[f64], s: f64, c: CondId) -> Result<Vec<f64>> {
        if x.len() != self.sample_dim {
            return Err(Error::ShapeMismatch {
                context: "velocity input",
                expected: self.sample_dim,
                got: x.len(),
            });
        }
        if c.0 >= self.n_conditions {
            return Err(Error::UnknownCondition(c.0));
        }
        let mut inp = Vec::with_capacity(self.net.input_dim());
        inp.extend_from_slice(x);
        inp.push(s);
        for k in 0..self.time_freqs {
            let angle = s * std::f64::consts::PI * (1 << k) as f64;
            inp.push(angle.sin());
            inp.push(angle.cos());
        }
        for j in 0..self.n_conditions {
            inp.push(if j == c.0 { 1.0 } else { 0.0 });
        }
        Ok(inp)
    }

    /// Velocity prediction, inference only.
    pub fn velocity(&self, x: &[f64], s: f64, c: CondId) -> Result<Vec<f64>> {
        self.net.infer(&self.embed(x, s, c)?)
    }

    /// Velocity prediction plus the activation record for backprop.
    pub fn velocity_with_cache(&self, x: &[f64], s: f64, c: CondId) -> Result<(Vec<f64>, ForwardCache)> {
        self.net.forward(&self.embed(x, s, c)?)
    }

    /// Backprop a gradient at the velocity output onto the parameters.
    pub fn backward(&self, cache: &ForwardCache, v_grad: &[f64]) -> Result<GradBundle> {
        self.net.backward(cache, v_grad)
    }

    /// Write the parameter dump (JSON with shape manifest) to a file.
    pub fn save_json(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Load a parameter dump written by [`VelocityModel::save_json`].
    pub fn load_json(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// Drift coefficients of the reverse step at time `s`:
/// `μ = x_coeff·x + v_coeff·v`.
fn drift_coeffs(s: f64, dt: f64, sigma2: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Schedule(format!("time {s} outside (0,1)")));
    }
    if !(dt > 0.0) {
        return Err(Error::Schedule(format!("step width {dt} must be positive")));
    }
    let half_ratio = sigma2 / (2.0 * s);
    let x_coeff = 1.0 - dt * half_ratio;
    let v_coeff = -dt * (1.0 + half_ratio * (1.0 - s));
    Ok((x_coeff, v_coeff))
}

/// Transition mean `μ(x, s, c)` of the reverse Gaussian step.
pub fn posterior_mean(
    model: &VelocityModel,
    x: &[f64],
    s: f64,
    dt: f64,
    sigma2: f64,
    c: CondId,
) -> Result<Vec<f64>> {
    let (xc, vc) = drift_coeffs(s, dt, sigma2)?;
    let v = model.velocity(x, s, c)?;
    Ok(x.iter().zip(&v).map(|(&xi, &vi)| xc * xi + vc * vi).collect())
}

/// Transition mean plus the record needed to backprop `d loss / d μ`
/// onto the model parameters.
pub fn posterior_mean_with_cache(
    model: &VelocityModel,
    x: &[f64],
    s: f64,
    dt: f64,
    sigma2: f64,
    c: CondId,
) -> Result<(Vec<f64>, MeanCache)> {
    let (xc, vc) = drift_coeffs(s, dt, sigma2)?;
    let (v, cache) = model.velocity_with_cache(x, s, c)?;
    let mu = x.iter().zip(&v).map(|(&xi, &vi)| xc * xi + vc * vi).collect();
    Ok((mu, MeanCache { cache, v_coeff: vc }))
}

/// Parameter gradients of a scalar loss whose gradient at the mean is `mu_grad`.
pub fn posterior_mean_backward(
    model: &VelocityModel,
    mean_cache: &MeanCache,
    mu_grad: &[f64],
) -> Result<GradBundle> {
    let v_grad: Vec<f64> = mu_grad.iter().map(|&g| g * mean_cache.v_coeff).collect();
    model.backward(&mean_cache.cache, &v_grad)
}
