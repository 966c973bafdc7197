//! Reverse-time Gaussian transitions and their entropy.
//!
//! Each step draws `x_out = μ + sqrt(σ²Δt)·ε` with `ε ~ N(0, I)`, so the
//! transition log-density is
//!
//! ```text
//! log p = −‖x_out − μ‖² / (2σ²Δt) + C,   C = −(d/2)·log(2πσ²Δt)
//! ```
//!
//! and the per-step differential entropy is `d/2 − C` — a function of the
//! schedule and the dimension only, never of the model parameters.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::model::{posterior_mean, CondId, VelocityModel};
use crate::flow::schedule::NoiseSchedule;

/// Any coordinate beyond this magnitude is treated as a diverged rollout.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One reverse step of a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionStep {
    pub step_index: usize,
    pub time: f64,
    pub state_in: Vec<f64>,
    pub mean: Vec<f64>,
    pub state_out: Vec<f64>,
    pub noise: Vec<f64>,
    pub log_prob: f64,
    pub sigma2_dt: f64,
}

/// The θ-free constant term `C = −(d/2)·log(2πσ²Δt)` of the log-density.
pub fn logprob_constant(d: usize, sigma2_dt: f64) -> f64 {
    -(d as f64 / 2.0) * (TWO_PI * sigma2_dt).ln()
}

/// Exact Gaussian transition log-density with isotropic covariance `σ²Δt·I`.
pub fn transition_logprob(x_out: &[f64], mu: &[f64], sigma2_dt: f64) -> Result<f64> {
    if x_out.len() != mu.len() {
        return Err(Error::ShapeMismatch {
            context: "transition_logprob",
            expected: mu.len(),
            got: x_out.len(),
        });
    }
    if !(sigma2_dt > 0.0) {
        return Err(Error::Schedule(format!(
            "transition covariance must be positive, got {sigma2_dt}"
        )));
    }
    let sq: f64 = x_out
        .iter()
        .zip(mu)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(-sq / (2.0 * sigma2_dt) + logprob_constant(x_out.len(), sigma2_dt))
}

/// Closed-form per-step entropy `d/2 + (d/2)·log(2πσ²Δt)`; parameter-free.
pub fn analytic_step_entropy(d: usize, sigma2_dt: f64) -> f64 {
    debug_assert!(sigma2_dt > 0.0);
    d as f64 / 2.0 - logprob_constant(d, sigma2_dt)
}

/// Joint trajectory entropy: standard-normal prior plus the per-step sum.
pub fn joint_entropy(sch: &NoiseSchedule, d: usize) -> f64 {
    let prior = (d as f64 / 2.0) * (1.0 + TWO_PI.ln());
    let steps: f64 = (1..=sch.num_steps())
        .map(|i| analytic_step_entropy(d, sch.sigma2_dt(i).expect("valid step")))
        .sum();
    prior + steps
}

pub(crate) fn standard_normal_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_finite(v: &[f64], step: usize) -> Result<()> {
    if v.iter().any(|x| !x.is_finite() || x.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::Divergence {
            step,
            limit: DIVERGENCE_LIMIT,
        });
    }
    Ok(())
}

/// Draw one reverse step `i` from state `x_t`.
pub fn sample_transition<R: Rng + ?Sized>(
    model: &VelocityModel,
    x_t: &[f64],
    i: usize,
    sch: &NoiseSchedule,
    c: CondId,
    rng: &mut R,
) -> Result<TransitionStep> {
    let s = sch.time(i);
    let dt = sch.dt(i);
    let sigma2_dt = sch.sigma2_dt(i)?;
    let sigma2 = sch.sigma().sigma2(s);
    let mean = posterior_mean(model, x_t, s, dt, sigma2, c)?;
    check_finite(&mean, i)?;
    let noise = standard_normal_vec(x_t.len(), rng);
    let scale = sigma2_dt.sqrt();
    let state_out: Vec<f64> = mean.iter().zip(&noise).map(|(&m, &e)| m + scale * e).collect();
    let log_prob = transition_logprob(&state_out, &mean, sigma2_dt)?;
    Ok(TransitionStep {
        step_index: i,
        time: s,
        state_in: x_t.to_vec(),
        mean,
        state_out,
        noise,
        log_prob,
        sigma2_dt,
    })
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct EntropyEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl EntropyEstimate {
    /// z-score of the estimate against a reference value.
    pub fn z_against(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.std_err
    }

    /// z-score of the difference between two independent estimates.
    pub fn z_between(&self, other: &EntropyEstimate) -> f64 {
        let se = (self.std_err * self.std_err + other.std_err * other.std_err).sqrt();
        (self.mean - other.mean) / se
    }
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> EntropyEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n.saturating_sub(1)) as f64;
    EntropyEstimate {
        mean,
        std_err: (var / n as f64).sqrt(),
        n,
    }
}

/// Monte-Carlo per-step entropy: average of `−log p` over `n` fresh rollouts
/// down to step `i`.
pub fn mc_step_entropy<R: Rng + ?Sized>(
    model: &VelocityModel,
    sch: &NoiseSchedule,
    c: CondId,
    i: usize,
    n: usize,
    rng: &mut R,
) -> Result<EntropyEstimate> {
    if n < 100 {
        return Err(Error::TooFewSamples { need: 100, got: n });
    }
    if i == 0 || i > sch.num_steps() {
        return Err(Error::Schedule(format!("step index {i} out of range")));
    }
    let d = model.sample_dim();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = standard_normal_vec(d, rng);
        for j in ((i + 1)..=sch.num_steps()).rev() {
            x = sample_transition(model, &x, j, sch, c, rng)?.state_out;
        }
        let step = sample_transition(model, &x, i, sch, c, rng)?;
        samples.push(-step.log_prob);
    }
    Ok(mean_and_stderr(&samples))
}
