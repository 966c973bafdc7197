//! Conditional-variance reading of the per-step entropy: the entropy equals
//! `E[Var(x_{t−1}|x_t)]/(2σ²Δt) − C`, and since the conditional variance of
//! the Gaussian transition is exactly `d·σ²Δt`, both sides reduce to
//! `d/2 − C` for every parameter vector.

use rand::Rng;

use crate::error::{Error, Result};
use crate::flow::{
    analytic_step_entropy, logprob_constant, mc_step_entropy, mean_and_stderr, sample_transition,
    standard_normal_vec, CondId, EntropyEstimate, NoiseSchedule, VelocityModel,
};

#[derive(Debug, Clone)]
pub struct VarianceLemmaReport {
    /// Direct Monte-Carlo entropy (−E[log p]).
    pub entropy_from_formula: EntropyEstimate,
    /// Entropy reconstructed from the conditional variance.
    pub entropy_from_variance: EntropyEstimate,
    /// The schedule-only closed form d/2 − C.
    pub analytic: f64,
}

impl VarianceLemmaReport {
    /// Largest |z| of the two estimates against the closed form.
    pub fn worst_z(&self) -> f64 {
        self.entropy_from_formula
            .z_against(self.analytic)
            .abs()
            .max(self.entropy_from_variance.z_against(self.analytic).abs())
    }
}

/// Estimate both sides at step `i` with a total budget of `n` transitions
/// per side.
pub fn variance_lemma_check<R: Rng + ?Sized>(
    model: &VelocityModel,
    sch: &NoiseSchedule,
    c: CondId,
    i: usize,
    n: usize,
    rng: &mut R,
) -> Result<VarianceLemmaReport> {
    if n < 10_000 {
        return Err(Error::TooFewSamples { need: 10_000, got: n });
    }
    let d = model.sample_dim();
    let sigma2_dt = sch.sigma2_dt(i)?;
    let entropy_from_formula = mc_step_entropy(model, sch, c, i, n, rng)?;

    // Variance side: resample the step from fresh fixed states.
    let resamples = 100;
    let states = n / resamples;
    let mut values = Vec::with_capacity(states);
    let constant = logprob_constant(d, sigma2_dt);
    for _ in 0..states {
        let mut x = standard_normal_vec(d, rng);
        for j in ((i + 1)..=sch.num_steps()).rev() {
            x = sample_transition(model, &x, j, sch, c, rng)?.state_out;
        }
        let draws: Vec<Vec<f64>> = (0..resamples)
            .map(|_| sample_transition(model, &x, i, sch, c, rng).map(|s| s.state_out))
            .collect::<Result<_>>()?;
        let mut mean = vec![0.0; d];
        for z in &draws {
            for (m, &v) in mean.iter_mut().zip(z) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= resamples as f64;
        }
        let trace: f64 = draws
            .iter()
            .map(|z| {
                z.iter()
                    .zip(&mean)
                    .map(|(&v, &m)| (v - m) * (v - m))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / (resamples - 1) as f64;
        values.push(trace / (2.0 * sigma2_dt) - constant);
    }
    let entropy_from_variance = mean_and_stderr(&values);

    Ok(VarianceLemmaReport {
        entropy_from_formula,
        entropy_from_variance,
        analytic: analytic_step_entropy(d, sigma2_dt),
    })
}
