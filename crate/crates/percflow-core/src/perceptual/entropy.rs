//! Perceptual probability and entropy.
//!
//! The perceptual score of a transition is a Gaussian evaluated on features:
//! `N(φ(x_out); φ(m), σ²Δt·I)` with `m` the old-policy transition mean and
//! the same covariance scale as the generation-space transition. This is a
//! feature-space scoring rule, not a change-of-variables density — the
//! Jacobian of φ is deliberately omitted, so values are comparable across
//! training steps but do not integrate to one over x.

use crate::error::{Error, Result};
use crate::flow::{mean_and_stderr, transition_logprob, EntropyEstimate, Trajectory};
use crate::perceptual::map::PerceptualMap;

/// Gaussian feature-space log-score with isotropic covariance `σ²Δt·I`.
///
/// With φ = identity this is exactly the transition log-density.
pub fn perceptual_logprob(z_out: &[f64], z_mean: &[f64], sigma2_dt: f64) -> Result<f64> {
    transition_logprob(z_out, z_mean, sigma2_dt)
}

/// Per-step perceptual log-scores of one (old-policy) trajectory.
pub fn per_step_perc_logps(traj: &Trajectory, map: &PerceptualMap) -> Result<Vec<f64>> {
    traj.steps
        .iter()
        .map(|s| {
            let z_out = map.apply(&s.state_out)?;
            let z_mean = map.apply(&s.mean)?;
            perceptual_logprob(&z_out, &z_mean, s.sigma2_dt)
        })
        .collect()
}

/// Perceptual entropy estimate: the average of `−log p_perc` over every
/// step of every rollout, with its pooled standard error.
///
/// Rollouts must carry their own policy's means (they do: transition means
/// are recorded at sampling time), which makes this the fixed-old-policy
/// estimator.
pub fn perceptual_entropy_estimate(
    rollouts: &[Trajectory],
    map: &PerceptualMap,
) -> Result<EntropyEstimate> {
    if rollouts.is_empty() {
        return Err(Error::EmptyInput("rollouts"));
    }
    let mut terms = Vec::with_capacity(rollouts.len() * rollouts[0].steps.len());
    for t in rollouts {
        for lp in per_step_perc_logps(t, map)? {
            terms.push(-lp);
        }
    }
    Ok(mean_and_stderr(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{
        analytic_step_entropy, logprob_constant, rollout, CondId, NoiseSchedule, VelocityModel,
    };
    use crate::numeric::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> VelocityModel {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        VelocityModel::new(2, 1, &[16], Activation::Tanh, 4, &mut rng).unwrap()
    }

    #[test]
    fn constant_term_only_at_equal_features() {
        // d_p = 2, σ²Δt = 0.01 → −log(2π·0.01).
        let lp = perceptual_logprob(&[1.0, 2.0], &[1.0, 2.0], 0.01).unwrap();
        assert!((lp - 2.76729).abs() < 1e-4);
    }

    #[test]
    fn identity_map_reduces_to_transition_logprob() {
        let m = model();
        let sch = NoiseSchedule::default_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = rollout(&m, &sch, CondId(0), &mut rng).unwrap();
        let map = PerceptualMap::identity(2);
        let perc = per_step_perc_logps(&t, &map).unwrap();
        for (lp, step) in perc.iter().zip(&t.steps) {
            assert_eq!(*lp, step.log_prob);
        }
    }

    #[test]
    fn linear_map_matches_hand_computation() {
        // P = [[1,0],[0,1]] scaled rows: use [[2,0],[0,1]] on a fixed transition.
        let map = PerceptualMap::linear("p", vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let x_out = [1.5, -0.5];
        let mu = [1.0, 0.0];
        let s2dt = 0.04;
        let z_out = map.apply(&x_out).unwrap();
        let z_mu = map.apply(&mu).unwrap();
        let lp = perceptual_logprob(&z_out, &z_mu, s2dt).unwrap();
        // ‖(3,−0.5) − (2,0)‖² = 1 + 0.25; C = −log(2π·0.04).
        let expect = -1.25 / (2.0 * 0.04) - (2.0 * std::f64::consts::PI * 0.04).ln();
        assert!((lp - expect).abs() < 1e-12);
    }

    #[test]
    fn collapsing_map_yields_minimum_entropy() {
        // P = 0 sends every feature to the origin: each term is exactly −C.
        let m = model();
        let sch = NoiseSchedule::default_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trajs: Vec<_> = (0..5)
            .map(|_| rollout(&m, &sch, CondId(0), &mut rng).unwrap())
            .collect();
        let map = PerceptualMap::linear("zero", vec![vec![0.0, 0.0]]).unwrap();
        let est = perceptual_entropy_estimate(&trajs, &map).unwrap();
        let expect: f64 = (1..=sch.num_steps())
            .map(|i| -logprob_constant(1, sch.sigma2_dt(i).unwrap()))
            .sum::<f64>()
            / sch.num_steps() as f64;
        assert!((est.mean - expect).abs() < 1e-12);
        // Per-step σ²Δt values agree only to the last ulp across the grid.
        assert!(est.std_err < 1e-12);
    }

    #[test]
    fn identity_estimate_matches_per_step_closed_form() {
        let m = model();
        let sch = NoiseSchedule::default_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trajs: Vec<_> = (0..2000)
            .map(|_| rollout(&m, &sch, CondId(0), &mut rng).unwrap())
            .collect();
        let est = perceptual_entropy_estimate(&trajs, &PerceptualMap::identity(2)).unwrap();
        let mean_analytic: f64 = (1..=sch.num_steps())
            .map(|i| analytic_step_entropy(2, sch.sigma2_dt(i).unwrap()))
            .sum::<f64>()
            / sch.num_steps() as f64;
        assert!(
            est.z_against(mean_analytic).abs() < 3.0,
            "z = {}",
            est.z_against(mean_analytic)
        );
    }
}
