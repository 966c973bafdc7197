//! Reward shaping: fold perceptual terms into the scalar reward so that
//! task reward and diversity pressure are normalized together inside each
//! rollout group.

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::perceptual::entropy::per_step_perc_logps;
use crate::perceptual::map::PerceptualMap;

/// Shaped reward `R − λ·mean_t(log p_perc)`: penalizes trajectories whose
/// perceptual moves are too predictable.
pub fn pec_shaped_reward(raw: f64, perc_logps: &[f64], lambda: f64) -> Result<f64> {
    if perc_logps.is_empty() {
        return Err(Error::EmptyInput("per-step perceptual log-probs"));
    }
    let mean = perc_logps.iter().sum::<f64>() / perc_logps.len() as f64;
    Ok(raw - lambda * mean)
}

/// Shaped reward `R − λ·mean_t(log p_perc − log p_gen)`: anchors the
/// perceptual score to the generation-space transition density. Vanishes
/// identically when φ is the identity.
pub fn pcvae_shaped_reward(
    raw: f64,
    perc_logps: &[f64],
    gen_logps: &[f64],
    lambda: f64,
) -> Result<f64> {
    if perc_logps.len() != gen_logps.len() {
        return Err(Error::ShapeMismatch {
            context: "pcvae log-prob lists",
            expected: perc_logps.len(),
            got: gen_logps.len(),
        });
    }
    if perc_logps.is_empty() {
        return Err(Error::EmptyInput("per-step perceptual log-probs"));
    }
    let mean = perc_logps
        .iter()
        .zip(gen_logps)
        .map(|(p, g)| p - g)
        .sum::<f64>()
        / perc_logps.len() as f64;
    Ok(raw - lambda * mean)
}

/// PEC shaping straight from a trajectory.
pub fn pec_shape_trajectory(
    raw: f64,
    traj: &Trajectory,
    map: &PerceptualMap,
    lambda: f64,
) -> Result<f64> {
    pec_shaped_reward(raw, &per_step_perc_logps(traj, map)?, lambda)
}

/// PCVAE shaping straight from a trajectory; the generation-space term is
/// the trajectory's own recorded transition log-density.
pub fn pcvae_shape_trajectory(
    raw: f64,
    traj: &Trajectory,
    map: &PerceptualMap,
    lambda: f64,
) -> Result<f64> {
    let perc = per_step_perc_logps(traj, map)?;
    let gen: Vec<f64> = traj.steps.iter().map(|s| s.log_prob).collect();
    pcvae_shaped_reward(raw, &perc, &gen, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{rollout, CondId, NoiseSchedule, VelocityModel};
    use crate::numeric::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_lambda_is_identity() {
        assert_eq!(pec_shaped_reward(0.7, &[2.0, -1.0], 0.0).unwrap(), 0.7);
        assert_eq!(pcvae_shaped_reward(0.7, &[2.0], &[1.0], 0.0).unwrap(), 0.7);
    }

    #[test]
    fn pec_plug_in() {
        // raw 1, mean log p = 2.0, λ = 0.1 → 0.8.
        let shaped = pec_shaped_reward(1.0, &[1.0, 3.0], 0.1).unwrap();
        assert!((shaped - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pec_lambda_005_fixed_transcript() {
        // λ = 0.05 over a fixed transcript of per-step scores.
        let logps = [0.4, -0.2, 1.8, 0.0];
        let shaped = pec_shaped_reward(0.9, &logps, 0.05).unwrap();
        let mean = logps.iter().sum::<f64>() / 4.0;
        assert_eq!(shaped, 0.9 - 0.05 * mean);
    }

    #[test]
    fn pcvae_lambda_003_fixed_transcript() {
        let perc = [0.4, -0.2, 1.8];
        let gen = [0.1, 0.1, 0.1];
        let shaped = pcvae_shaped_reward(0.5, &perc, &gen, 0.03).unwrap();
        let mean = perc.iter().zip(&gen).map(|(p, g)| p - g).sum::<f64>() / 3.0;
        assert_eq!(shaped, 0.5 - 0.03 * mean);
    }

    #[test]
    fn pcvae_identity_map_is_exactly_a_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = VelocityModel::new(2, 1, &[8], Activation::Tanh, 4, &mut rng).unwrap();
        let sch = NoiseSchedule::default_constant();
        let t = rollout(&m, &sch, CondId(0), &mut rng).unwrap();
        let map = PerceptualMap::identity(2);
        for lambda in [0.0, 0.03, 0.1, 10.0] {
            let shaped = pcvae_shape_trajectory(0.321, &t, &map, lambda).unwrap();
            assert_eq!(shaped, 0.321);
        }
    }

    #[test]
    fn shaping_is_affine_in_lambda() {
        let logps = [0.5, 1.5];
        let at0 = pec_shaped_reward(2.0, &logps, 0.0).unwrap();
        let at1 = pec_shaped_reward(2.0, &logps, 1.0).unwrap();
        let slope = at1 - at0;
        assert!((slope - (-1.0)).abs() < 1e-15); // −mean(logps)
        let at_half = pec_shaped_reward(2.0, &logps, 0.5).unwrap();
        assert!((at_half - (at0 + 0.5 * slope)).abs() < 1e-15);
    }

    #[test]
    fn mismatched_lists_rejected() {
        assert!(pcvae_shaped_reward(0.0, &[1.0], &[1.0, 2.0], 0.1).is_err());
        assert!(pec_shaped_reward(0.0, &[], 0.1).is_err());
    }
}
