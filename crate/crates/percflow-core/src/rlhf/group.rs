//! Rollout groups: K trajectories for one condition with raw rewards,
//! shaped rewards, and group-normalized advantages.

use rand::Rng;

use crate::error::Result;
use crate::flow::{rollout, CondId, NoiseSchedule, Trajectory, VelocityModel};
use crate::perceptual::{pcvae_shape_trajectory, pec_shape_trajectory, PerceptualMap};
use crate::rlhf::advantage::group_advantage;
use crate::rlhf::landscape::RewardLandscape;
use crate::rlhf::spec::{RegularizerKind, RegularizerSpec};

#[derive(Debug, Clone)]
pub struct RolloutGroup {
    pub condition: CondId,
    pub trajectories: Vec<Trajectory>,
    pub raw_rewards: Vec<f64>,
    pub shaped_rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl RolloutGroup {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// Roll out `k` trajectories under the (frozen) policy, score them, apply
/// the spec's reward shaping, and standardize within the group.
pub fn sample_group<R: Rng + ?Sized>(
    policy: &VelocityModel,
    sch: &NoiseSchedule,
    land: &RewardLandscape,
    map: &PerceptualMap,
    spec: &RegularizerSpec,
    c: CondId,
    k: usize,
    rng: &mut R,
) -> Result<RolloutGroup> {
    let mut trajectories = Vec::with_capacity(k);
    let mut raw_rewards = Vec::with_capacity(k);
    for _ in 0..k {
        let t = rollout(policy, sch, c, rng)?;
        raw_rewards.push(land.compute_reward(&t.final_x0, c)?);
        trajectories.push(t);
    }
    let shaped_rewards: Vec<f64> = match spec.kind {
        RegularizerKind::Pec { lambda } => trajectories
            .iter()
            .zip(&raw_rewards)
            .map(|(t, &r)| pec_shape_trajectory(r, t, map, lambda))
            .collect::<Result<_>>()?,
        RegularizerKind::Pcvae { lambda } => trajectories
            .iter()
            .zip(&raw_rewards)
            .map(|(t, &r)| pcvae_shape_trajectory(r, t, map, lambda))
            .collect::<Result<_>>()?,
        _ => raw_rewards.clone(),
    };
    let advantages = group_advantage(&shaped_rewards)?;
    Ok(RolloutGroup {
        condition: c,
        trajectories,
        raw_rewards,
        shaped_rewards,
        advantages,
    })
}
