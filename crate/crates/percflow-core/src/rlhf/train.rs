//! The RLHF training loop: snapshot, roll out groups, update, record.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{CondId, NoiseSchedule, VelocityModel};
use crate::numeric::AdamState;
use crate::perceptual::{perceptual_entropy_estimate, PerceptualMap};
use crate::pretrain::GmmDataset;
use crate::rlhf::group::sample_group;
use crate::rlhf::landscape::RewardLandscape;
use crate::rlhf::spec::RegularizerSpec;
use crate::rlhf::step::{rlhf_step, StepContext, UpdateStats};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RlhfConfig {
    /// Group size K.
    pub group_size: usize,
    pub num_steps: usize,
    pub checkpoint_every: usize,
    pub learning_rate: f64,
    /// Fresh rollouts per condition for the logged perceptual-entropy
    /// column; 0 falls back to the (noisier) batch estimate.
    pub entropy_eval_rollouts: usize,
    pub seed: u64,
}

impl Default for RlhfConfig {
    fn default() -> Self {
        RlhfConfig {
            group_size: 8,
            num_steps: 300,
            checkpoint_every: 100,
            learning_rate: 1e-3,
            entropy_eval_rollouts: 64,
            seed: 0,
        }
    }
}

impl RlhfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_size < 2 {
            return Err(Error::GroupTooSmall {
                need: 2,
                got: self.group_size,
            });
        }
        if self.num_steps == 0 || self.checkpoint_every == 0 {
            return Err(Error::InvalidParameter(
                "rlhf num_steps and checkpoint_every must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter(
                "learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Output of a finished run: per-update stats plus the checkpoint series
/// (step 0 snapshot included).
pub struct RlhfRun {
    pub stats: Vec<UpdateStats>,
    pub checkpoints: Vec<(usize, VelocityModel)>,
}

/// Fine-tune `model` in place for `cfg.num_steps` updates.
///
/// Each update freezes a snapshot, rolls out one group of K trajectories
/// per condition under it, shapes rewards per `spec`, and takes one
/// ascent step on the clipped surrogate. The initial model doubles as the
/// frozen reference for `kl_ref`.
pub fn rlhf_train(
    model: &mut VelocityModel,
    ds: &GmmDataset,
    land: &RewardLandscape,
    map: &PerceptualMap,
    sch: &NoiseSchedule,
    spec: &RegularizerSpec,
    conditions: &[CondId],
    cfg: &RlhfConfig,
) -> Result<RlhfRun> {
    cfg.validate()?;
    spec.validate()?;
    ds.check_model(model)?;
    if conditions.is_empty() {
        return Err(Error::EmptyInput("conditions"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Separate stream so the logged entropy estimate never perturbs the
    // training trajectory.
    let mut eval_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9E37_79B9_7F4A_7C15);
    let reference = model.clone();
    let mut opt = AdamState::new(model.net(), cfg.learning_rate);
    let mut stats = Vec::with_capacity(cfg.num_steps);
    let mut checkpoints = vec![(0, model.clone())];

    for step in 1..=cfg.num_steps {
        let snapshot = model.clone();
        let groups: Vec<_> = conditions
            .iter()
            .map(|&c| sample_group(&snapshot, sch, land, map, spec, c, cfg.group_size, &mut rng))
            .collect::<Result<_>>()?;
        let ctx = StepContext {
            sch,
            map,
            dataset: ds,
            reference: Some(&reference),
        };
        let mut row = rlhf_step(model, &mut opt, &groups, spec, &ctx, step)?;
        if cfg.entropy_eval_rollouts > 0 {
            let mut rolls = Vec::with_capacity(cfg.entropy_eval_rollouts * conditions.len());
            for &c in conditions {
                for _ in 0..cfg.entropy_eval_rollouts {
                    rolls.push(crate::flow::rollout(&snapshot, sch, c, &mut eval_rng)?);
                }
            }
            row.perc_entropy = perceptual_entropy_estimate(&rolls, map)?.mean;
        }
        stats.push(row);
        if step % cfg.checkpoint_every == 0 || step == cfg.num_steps {
            checkpoints.push((step, model.clone()));
        }
    }
    Ok(RlhfRun { stats, checkpoints })
}
