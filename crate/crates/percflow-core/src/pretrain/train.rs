//! Flow-matching pretraining loop: produces the multi-modal reference
//! policy that the RLHF stage starts from.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{CondId, VelocityModel};
use crate::numeric::{adam_step, AdamState, GradBundle};
use crate::pretrain::cfm::cfm_loss;
use crate::pretrain::dataset::GmmDataset;

/// Time-sampling clamp: s uniform on (S_MIN, 1 − S_MIN) keeps training away
/// from the σ²/2s singularity.
const S_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PretrainConfig {
    pub batch_size: usize,
    pub num_steps: usize,
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            batch_size: 128,
            num_steps: 20_000,
            eval_every: 100,
            seed: 42,
        }
    }
}

impl PretrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.num_steps == 0 || self.eval_every == 0 {
            return Err(Error::InvalidParameter(
                "pretrain batch_size, num_steps and eval_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One point of the training curve: `(step, mean batch loss)`.
pub type LossCurve = Vec<(usize, f64)>;

/// Train `model` in place; returns the loss curve sampled every
/// `eval_every` steps (first and last step always included).
///
/// A divergent batch aborts the run before the bad update is applied, so
/// the model keeps its last good parameters.
pub fn pretrain(model: &mut VelocityModel, ds: &GmmDataset, cfg: &PretrainConfig) -> Result<LossCurve> {
    cfg.validate()?;
    ds.check_model(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = AdamState::new(model.net(), 1e-3);
    let mut curve = Vec::new();
    let n_cond = ds.n_conditions();
    let d = model.sample_dim();

    for step in 1..=cfg.num_steps {
        let mut acc = GradBundle::zeros_like(model.net());
        let mut batch_loss = 0.0;
        for _ in 0..cfg.batch_size {
            let c = CondId(rng.random_range(0..n_cond));
            let x0 = ds.sample(c, 1, &mut rng)?.pop().unwrap();
            let s = rng.random_range(S_MIN..(1.0 - S_MIN));
            let eps: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let (loss, grads) = cfm_loss(model, &x0, c, s, &eps).map_err(|e| match e {
                Error::Divergence { .. } => Error::Divergence {
                    step,
                    limit: f64::INFINITY,
                },
                other => other,
            })?;
            batch_loss += loss;
            acc.add_scaled(&grads, 1.0 / cfg.batch_size as f64);
        }
        batch_loss /= cfg.batch_size as f64;
        adam_step(model.net_mut(), &acc, &mut opt)?;
        if step == 1 || step == cfg.num_steps || step % cfg.eval_every == 0 {
            curve.push((step, batch_loss));
        }
    }
    Ok(curve)
}
