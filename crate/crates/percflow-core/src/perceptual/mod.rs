//! Frozen perceptual maps, the perceptual probability/entropy they induce,
//! and the PEC / PCVAE reward-shaping rules.

mod entropy;
mod map;
mod shaping;
mod variance;

pub use entropy::{per_step_perc_logps, perceptual_entropy_estimate, perceptual_logprob};
pub use map::{anchored_frozen_net, FrozenNetGains, MapKind, PerceptualMap};
pub use shaping::{
    pcvae_shape_trajectory, pcvae_shaped_reward, pec_shape_trajectory, pec_shaped_reward,
};
pub use variance::conditional_feature_variance;
