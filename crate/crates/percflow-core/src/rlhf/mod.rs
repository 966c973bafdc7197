//! The RLHF engine: reward landscapes, group-relative advantages, the
//! clipped surrogate, and the regularizer family.

mod advantage;
mod cov;
mod group;
mod landscape;
mod spec;
mod step;
mod surrogate;
mod train;

pub use advantage::{group_advantage, STD_FLOOR};
pub use cov::{
    clip_cov_mask, covariance_scores, kl_cov_penalty, kl_ref_penalty, top_fraction_indices,
};
pub use group::{sample_group, RolloutGroup};
pub use landscape::{RewardKind, RewardLandscape};
pub use spec::{EntropySpace, RegularizerKind, RegularizerSpec, REGULARIZER_TAGS};
pub use step::{batch_stats, rlhf_gradient, rlhf_step, GradientAggregates, StepContext, UpdateStats};
pub use surrogate::{clipped_surrogate, ratio, RATIO_CLAMP_MAX, RATIO_CLAMP_MIN};
pub use train::{rlhf_train, RlhfConfig, RlhfRun};
