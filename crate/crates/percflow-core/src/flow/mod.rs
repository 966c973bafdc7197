//! The flow policy: noise schedule, reverse-time Gaussian transitions,
//! per-step entropy, and full-trajectory rollouts.

mod model;
mod rollout;
mod schedule;
mod transition;

pub use model::{
    posterior_mean, posterior_mean_backward, posterior_mean_with_cache, CondId, MeanCache,
    VelocityModel,
};
pub use rollout::{rollout, write_trajectories_csv, Trajectory};
pub use schedule::{NoiseSchedule, SigmaKind};
pub use transition::{
    analytic_step_entropy, joint_entropy, logprob_constant, mc_step_entropy, sample_transition,
    transition_logprob, EntropyEstimate, TransitionStep, DIVERGENCE_LIMIT,
};

pub(crate) use transition::{mean_and_stderr, standard_normal_vec};
