//! Diversity and dynamics metrics plus the numerical identity checks.

mod diversity;
mod extremes;
mod fit;
mod gradcheck;
mod lemma;

pub use diversity::{
    feature_variance, mode_coverage, vendi_score, DiversityReport, MODE_COVERAGE_RADIUS,
    MODE_COVERAGE_SHARE,
};
pub use extremes::{advantage_prob_extremes, advantage_probs};
pub use fit::{entropy_reward_fit, FitResult};
pub use gradcheck::{
    corollary1_gradient_check, corollary1_reference_configs, Corollary1Config,
    GradientCheckReport,
};
pub use lemma::{variance_lemma_check, VarianceLemmaReport};
