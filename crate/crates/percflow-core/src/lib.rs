//! Desk-scale laboratory for flow-matching RLHF.
//!
//! The crate trains a toy velocity-field model on conditional Gaussian
//! mixtures, fine-tunes it with group-relative policy optimization under
//! analytic reward landscapes, and measures what happens to diversity:
//! per-step policy entropy (which stays pinned by the noise schedule),
//! perceptual entropy in a frozen feature map (which does not), mode
//! coverage, and Vendi scores.
//!
//! Module map:
//!
//! - [`numeric`] — MLP with manual backprop, Adam, symmetric eigenvalues.
//! - [`flow`] — noise schedule, Gaussian reverse transitions, rollouts,
//!   per-step entropy (analytic and Monte-Carlo).
//! - [`pretrain`] — Gaussian-mixture data and conditional flow-matching
//!   pretraining.
//! - [`perceptual`] — frozen feature maps, perceptual log-probability and
//!   entropy, PEC/PCVAE reward shaping.
//! - [`rlhf`] — reward landscapes, group advantages, the clipped surrogate,
//!   and the full regularizer family (KL-to-reference, entropy bonuses,
//!   Clip-Higher, Clip-Cov, KL-Cov, PEC, PCVAE).
//! - [`analysis`] — diversity metrics, the entropy-reward fit, and the
//!   gradient/variance identity checks.

pub mod analysis;
pub mod error;
pub mod flow;
pub mod numeric;
pub mod perceptual;
pub mod pretrain;
pub mod rlhf;

pub use error::{Error, Result};
