//! Synthetic data and conditional flow-matching pretraining.

mod cfm;
mod dataset;
mod train;

pub use cfm::cfm_loss;
pub use dataset::{GmmDataset, GmmMode};
pub use train::{pretrain, LossCurve, PretrainConfig};
