//! Minimal numeric kernel: MLP with manual backprop, the moment-based
//! optimizer, and a small dense symmetric eigen-solver.

mod adam;
mod eigen;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use eigen::sym_eigvals;
pub use mlp::{Activation, ForwardCache, GradBundle, Layer, Mlp};
