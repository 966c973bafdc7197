//! Conditional Gaussian-mixture data, the stand-in for prompt-conditioned
//! "images".

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::CondId;
use crate::flow::VelocityModel;

/// One isotropic mixture component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmMode {
    pub mean: Vec<f64>,
    pub weight: f64,
    pub std: f64,
}

/// Mixture dataset: global mode list plus, per condition, the subset of
/// modes that condition may emit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmDataset {
    dim: usize,
    modes: Vec<GmmMode>,
    /// `condition_modes[c]` = indices into `modes`.
    condition_modes: Vec<Vec<usize>>,
}

impl GmmDataset {
    pub fn new(dim: usize, modes: Vec<GmmMode>, condition_modes: Vec<Vec<usize>>) -> Result<Self> {
        if modes.is_empty() || condition_modes.is_empty() {
            return Err(Error::EmptyInput("gmm modes/conditions"));
        }
        for m in &modes {
            if m.mean.len() != dim {
                return Err(Error::ShapeMismatch {
                    context: "gmm mode mean",
                    expected: dim,
                    got: m.mean.len(),
                });
            }
            if !(m.weight > 0.0) || m.std < 0.0 {
                return Err(Error::InvalidParameter(
                    "mode weights must be positive and stds non-negative".into(),
                ));
            }
        }
        for (c, subset) in condition_modes.iter().enumerate() {
            if subset.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "condition {c} maps to no modes"
                )));
            }
            if subset.iter().any(|&i| i >= modes.len()) {
                return Err(Error::InvalidParameter(format!(
                    "condition {c} references a missing mode"
                )));
            }
        }
        Ok(GmmDataset {
            dim,
            modes,
            condition_modes,
        })
    }

    /// Default lab dataset: condition 0 ("portrait") emits 2 modes at
    /// (±3, 0); condition 1 ("room") emits 4 modes at (±3, ±3); std 0.3.
    pub fn default_lab() -> Self {
        let mk = |x: f64, y: f64| GmmMode {
            mean: vec![x, y],
            weight: 1.0,
            std: 0.3,
        };
        GmmDataset::new(
            2,
            vec![
                mk(3.0, 0.0),
                mk(-3.0, 0.0),
                mk(3.0, 3.0),
                mk(-3.0, 3.0),
                mk(3.0, -3.0),
                mk(-3.0, -3.0),
            ],
            vec![vec![0, 1], vec![2, 3, 4, 5]],
        )
        .expect("default dataset is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_conditions(&self) -> usize {
        self.condition_modes.len()
    }

    pub fn modes(&self) -> &[GmmMode] {
        &self.modes
    }

    /// The modes a condition may emit.
    pub fn modes_of(&self, c: CondId) -> Result<Vec<&GmmMode>> {
        let subset = self
            .condition_modes
            .get(c.0)
            .ok_or(Error::UnknownCondition(c.0))?;
        Ok(subset.iter().map(|&i| &self.modes[i]).collect())
    }

    /// i.i.d. draws from the condition's renormalized mixture.
    pub fn sample<R: Rng + ?Sized>(&self, c: CondId, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let subset = self.modes_of(c)?;
        let total: f64 = subset.iter().map(|m| m.weight).sum();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut u = rng.random_range(0.0..total);
            let mut chosen = subset.len() - 1;
            for (k, m) in subset.iter().enumerate() {
                if u < m.weight {
                    chosen = k;
                    break;
                }
                u -= m.weight;
            }
            let m = subset[chosen];
            let x = m
                .mean
                .iter()
                .map(|&mu| mu + m.std * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            out.push(x);
        }
        Ok(out)
    }

    /// Check whether `model` is compatible (dimension and condition count).
    pub fn check_model(&self, model: &VelocityModel) -> Result<()> {
        if model.sample_dim() != self.dim {
            return Err(Error::ShapeMismatch {
                context: "model sample dim vs dataset",
                expected: self.dim,
                got: model.sample_dim(),
            });
        }
        if model.n_conditions() != self.n_conditions() {
            return Err(Error::ShapeMismatch {
                context: "model conditions vs dataset",
                expected: self.n_conditions(),
                got: model.n_conditions(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_mode_zero_std_is_deterministic() {
        let ds = GmmDataset::new(
            2,
            vec![GmmMode {
                mean: vec![2.0, 2.0],
                weight: 1.0,
                std: 0.0,
            }],
            vec![vec![0]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for x in ds.sample(CondId(0), 20, &mut rng).unwrap() {
            assert_eq!(x, vec![2.0, 2.0]);
        }
    }

    #[test]
    fn two_equal_modes_split_evenly() {
        let ds = GmmDataset::new(
            2,
            vec![
                GmmMode { mean: vec![3.0, 0.0], weight: 1.0, std: 0.2 },
                GmmMode { mean: vec![-3.0, 0.0], weight: 1.0, std: 0.2 },
            ],
            vec![vec![0, 1]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 10_000;
        let samples = ds.sample(CondId(0), n, &mut rng).unwrap();
        let right = samples.iter().filter(|x| x[0] > 0.0).count() as f64 / n as f64;
        assert!((right - 0.5).abs() < 0.02, "share {right}");
    }

    #[test]
    fn weights_are_scale_invariant() {
        let build = |w: f64| {
            GmmDataset::new(
                1,
                vec![
                    GmmMode { mean: vec![-1.0], weight: w, std: 0.0 },
                    GmmMode { mean: vec![1.0], weight: w, std: 0.0 },
                ],
                vec![vec![0, 1]],
            )
            .unwrap()
        };
        let a = build(2.0);
        let b = build(0.5);
        let mut rng_a = ChaCha8Rng::seed_from_u64(9);
        let mut rng_b = ChaCha8Rng::seed_from_u64(9);
        let sa = a.sample(CondId(0), 200, &mut rng_a).unwrap();
        let sb = b.sample(CondId(0), 200, &mut rng_b).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn unknown_condition_rejected() {
        let ds = GmmDataset::default_lab();
        assert!(matches!(
            ds.sample(CondId(7), 1, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::UnknownCondition(7))
        ));
    }
}
