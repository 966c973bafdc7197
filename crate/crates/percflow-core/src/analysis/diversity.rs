//! Sample-diversity metrics: feature variance, Vendi score, mode coverage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::CondId;
use crate::numeric::sym_eigvals;
use crate::pretrain::GmmDataset;

/// Trace of the sample covariance: `(1/(n−1))·Σ‖z_i − z̄‖²`.
pub fn feature_variance(samples: &[Vec<f64>]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let d = samples[0].len();
    let mut mean = vec![0.0; d];
    for z in samples {
        for (m, &v) in mean.iter_mut().zip(z) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let ssq: f64 = samples
        .iter()
        .map(|z| {
            z.iter()
                .zip(&mean)
                .map(|(&v, &m)| (v - m) * (v - m))
                .sum::<f64>()
        })
        .sum();
    Ok(ssq / (n - 1) as f64)
}

/// Vendi score: exp of the spectral entropy of the normalized similarity
/// matrix `K = (1/n)·ZZᵀ` built from unit-normalized feature rows.
///
/// The nonzero spectrum of `ZZᵀ` equals that of `ZᵀZ`, so for feature
/// dimension below the sample count the eigenproblem is solved on the
/// small `d×d` Gram instead of the `n×n` one.
pub fn vendi_score(features: &[Vec<f64>]) -> Result<f64> {
    let n = features.len();
    if n == 0 {
        return Err(Error::EmptyInput("features"));
    }
    let d = features[0].len();
    let mut unit = Vec::with_capacity(n);
    for (idx, z) in features.iter().enumerate() {
        if z.len() != d {
            return Err(Error::ShapeMismatch {
                context: "vendi feature row",
                expected: d,
                got: z.len(),
            });
        }
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNormFeature(idx));
        }
        unit.push(z.iter().map(|v| v / norm).collect::<Vec<f64>>());
    }

    let eig = if d < n {
        // (1/n)·ZᵀZ, d×d.
        let mut g = vec![0.0; d * d];
        for z in &unit {
            for a in 0..d {
                for b in 0..d {
                    g[a * d + b] += z[a] * z[b] / n as f64;
                }
            }
        }
        sym_eigvals(&g, d)?
    } else {
        // (1/n)·ZZᵀ, n×n.
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum::<f64>()
                    / n as f64;
            }
        }
        sym_eigvals(&g, n)?
    };

    let entropy: f64 = eig
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum();
    Ok(entropy.exp())
}

/// Fraction of a condition's modes receiving at least a `tau` share of
/// samples within `rho_r · std` of the mode mean.
pub fn mode_coverage(
    samples: &[Vec<f64>],
    ds: &GmmDataset,
    c: CondId,
    rho_r: f64,
    tau: f64,
) -> Result<f64> {
    let modes = ds.modes_of(c)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let n = samples.len() as f64;
    let mut covered = 0usize;
    for m in &modes {
        let radius = rho_r * m.std;
        let hits = samples
            .iter()
            .filter(|x| {
                let dist2: f64 = x
                    .iter()
                    .zip(&m.mean)
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum();
                dist2.sqrt() <= radius
            })
            .count();
        if hits as f64 / n >= tau {
            covered += 1;
        }
    }
    Ok(covered as f64 / modes.len() as f64)
}

/// Default radius multiplier and share threshold for [`mode_coverage`].
pub const MODE_COVERAGE_RADIUS: f64 = 3.0;
pub const MODE_COVERAGE_SHARE: f64 = 0.05;

/// Per-condition diversity summary in one named feature space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityReport {
    pub feature_space: String,
    pub condition: usize,
    pub n_samples: usize,
    pub feature_variance: f64,
    pub vendi: f64,
    pub mode_coverage: Option<f64>,
}
