//! Noise schedule: the descending time grid and the per-step transition
//! covariance σ(s)²·Δt it fixes.
//!
//! Sampling traverses the grid from s_T = 1−δ down to s_0 = δ_min; step `i`
//! moves from s_i to s_{i−1} and injects Gaussian noise with variance
//! σ(s_i)²·Δt_i per coordinate. Nothing here depends on model parameters —
//! that single fact is what keeps the per-step policy entropy constant
//! throughout training.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise intensity as a function of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaKind {
    /// σ(s) = η.
    Constant { eta: f64 },
    /// σ(s) = η·sqrt(s/(1−s)), large near the noise end of the grid.
    FlowStyle { eta: f64 },
}

impl SigmaKind {
    pub fn sigma2(&self, s: f64) -> f64 {
        match *self {
            SigmaKind::Constant { eta } => eta * eta,
            SigmaKind::FlowStyle { eta } => eta * eta * s / (1.0 - s),
        }
    }
}

/// Descending time grid `s_T = 1−δ > … > s_1 > s_0 = δ_min` with per-step
/// noise intensities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSchedule {
    num_steps: usize,
    /// Stored ascending by index: `grid[j] = s_j`, length `num_steps + 1`.
    grid: Vec<f64>,
    sigma: SigmaKind,
    delta: f64,
    delta_min: f64,
}

impl NoiseSchedule {
    pub const DEFAULT_ETA: f64 = 0.7;
    pub const DEFAULT_STEPS: usize = 10;
    pub const DEFAULT_DELTA: f64 = 1e-3;

    /// Uniform grid between `delta_min` and `1 − delta` with `num_steps` steps.
    pub fn uniform(num_steps: usize, sigma: SigmaKind, delta: f64, delta_min: f64) -> Result<Self> {
        if !(delta > 0.0 && delta_min > 0.0 && delta_min + delta < 1.0) {
            return Err(Error::Schedule(format!(
                "clamps must satisfy 0 < delta_min, 0 < delta, delta_min + delta < 1 (got {delta_min}, {delta})"
            )));
        }
        let span = 1.0 - delta - delta_min;
        let grid = (0..=num_steps)
            .map(|j| delta_min + span * j as f64 / num_steps.max(1) as f64)
            .collect();
        let sch = NoiseSchedule {
            num_steps,
            grid,
            sigma,
            delta,
            delta_min,
        };
        for i in 1..=num_steps {
            let v = sch.sigma2_dt(i)?;
            if !(v > 0.0) {
                return Err(Error::Schedule(format!(
                    "degenerate transition covariance {v} at step {i}"
                )));
            }
        }
        Ok(sch)
    }

    /// Default schedule: T=10, constant η=0.7, δ=δ_min=1e-3.
    pub fn default_constant() -> Self {
        NoiseSchedule::uniform(
            Self::DEFAULT_STEPS,
            SigmaKind::Constant { eta: Self::DEFAULT_ETA },
            Self::DEFAULT_DELTA,
            Self::DEFAULT_DELTA,
        )
        .expect("default schedule is valid")
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn sigma(&self) -> SigmaKind {
        self.sigma
    }

    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    /// Grid time `s_i` for `0 ≤ i ≤ T`.
    pub fn time(&self, i: usize) -> f64 {
        self.grid[i]
    }

    /// Step width `Δt_i = s_i − s_{i−1}` for `1 ≤ i ≤ T`.
    pub fn dt(&self, i: usize) -> f64 {
        self.grid[i] - self.grid[i - 1]
    }

    /// Transition covariance scale σ(s_i)²·Δt_i for step `1 ≤ i ≤ T`.
    ///
    /// Strictly positive and independent of any model parameter.
    pub fn sigma2_dt(&self, i: usize) -> Result<f64> {
        if i == 0 || i > self.num_steps {
            return Err(Error::Schedule(format!(
                "step index {i} out of range 1..={}",
                self.num_steps
            )));
        }
        Ok(self.sigma.sigma2(self.grid[i]) * self.dt(i))
    }

    /// Step indices in sampling order (T down to 1).
    pub fn sampling_order(&self) -> impl Iterator<Item = usize> {
        (1..=self.num_steps).rev()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Near-zero clamps so the grid is numerically {0, 1/T, …, 1}.
    fn tight(num_steps: usize, sigma: SigmaKind) -> NoiseSchedule {
        NoiseSchedule::uniform(num_steps, sigma, 1e-12, 1e-12).unwrap()
    }

    #[test]
    fn constant_sigma_uniform_grid() {
        let sch = tight(10, SigmaKind::Constant { eta: 0.1 });
        for i in 1..=10 {
            assert!((sch.sigma2_dt(i).unwrap() - 1e-3).abs() < 1e-12);
        }
    }

    #[test]
    fn flow_style_midpoint() {
        // σ² = η²·s/(1−s) = 0.49 at s = 0.5; Δt = 0.1.
        let sch = tight(10, SigmaKind::FlowStyle { eta: 0.7 });
        let i = 5; // s_5 = 0.5
        assert!((sch.time(i) - 0.5).abs() < 1e-9);
        assert!((sch.sigma2_dt(i).unwrap() - 0.049).abs() < 1e-9);
    }

    #[test]
    fn flow_style_positive_near_clamp() {
        let sch = NoiseSchedule::uniform(10, SigmaKind::FlowStyle { eta: 0.7 }, 1e-3, 1e-3).unwrap();
        // The smallest time at which a transition is evaluated is s_1.
        let v = sch.sigma2_dt(1).unwrap();
        assert!(v > 0.0);
        let s1 = sch.time(1);
        let expect = 0.49 * s1 / (1.0 - s1) * sch.dt(1);
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_step_rejected() {
        let sch = NoiseSchedule::default_constant();
        assert!(sch.sigma2_dt(0).is_err());
        assert!(sch.sigma2_dt(11).is_err());
    }

    #[test]
    fn grid_strictly_decreasing_in_sampling_order() {
        let sch = NoiseSchedule::default_constant();
        let times: Vec<f64> = sch.sampling_order().map(|i| sch.time(i)).collect();
        for w in times.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(times.iter().all(|&s| s > 0.0 && s < 1.0));
    }

    #[test]
    fn invalid_clamps_rejected() {
        assert!(NoiseSchedule::uniform(10, SigmaKind::Constant { eta: 0.7 }, 0.6, 0.6).is_err());
        assert!(NoiseSchedule::uniform(10, SigmaKind::Constant { eta: 0.7 }, 0.0, 1e-3).is_err());
    }
}
