//! Conditional feature-space variance: the quantity perceptual entropy
//! tracks under the local mean-preserving approximation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::flow::{sample_transition, CondId, NoiseSchedule, VelocityModel};
use crate::perceptual::map::PerceptualMap;

/// Number of fresh `x_t` draws the estimate averages over.
const N_STATES: usize = 16;

/// Monte-Carlo estimate of `E_{x_t}[ tr Cov(φ(x_{t−1}) | x_t) ]` at step `i`:
/// resample the transition `n` times from each fixed `x_t` (reached by a
/// fresh rollout prefix) and average the trace of the feature covariance.
pub fn conditional_feature_variance<R: Rng + ?Sized>(
    model: &VelocityModel,
    sch: &NoiseSchedule,
    map: &PerceptualMap,
    c: CondId,
    i: usize,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    if n < 1000 {
        return Err(Error::TooFewSamples { need: 1000, got: n });
    }
    let d = model.sample_dim();
    let mut acc = 0.0;
    for _ in 0..N_STATES {
        // Rollout prefix down to the state entering step i.
        let mut x = crate::flow::standard_normal_vec(d, rng);
        for j in ((i + 1)..=sch.num_steps()).rev() {
            x = sample_transition(model, &x, j, sch, c, rng)?.state_out;
        }
        // Resample the step from this fixed x_t.
        let mut feats = Vec::with_capacity(n);
        for _ in 0..n {
            let step = sample_transition(model, &x, i, sch, c, rng)?;
            feats.push(map.apply(&step.state_out)?);
        }
        let d_p = feats[0].len();
        let mut mean = vec![0.0; d_p];
        for z in &feats {
            for (m, &v) in mean.iter_mut().zip(z) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let trace: f64 = feats
            .iter()
            .map(|z| {
                z.iter()
                    .zip(&mean)
                    .map(|(&v, &m)| (v - m) * (v - m))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / (n - 1) as f64;
        acc += trace;
    }
    Ok(acc / N_STATES as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> VelocityModel {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        VelocityModel::new(2, 1, &[16], Activation::Tanh, 4, &mut rng).unwrap()
    }

    #[test]
    fn identity_map_matches_isotropic_trace() {
        let m = model();
        let sch = NoiseSchedule::default_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let i = 5;
        let v = conditional_feature_variance(&m, &sch, &PerceptualMap::identity(2), CondId(0), i, 20_000, &mut rng)
            .unwrap();
        let expect = 2.0 * sch.sigma2_dt(i).unwrap();
        assert!((v / expect - 1.0).abs() < 0.03, "{v} vs {expect}");
    }

    #[test]
    fn linear_map_matches_pushforward_trace() {
        let m = model();
        let sch = NoiseSchedule::default_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = vec![vec![1.0, 1.0], vec![0.0, 2.0]];
        let trace_ppt: f64 = p.iter().flat_map(|r| r.iter().map(|w| w * w)).sum(); // 1+1+0+4
        let map = PerceptualMap::linear("p", p).unwrap();
        let i = 8;
        let v = conditional_feature_variance(&m, &sch, &map, CondId(0), i, 20_000, &mut rng).unwrap();
        let expect = trace_ppt * sch.sigma2_dt(i).unwrap();
        assert!((v / expect - 1.0).abs() < 0.03, "{v} vs {expect}");
    }

    #[test]
    fn too_few_resamples_rejected() {
        let m = model();
        let sch = NoiseSchedule::default_constant();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(conditional_feature_variance(
            &m,
            &sch,
            &PerceptualMap::identity(2),
            CondId(0),
            5,
            10,
            &mut rng
        )
        .is_err());
    }
}
