//! Covariance-aware entropy control: score transitions by how strongly
//! their log-probability co-varies with advantage, then either detach the
//! top fraction from the gradient (Clip-Cov) or KL-penalize it (KL-Cov).

use crate::error::{Error, Result};

/// Centered cross-products `(logp_i − mean)·(A_i − mean)`; their mean is the
/// empirical covariance of the two vectors.
pub fn covariance_scores(logps: &[f64], advs: &[f64]) -> Result<Vec<f64>> {
    let n = logps.len();
    if n < 2 {
        return Err(Error::GroupTooSmall { need: 2, got: n });
    }
    if advs.len() != n {
        return Err(Error::ShapeMismatch {
            context: "covariance scores",
            expected: n,
            got: advs.len(),
        });
    }
    let lp_mean = logps.iter().sum::<f64>() / n as f64;
    let adv_mean = advs.iter().sum::<f64>() / n as f64;
    Ok(logps
        .iter()
        .zip(advs)
        .map(|(&l, &a)| (l - lp_mean) * (a - adv_mean))
        .collect())
}

/// Indices of the top `⌊rate·N⌋` scores, ranked descending with ties broken
/// by lower index first.
pub fn top_fraction_indices(scores: &[f64], rate: f64) -> Result<Vec<usize>> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "selection rate must be in (0,1), got {rate}"
        )));
    }
    let count = (rate * scores.len() as f64).floor() as usize;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut selected = order[..count].to_vec();
    selected.sort_unstable();
    Ok(selected)
}

/// Boolean mask over transitions with exactly `⌊rate·N⌋` entries set.
pub fn clip_cov_mask(scores: &[f64], rate: f64) -> Result<Vec<bool>> {
    let mut mask = vec![false; scores.len()];
    for i in top_fraction_indices(scores, rate)? {
        mask[i] = true;
    }
    Ok(mask)
}

/// Gaussian KL between transition kernels with shared isotropic covariance:
/// `‖μ_a − μ_b‖² / (2σ²Δt)`.
pub fn kl_ref_penalty(mu_new: &[f64], mu_ref: &[f64], sigma2_dt: f64) -> f64 {
    debug_assert!(sigma2_dt > 0.0);
    let d2: f64 = mu_new
        .iter()
        .zip(mu_ref)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    d2 / (2.0 * sigma2_dt)
}

/// Total KL-Cov penalty: `β · Σ` of the per-transition Gaussian KL over the
/// top `⌊k·N⌋` transitions ranked by covariance score.
pub fn kl_cov_penalty(
    scores: &[f64],
    rate: f64,
    beta: f64,
    transitions: &[(&[f64], &[f64], f64)],
) -> Result<f64> {
    if transitions.len() != scores.len() {
        return Err(Error::ShapeMismatch {
            context: "kl_cov transitions",
            expected: scores.len(),
            got: transitions.len(),
        });
    }
    if beta == 0.0 {
        return Ok(0.0);
    }
    let selected = top_fraction_indices(scores, rate)?;
    Ok(beta
        * selected
            .iter()
            .map(|&i| {
                let (mu_new, mu_old, s2dt) = transitions[i];
                kl_ref_penalty(mu_new, mu_old, s2dt)
            })
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_arithmetic_scores() {
        // logps [−1,−2] (mean −1.5), advs [1,−1] (mean 0) → [0.5, 0.5].
        let s = covariance_scores(&[-1.0, -2.0], &[1.0, -1.0]).unwrap();
        assert_eq!(s, vec![0.5, 0.5]);
    }

    #[test]
    fn constant_logps_zero_scores() {
        let s = covariance_scores(&[0.3; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mean_score_is_two_pass_covariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 64;
        let lp: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..0.0)).collect();
        let ad: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let scores = covariance_scores(&lp, &ad).unwrap();
        let score_mean = scores.iter().sum::<f64>() / n as f64;
        // Independent two-pass covariance.
        let ml = lp.iter().sum::<f64>() / n as f64;
        let ma = ad.iter().sum::<f64>() / n as f64;
        let cov = lp
            .iter()
            .zip(&ad)
            .map(|(&l, &a)| (l - ml) * (a - ma))
            .sum::<f64>()
            / n as f64;
        assert!((score_mean - cov).abs() < 1e-12);
    }

    #[test]
    fn mask_cardinality_is_floor_of_rate_times_n() {
        for n in [4usize, 8, 17, 100] {
            let scores: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let mask = clip_cov_mask(&scores, 0.25).unwrap();
            let expect = (0.25 * n as f64).floor() as usize;
            assert_eq!(mask.iter().filter(|&&b| b).count(), expect, "n = {n}");
        }
    }

    #[test]
    fn ties_break_toward_lower_indices() {
        let scores = vec![1.0; 8];
        let mask = clip_cov_mask(&scores, 0.25).unwrap();
        assert_eq!(mask, vec![true, true, false, false, false, false, false, false]);
    }

    #[test]
    fn kl_penalty_values() {
        assert_eq!(kl_ref_penalty(&[1.0, 2.0], &[1.0, 2.0], 0.01), 0.0);
        // ‖Δμ‖² = 0.01, σ²Δt = 0.01 → 0.5.
        let v = kl_ref_penalty(&[0.1, 0.0], &[0.0, 0.0], 0.01);
        assert!((v - 0.5).abs() < 1e-12);
        // Quadratic scaling in the gap.
        let v2 = kl_ref_penalty(&[0.2, 0.0], &[0.0, 0.0], 0.01);
        assert!((v2 / v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kl_cov_composes_selection_and_penalty() {
        let scores = vec![3.0, 1.0, 2.0, 0.0];
        let mu_a: Vec<Vec<f64>> = vec![vec![0.1, 0.0]; 4];
        let mu_b: Vec<Vec<f64>> = vec![vec![0.0, 0.0]; 4];
        let transitions: Vec<(&[f64], &[f64], f64)> = (0..4)
            .map(|i| (mu_a[i].as_slice(), mu_b[i].as_slice(), 0.01))
            .collect();
        // rate 0.25 of 4 → 1 transition (index 0), penalty 0.5 each.
        let p = kl_cov_penalty(&scores, 0.25, 2.0, &transitions).unwrap();
        assert!((p - 2.0 * 0.5).abs() < 1e-12);
        // β = 0 short-circuits.
        assert_eq!(kl_cov_penalty(&scores, 0.25, 0.0, &transitions).unwrap(), 0.0);
    }
}
