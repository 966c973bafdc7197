//! Conditional flow-matching objective.
//!
//! Corrupt `x_s = (1−s)·x0 + s·eps` and regress the velocity onto the
//! straight-path target `u = eps − x0` with squared error. Time runs so
//! that s=1 is pure noise and s=0 is data, matching the sampler's grid.

use crate::error::{Error, Result};
use crate::flow::{CondId, VelocityModel};
use crate::numeric::GradBundle;

/// Loss and parameter gradients for one (x0, eps, s) triple.
pub fn cfm_loss(
    model: &VelocityModel,
    x0: &[f64],
    c: CondId,
    s: f64,
    eps: &[f64],
) -> Result<(f64, GradBundle)> {
    if eps.len() != x0.len() {
        return Err(Error::ShapeMismatch {
            context: "cfm noise",
            expected: x0.len(),
            got: eps.len(),
        });
    }
    let x_s: Vec<f64> = x0
        .iter()
        .zip(eps)
        .map(|(&x, &e)| (1.0 - s) * x + s * e)
        .collect();
    let (v, cache) = model.velocity_with_cache(&x_s, s, c)?;
    let mut loss = 0.0;
    let mut out_grad = Vec::with_capacity(v.len());
    for k in 0..v.len() {
        let r = v[k] - (eps[k] - x0[k]);
        loss += r * r;
        out_grad.push(2.0 * r);
    }
    if !loss.is_finite() {
        return Err(Error::Divergence {
            step: 0,
            limit: f64::INFINITY,
        });
    }
    let grads = model.backward(&cache, &out_grad)?;
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Activation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zeroed_model() -> VelocityModel {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = VelocityModel::new(2, 1, &[4], Activation::Tanh, 4, &mut rng).unwrap();
        for l in m.net_mut().layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        m
    }

    #[test]
    fn perfect_prediction_gives_zero_loss() {
        // Force the network output to equal eps − x0 via output biases.
        let mut m = zeroed_model();
        let x0 = [1.0, -2.0];
        let eps = [0.5, 0.5];
        {
            let last = m.net_mut().layers_mut().last_mut().unwrap();
            last.biases[0] = eps[0] - x0[0];
            last.biases[1] = eps[1] - x0[1];
        }
        let (loss, _) = cfm_loss(&m, &x0, CondId(0), 0.5, &eps).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn zero_network_loss_is_target_norm() {
        let m = zeroed_model();
        let (loss, _) = cfm_loss(&m, &[1.0, 0.0], CondId(0), 0.3, &[0.0, 0.0]).unwrap();
        assert_eq!(loss, 1.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = VelocityModel::new(2, 1, &[6], Activation::Tanh, 4, &mut rng).unwrap();
        let x0 = [0.7, -0.4];
        let eps = [0.2, 1.1];
        let s = 0.42;
        let (_, grads) = cfm_loss(&m, &x0, CondId(0), s, &eps).unwrap();
        let h = 1e-5;
        for li in 0..m.net().layers().len() {
            let n_w = m.net().layers()[li].weights.len();
            for slot in (0..n_w).step_by(5) {
                let mut p = m.clone();
                p.net_mut().layers_mut()[li].weights[slot] += h;
                let (up, _) = cfm_loss(&p, &x0, CondId(0), s, &eps).unwrap();
                p.net_mut().layers_mut()[li].weights[slot] -= 2.0 * h;
                let (dn, _) = cfm_loss(&p, &x0, CondId(0), s, &eps).unwrap();
                let fd = (up - dn) / (2.0 * h);
                let an = grads.weights[li][slot];
                let denom = an.abs().max(fd.abs()).max(1e-8);
                assert!(((fd - an) / denom).abs() < 1e-4, "layer {li} slot {slot}");
            }
        }
    }
}
