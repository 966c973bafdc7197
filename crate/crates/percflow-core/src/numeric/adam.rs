//! Bias-corrected adaptive-moment optimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::mlp::{GradBundle, Mlp};

/// Optimizer state: first/second moments shaped like the network parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_stability: f64,
}

impl AdamState {
    /// Zero-initialized moments for `net` with the given learning rate and
    /// conventional defaults (beta1 0.9, beta2 0.999, eps 1e-8).
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        let shapes: Vec<usize> = net
            .layers()
            .iter()
            .flat_map(|l| [l.weights.len(), l.biases.len()])
            .collect();
        AdamState {
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps_stability: 1e-8,
        }
    }
}

/// One optimizer step on `net` for a loss with gradients `grads`.
///
/// Rejects non-finite gradients before touching any parameter, so a failed
/// call leaves both the network and the state untouched.
pub fn adam_step(net: &mut Mlp, grads: &GradBundle, state: &mut AdamState) -> Result<()> {
    if grads.weights.len() != net.layers().len() {
        return Err(Error::ShapeMismatch {
            context: "adam grads",
            expected: net.layers().len(),
            got: grads.weights.len(),
        });
    }
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);

    let n_layers = net.layers().len();
    for li in 0..n_layers {
        for part in 0..2 {
            let slot = li * 2 + part;
            let m = &mut state.first_moment[slot];
            let v = &mut state.second_moment[slot];
            let g = if part == 0 { &grads.weights[li] } else { &grads.biases[li] };
            let layer = &mut net.layers_mut()[li];
            let params = if part == 0 { &mut layer.weights } else { &mut layer.biases };
            if g.len() != params.len() {
                return Err(Error::ShapeMismatch {
                    context: "adam layer grads",
                    expected: params.len(),
                    got: g.len(),
                });
            }
            for i in 0..params.len() {
                m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
                v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                params[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.eps_stability);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::mlp::{Activation, Layer};

    fn toy_net(w: f64, b: f64) -> Mlp {
        Mlp::from_parts(
            vec![1, 1],
            Activation::Tanh,
            vec![Layer {
                in_dim: 1,
                out_dim: 1,
                weights: vec![w],
                biases: vec![b],
            }],
        )
        .unwrap()
    }

    fn grad_of(net: &Mlp, gw: f64, gb: f64) -> GradBundle {
        let mut g = GradBundle::zeros_like(net);
        g.weights[0][0] = gw;
        g.biases[0][0] = gb;
        g
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut net = toy_net(0.7, -0.2);
        let mut st = AdamState::new(&net, 1e-3);
        let g = grad_of(&net, 0.0, 0.0);
        adam_step(&mut net, &g, &mut st).unwrap();
        assert_eq!(net.layers()[0].weights[0], 0.7);
        assert_eq!(net.layers()[0].biases[0], -0.2);
        assert_eq!(st.step_count, 1);
        assert!(st.first_moment.iter().flatten().all(|&m| m == 0.0));
    }

    /// Closed form for the first step: delta = -lr * g/|g| exactly when eps
    /// is negligible, i.e. -lr * m_hat/(sqrt(v_hat)+eps) with m_hat=g, v_hat=g².
    #[test]
    fn first_step_closed_form() {
        let lr = 1e-3;
        let g0 = 0.37;
        let mut net = toy_net(1.0, 0.0);
        let mut st = AdamState::new(&net, lr);
        let g = grad_of(&net, g0, 0.0);
        adam_step(&mut net, &g, &mut st).unwrap();
        let expected = 1.0 - lr * g0 / (g0.abs() + st.eps_stability);
        assert!((net.layers()[0].weights[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn two_constant_steps_match_hand_recursion() {
        let lr = 0.01;
        let g0 = -0.5;
        let mut net = toy_net(0.0, 0.0);
        let mut st = AdamState::new(&net, lr);
        for _ in 0..2 {
            let g = grad_of(&net, g0, 0.0);
            adam_step(&mut net, &g, &mut st).unwrap();
        }
        // Hand recursion of the same update rule.
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut w = 0.0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g0;
            v = b2 * v + (1.0 - b2) * g0 * g0;
            let mh = m / (1.0 - b1f64_pow(b1, t));
            let vh = v / (1.0 - b1f64_pow(b2, t));
            w -= lr * mh / (vh.sqrt() + eps);
        }
        assert!((net.layers()[0].weights[0] - w).abs() < 1e-15);
        assert_eq!(st.step_count, 2);
    }

    fn b1f64_pow(b: f64, t: usize) -> f64 {
        b.powi(t as i32)
    }

    #[test]
    fn non_finite_gradient_aborts_update() {
        let mut net = toy_net(1.0, 0.0);
        let mut st = AdamState::new(&net, 1e-3);
        let g = grad_of(&net, f64::NAN, 0.0);
        let err = adam_step(&mut net, &g, &mut st);
        assert!(matches!(err, Err(Error::NonFiniteGradient)));
        assert_eq!(net.layers()[0].weights[0], 1.0);
        assert_eq!(st.step_count, 0);
    }

    #[test]
    fn identical_seeds_give_bit_identical_trajectories() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let mut net = Mlp::new(&[2, 4, 1], Activation::Tanh, &mut rng).unwrap();
            let mut st = AdamState::new(&net, 1e-2);
            for k in 0..50 {
                let x = [(k as f64 * 0.1).sin(), (k as f64 * 0.1).cos()];
                let (y, cache) = net.forward(&x).unwrap();
                let g = net.backward(&cache, &y).unwrap();
                adam_step(&mut net, &g, &mut st).unwrap();
            }
            net.layers()[0].weights.clone()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }
}
