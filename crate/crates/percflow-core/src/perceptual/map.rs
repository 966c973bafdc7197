//! Frozen maps from sample space to feature space.
//!
//! Stand-ins for the encoder stacks of full-scale systems: parameters are
//! fixed at construction and never updated, so every feature is a pure
//! function of its input for the lifetime of a run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Activation, Layer, Mlp};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Identity { dim: usize },
    /// Frozen matrix, rows are feature directions (`d_p × d`).
    Linear { matrix: Vec<Vec<f64>> },
    /// Frozen tanh network; the full parameter set serializes with the
    /// manifest, so any run replays exactly.
    FrozenMlp { net: Mlp },
}

/// A frozen perceptual map φ with a stable identifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerceptualMap {
    pub id: String,
    kind: MapKind,
}

/// Gains of the hand-placed units in [`anchored_frozen_net`].
#[derive(Debug, Clone, Copy)]
pub struct FrozenNetGains {
    /// Half-width of the low-sensitivity well around each anchor.
    pub anchor_offset: f64,
    /// Steepness of the well walls.
    pub anchor_gain: f64,
    /// Output weight of wall units.
    pub anchor_out: f64,
    /// Steepness of the inter-anchor slabs.
    pub bridge_gain: f64,
    /// Output weight of inter-anchor slabs.
    pub bridge_out: f64,
    /// Number of fine-grained texture units scattered across the domain.
    pub ripple_count: usize,
    /// Steepness of texture units (sets their spatial wavelength).
    pub ripple_gain: f64,
    /// Output weight of texture units.
    pub ripple_out: f64,
}

impl Default for FrozenNetGains {
    fn default() -> Self {
        FrozenNetGains {
            anchor_offset: 1.0,
            anchor_gain: 2.0,
            anchor_out: 1.0,
            bridge_gain: 2.0,
            bridge_out: 0.0,
            ripple_count: 0,
            ripple_gain: 25.0,
            ripple_out: 0.2,
        }
    }
}

impl FrozenNetGains {
    /// Scale the feature amplitudes (surprise scales with the square).
    pub fn amplified(mut self, factor: f64) -> Self {
        self.anchor_out *= factor;
        self.bridge_out *= factor;
        self
    }
}

/// A frozen 2-D tanh net whose Jacobian is small at the given anchor
/// points and grows away from them.
///
/// Construction: each anchor gets four steep tanh units saturated at the
/// anchor itself and active in a thin shell around it; each anchor pair
/// gets three slab units across the connecting segment. The net result is
/// a feature map that barely moves for samples sitting on an anchor and
/// moves a lot in the in-between and off-anchor regions — the toy stand-in
/// for perceptual encoders that are smooth on typical samples.
pub fn anchored_frozen_net(anchors: &[[f64; 2]], gains: FrozenNetGains) -> Mlp {
    // (w1 row, bias, out weight, out row)
    let mut pre: Vec<([f64; 2], f64, f64, usize)> = Vec::new();
    // Per anchor and axis, an antisymmetric pair of tanh units: the pair's
    // gradient vanishes exactly at the anchor and grows smoothly over a
    // neighborhood of width ~ offset + 2/gain.
    for c in anchors {
        for axis in [0usize, 1] {
            for dir in [1.0f64, -1.0] {
                let mut w = [0.0; 2];
                w[axis] = gains.anchor_gain;
                let b = -gains.anchor_gain * (c[axis] - dir * gains.anchor_offset);
                pre.push((w, b, dir * gains.anchor_out, axis));
            }
        }
    }
    if gains.bridge_out != 0.0 {
        for (i, a) in anchors.iter().enumerate() {
            for b in anchors.iter().skip(i + 1) {
                let diff = [b[0] - a[0], b[1] - a[1]];
                let len = (diff[0] * diff[0] + diff[1] * diff[1]).sqrt().max(1e-9);
                let u = [diff[0] / len, diff[1] / len];
                for (k, frac) in [0.3, 0.5, 0.7].into_iter().enumerate() {
                    let p = [a[0] + frac * diff[0], a[1] + frac * diff[1]];
                    let w = [gains.bridge_gain * u[0], gains.bridge_gain * u[1]];
                    let bias = -(w[0] * p[0] + w[1] * p[1]);
                    pre.push((w, bias, gains.bridge_out, k % 2));
                }
            }
        }
    }
    // Fine texture: thin slabs at quasi-random angles and offsets, far below
    // the transition-noise lengthscale, so their contribution to the
    // per-trajectory score behaves like frozen measurement noise.
    let extent = anchors
        .iter()
        .flat_map(|c| c.iter().map(|v| v.abs()))
        .fold(1.0f64, f64::max)
        + 1.0;
    for j in 0..gains.ripple_count {
        let angle = j as f64 * 2.399963229728653; // golden angle
        let w = [gains.ripple_gain * angle.cos(), gains.ripple_gain * angle.sin()];
        let frac = (j as f64 * 0.6180339887498949).fract();
        let offset = (2.0 * frac - 1.0) * extent;
        pre.push((w, -gains.ripple_gain * offset, gains.ripple_out, j % 2));
    }

    let n_hidden = pre.len();
    let mut w1 = Vec::with_capacity(n_hidden * 2);
    let mut b1 = Vec::with_capacity(n_hidden);
    let mut w2 = vec![0.0; 2 * n_hidden];
    for (j, (w, b, out, row)) in pre.iter().enumerate() {
        w1.extend_from_slice(w);
        b1.push(*b);
        w2[row * n_hidden + j] = *out;
    }
    Mlp::from_parts(
        vec![2, n_hidden, 2],
        Activation::Tanh,
        vec![
            Layer { in_dim: 2, out_dim: n_hidden, weights: w1, biases: b1 },
            Layer { in_dim: n_hidden, out_dim: 2, weights: w2, biases: vec![0.0; 2] },
        ],
    )
    .expect("anchored net shapes are consistent")
}

impl PerceptualMap {
    pub fn identity(dim: usize) -> Self {
        PerceptualMap {
            id: "identity".into(),
            kind: MapKind::Identity { dim },
        }
    }

    pub fn linear(id: impl Into<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if matrix.is_empty() || matrix[0].is_empty() {
            return Err(Error::EmptyInput("linear map matrix"));
        }
        let d = matrix[0].len();
        if matrix.iter().any(|row| row.len() != d) {
            return Err(Error::ShapeMismatch {
                context: "linear map rows",
                expected: d,
                got: matrix.iter().map(|r| r.len()).find(|&l| l != d).unwrap_or(d),
            });
        }
        Ok(PerceptualMap {
            id: id.into(),
            kind: MapKind::Linear { matrix },
        })
    }

    /// Frozen tanh MLP; weights are a deterministic function of `seed`.
    pub fn frozen_mlp(
        id: impl Into<String>,
        in_dim: usize,
        out_dim: usize,
        hidden: &[usize],
        seed: u64,
    ) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(in_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(out_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::new(&sizes, Activation::Tanh, &mut rng)?;
        Ok(PerceptualMap {
            id: id.into(),
            kind: MapKind::FrozenMlp { net },
        })
    }

    /// Wrap an explicit frozen network.
    pub fn frozen_from_net(id: impl Into<String>, net: Mlp) -> Self {
        PerceptualMap {
            id: id.into(),
            kind: MapKind::FrozenMlp { net },
        }
    }

    /// Default nonlinear map for 2-D labs: a frozen tanh net whose
    /// sensitivity is lowest at the data-mode anchors and grows away from
    /// them (see [`anchored_frozen_net`]), mimicking encoders that are
    /// smooth on typical samples and sharp off-manifold.
    pub fn default_frozen(sample_dim: usize) -> Self {
        if sample_dim == 2 {
            let anchors = [[3.0, 0.0], [-3.0, 0.0]];
            PerceptualMap::frozen_from_net(
                "frozen_mlp",
                anchored_frozen_net(&anchors, FrozenNetGains::default()),
            )
        } else {
            PerceptualMap::frozen_mlp("frozen_mlp", sample_dim, 2, &[32], 7)
                .expect("default map is valid")
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn input_dim(&self) -> usize {
        match &self.kind {
            MapKind::Identity { dim } => *dim,
            MapKind::Linear { matrix } => matrix[0].len(),
            MapKind::FrozenMlp { net } => net.input_dim(),
        }
    }

    /// Feature dimension d_p.
    pub fn feature_dim(&self) -> usize {
        match &self.kind {
            MapKind::Identity { dim } => *dim,
            MapKind::Linear { matrix } => matrix.len(),
            MapKind::FrozenMlp { net } => net.output_dim(),
        }
    }

    /// φ(x).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "perceptual map input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        match &self.kind {
            MapKind::Identity { .. } => Ok(x.to_vec()),
            MapKind::Linear { matrix } => Ok(matrix
                .iter()
                .map(|row| row.iter().zip(x).map(|(&w, &xi)| w * xi).sum())
                .collect()),
            MapKind::FrozenMlp { net, .. } => net.infer(x),
        }
    }

    /// Pullback `J_φ(x)ᵀ · out_grad` for gradients that flow through the map.
    pub fn backprop_input(&self, x: &[f64], out_grad: &[f64]) -> Result<Vec<f64>> {
        if out_grad.len() != self.feature_dim() {
            return Err(Error::ShapeMismatch {
                context: "perceptual map grad",
                expected: self.feature_dim(),
                got: out_grad.len(),
            });
        }
        match &self.kind {
            MapKind::Identity { .. } => Ok(out_grad.to_vec()),
            MapKind::Linear { matrix } => {
                let d = self.input_dim();
                let mut g = vec![0.0; d];
                for (row, &go) in matrix.iter().zip(out_grad) {
                    for (slot, &w) in g.iter_mut().zip(row) {
                        *slot += w * go;
                    }
                }
                Ok(g)
            }
            MapKind::FrozenMlp { net, .. } => {
                let (_, cache) = net.forward(x)?;
                Ok(net.backward(&cache, out_grad)?.input)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_input() {
        let m = PerceptualMap::identity(3);
        assert_eq!(m.apply(&[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn linear_projection() {
        let m = PerceptualMap::linear("proj", vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.apply(&[3.0, -5.0]).unwrap(), vec![3.0]);
        assert_eq!(m.feature_dim(), 1);
    }

    #[test]
    fn frozen_mlp_is_frozen() {
        let m = PerceptualMap::frozen_mlp("f", 2, 2, &[32], 7).unwrap();
        let a = m.apply(&[0.4, -1.2]).unwrap();
        let b = m.apply(&[0.4, -1.2]).unwrap();
        assert_eq!(a, b);
        // Same seed rebuilds the same map.
        let m2 = PerceptualMap::frozen_mlp("f", 2, 2, &[32], 7).unwrap();
        assert_eq!(m2.apply(&[0.4, -1.2]).unwrap(), a);
    }

    /// The default map's sensitivity has wells at the anchors: a step of
    /// fixed size moves the features much less at an anchor than off it.
    #[test]
    fn default_map_is_least_sensitive_at_anchors() {
        let m = PerceptualMap::default_frozen(2);
        let motion = |p: [f64; 2]| -> f64 {
            let h = 0.05;
            let mut acc: f64 = 0.0;
            for delta in [[h, 0.0], [0.0, h]] {
                let a = m.apply(&[p[0] + delta[0], p[1] + delta[1]]).unwrap();
                let b = m.apply(&p).unwrap();
                acc += a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            }
            acc.sqrt()
        };
        let at_anchor = motion([3.0, 0.0]).max(motion([-3.0, 0.0]));
        let off_anchor = motion([3.5, 0.0]).min(motion([0.0, 0.0]));
        assert!(
            at_anchor * 5.0 < off_anchor,
            "anchor {at_anchor} vs off {off_anchor}"
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = PerceptualMap::linear("proj", vec![vec![1.0, 0.0]]).unwrap();
        assert!(m.apply(&[1.0]).is_err());
    }

    #[test]
    fn backprop_matches_finite_differences_through_frozen_net() {
        let m = PerceptualMap::default_frozen(2);
        let x = [0.3, 0.9];
        let w = [1.0, -0.5];
        // loss = w·φ(x); dloss/dx = J_φᵀ w.
        let g = m.backprop_input(&x, &w).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x;
            xp[k] += h;
            let up: f64 = m.apply(&xp).unwrap().iter().zip(&w).map(|(z, wk)| z * wk).sum();
            xp[k] -= 2.0 * h;
            let dn: f64 = m.apply(&xp).unwrap().iter().zip(&w).map(|(z, wk)| z * wk).sum();
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6, "{fd} vs {}", g[k]);
        }
    }

    #[test]
    fn serialization_round_trips() {
        let m = PerceptualMap::default_frozen(2);
        let json = serde_json::to_string(&m).unwrap();
        let back: PerceptualMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back.apply(&[1.0, 1.0]).unwrap(), m.apply(&[1.0, 1.0]).unwrap());
    }
}
