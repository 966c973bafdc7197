//! Axis-weighting experiment for the anchored bowl map: which mix of x/y
//! sensitivity gives both PEC protection and a tight entropy-reward fit?

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use percflow_core::analysis::{
    entropy_reward_fit, mode_coverage, MODE_COVERAGE_RADIUS, MODE_COVERAGE_SHARE,
};
use percflow_core::flow::{rollout, CondId, NoiseSchedule, SigmaKind, VelocityModel};
use percflow_core::numeric::{Activation, Layer, Mlp};
use percflow_core::perceptual::{perceptual_entropy_estimate, PerceptualMap};
use percflow_core::pretrain::{GmmDataset, GmmMode};
use percflow_core::rlhf::{
    rlhf_train, RegularizerKind, RegularizerSpec, RewardKind, RewardLandscape, RlhfConfig,
    UpdateStats,
};

/// Anchored bowls with separate x/y output weights.
fn bowl_net(anchors: &[[f64; 2]], g: f64, o: f64, out_x: f64, out_y: f64) -> Mlp {
    let mut rows: Vec<([f64; 2], f64, f64, usize)> = Vec::new();
    for c in anchors {
        for (axis, out) in [(0usize, out_x), (1usize, out_y)] {
            if out == 0.0 {
                continue;
            }
            for dir in [1.0f64, -1.0] {
                let mut w = [0.0; 2];
                w[axis] = g;
                let b = -g * (c[axis] - dir * o);
                rows.push((w, b, dir * out, axis));
            }
        }
    }
    let n = rows.len();
    let mut w1 = Vec::new();
    let mut b1 = Vec::new();
    let mut w2 = vec![0.0; 2 * n];
    for (j, (w, b, out, row)) in rows.iter().enumerate() {
        w1.extend_from_slice(w);
        b1.push(*b);
        w2[row * n + j] = *out;
    }
    Mlp::from_parts(
        vec![2, n, 2],
        Activation::Tanh,
        vec![
            Layer { in_dim: 2, out_dim: n, weights: w1, biases: b1 },
            Layer { in_dim: n, out_dim: 2, weights: w2, biases: vec![0.0; 2] },
        ],
    )
    .unwrap()
}

fn avg(xs: &[UpdateStats], f: fn(&UpdateStats) -> f64) -> f64 {
    xs.iter().map(f).sum::<f64>() / xs.len() as f64
}

fn main() {
    let ds = GmmDataset::new(
        2,
        vec![
            GmmMode { mean: vec![3.0, 0.0], weight: 1.0, std: 0.3 },
            GmmMode { mean: vec![-3.0, 0.0], weight: 1.0, std: 0.3 },
        ],
        vec![vec![0, 1]],
    )
    .unwrap();
    let pretrained =
        VelocityModel::load_json(std::path::Path::new("/tmp/calibrate_pretrained.json")).unwrap();
    let sch = NoiseSchedule::uniform(10, SigmaKind::FlowStyle { eta: 0.7 }, 0.1, 1e-3).unwrap();
    let scale: f64 = std::env::args().nth(1).map(|a| a.parse().unwrap()).unwrap_or(0.6);
    let land = RewardLandscape::new(vec![RewardKind::TwinPeaks {
        c1: vec![3.0, 0.0],
        c2: vec![-3.0, 0.0],
        scale,
    }])
    .unwrap();
    let anchors = [[3.0, 0.0], [-3.0, 0.0]];

    let variants: Vec<(String, PerceptualMap)> = vec![
        ("x10_y10".into(), PerceptualMap::frozen_from_net("m", bowl_net(&anchors, 2.0, 1.0, 1.0, 1.0))),
        ("x06_y16".into(), PerceptualMap::frozen_from_net("m", bowl_net(&anchors, 2.0, 1.0, 0.6, 1.6))),
        ("x00_y16".into(), PerceptualMap::frozen_from_net("m", bowl_net(&anchors, 2.0, 1.0, 0.0, 1.6))),
        ("x03_y13".into(), PerceptualMap::frozen_from_net("m", bowl_net(&anchors, 2.0, 1.0, 0.3, 1.3))),
    ];

    for (name, map) in &variants {
        let mut fit_ok = 0;
        let mut c3_ok = 0;
        let mut lines = Vec::new();
        for seed in 0..5u64 {
            let cfg = RlhfConfig {
                seed,
                learning_rate: 4e-3,
                entropy_eval_rollouts: 256,
                ..Default::default()
            };
            let mut m_none = pretrained.clone();
            let run_none = rlhf_train(
                &mut m_none, &ds, &land, map, &sch, &RegularizerSpec::none(), &[CondId(0)], &cfg,
            )
            .unwrap();
            let pts: Vec<(f64, f64)> = run_none
                .stats
                .iter()
                .map(|s| (s.perc_entropy, s.mean_raw_reward))
                .collect();
            let fit = entropy_reward_fit(&pts).unwrap();
            fit_ok += (fit.a > 0.0 && fit.r_squared >= 0.8) as u32;

            let mut m_pec = pretrained.clone();
            let run_pec = rlhf_train(
                &mut m_pec,
                &ds,
                &land,
                map,
                &sch,
                &RegularizerSpec::with_kind(RegularizerKind::Pec { lambda: 0.10 }),
                &[CondId(0)],
                &cfg,
            )
            .unwrap();
            let dr_p = avg(&run_pec.stats[run_pec.stats.len() - 10..], |s| s.mean_raw_reward)
                - avg(&run_pec.stats[..10], |s| s.mean_raw_reward);
            let mut rng = ChaCha8Rng::seed_from_u64(900_000 + seed);
            let rolls: Vec<_> = (0..2000)
                .map(|_| rollout(&m_pec, &sch, CondId(0), &mut rng).unwrap())
                .collect();
            let samples: Vec<Vec<f64>> = rolls.iter().map(|t| t.final_x0.clone()).collect();
            let cov = mode_coverage(&samples, &ds, CondId(0), MODE_COVERAGE_RADIUS, MODE_COVERAGE_SHARE)
                .unwrap();
            let hp_p = perceptual_entropy_estimate(&rolls[..500], map).unwrap().mean;
            c3_ok += (cov == 1.0 && dr_p >= 0.05) as u32;
            lines.push(format!(
                "  seed {seed}: fit a {:+.3} r2 {:.3} | pec cov {cov} dR {dr_p:+.3} Hp {hp_p:+.2}",
                fit.a, fit.r_squared
            ));
        }
        eprintln!("### {name}: fit {fit_ok}/5 c3 {c3_ok}/5");
        for l in lines {
            eprintln!("{l}");
        }
    }
}
