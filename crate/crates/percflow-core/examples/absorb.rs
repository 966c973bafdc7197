//! Absorption-time scan: when does each variant lose a mode?

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use percflow_core::analysis::{mode_coverage, MODE_COVERAGE_RADIUS, MODE_COVERAGE_SHARE};
use percflow_core::flow::{rollout, CondId, NoiseSchedule, SigmaKind, VelocityModel};
use percflow_core::perceptual::{anchored_frozen_net, FrozenNetGains, PerceptualMap};
use percflow_core::pretrain::GmmDataset;
use percflow_core::pretrain::GmmMode;
use percflow_core::rlhf::{
    rlhf_train, RegularizerKind, RegularizerSpec, RewardKind, RewardLandscape, RlhfConfig,
};

fn two_mode_ds() -> GmmDataset {
    GmmDataset::new(
        2,
        vec![
            GmmMode { mean: vec![3.0, 0.0], weight: 1.0, std: 0.3 },
            GmmMode { mean: vec![-3.0, 0.0], weight: 1.0, std: 0.3 },
        ],
        vec![vec![0, 1]],
    )
    .unwrap()
}

/// First step after which the trailing-20 mean batch coverage stays < 0.75.
fn absorption_step(cov: &[f64]) -> Option<usize> {
    let w = 20;
    let mut last_ok = 0;
    for i in 0..cov.len().saturating_sub(w) {
        let m: f64 = cov[i..i + w].iter().sum::<f64>() / w as f64;
        if m >= 0.75 {
            last_ok = i + w;
        }
    }
    if last_ok + 1 >= cov.len() {
        None
    } else {
        Some(last_ok)
    }
}

fn main() {
    let ds = two_mode_ds();
    let pretrained =
        VelocityModel::load_json(std::path::Path::new("/tmp/calibrate_pretrained.json")).unwrap();
    let sch = NoiseSchedule::uniform(10, SigmaKind::FlowStyle { eta: 0.7 }, 0.1, 1e-3).unwrap();
    let land = RewardLandscape::new(vec![RewardKind::TwinPeaks {
        c1: vec![3.0, 0.0],
        c2: vec![-3.0, 0.0],
        scale: 0.8,
    }])
    .unwrap();

    let map_for = |offset: f64, gain: f64, amp: f64, ripple: f64| {
        let mut g = FrozenNetGains::default().amplified(amp);
        g.anchor_offset = offset;
        g.anchor_gain = gain;
        g.bridge_out = 0.0;
        if ripple > 0.0 {
            g.ripple_count = 12;
            g.ripple_out = ripple;
        }
        PerceptualMap::frozen_from_net("frozen_mlp", anchored_frozen_net(&[[3.0, 0.0], [-3.0, 0.0]], g))
    };

    let pec = |()| RegularizerSpec::with_kind(RegularizerKind::Pec { lambda: 0.1 });
    let variants: Vec<(String, RegularizerSpec, PerceptualMap)> = vec![
        ("none".into(), RegularizerSpec::none(), map_for(0.4, 6.0, 2.0, 0.0)),
        ("pec_shell".into(), pec(()), map_for(0.4, 6.0, 2.0, 0.0)),
        ("pec_rip15".into(), pec(()), map_for(0.4, 6.0, 2.0, 0.15)),
        ("pec_rip25".into(), pec(()), map_for(0.4, 6.0, 2.0, 0.25)),
    ];

    for lr in [4e-3, 6e-3, 8e-3] {
        for (name, spec, map) in &variants {
            let mut line = format!("lr {lr:<6} {name:<11}:");
            let mut final_covs = Vec::new();
            for seed in 0..8u64 {
                let mut model = pretrained.clone();
                let cfg = RlhfConfig {
                    seed,
                    learning_rate: lr,
                    entropy_eval_rollouts: 0,
                    ..Default::default()
                };
                let run = rlhf_train(&mut model, &ds, &land, map, &sch, spec, &[CondId(0)], &cfg)
                    .unwrap();
                let covs: Vec<f64> = run.stats.iter().map(|s| s.mode_coverage).collect();
                let absorb = absorption_step(&covs);
                let d_r = run.stats[run.stats.len() - 10..]
                    .iter()
                    .map(|s| s.mean_raw_reward)
                    .sum::<f64>()
                    / 10.0
                    - run.stats[..10].iter().map(|s| s.mean_raw_reward).sum::<f64>() / 10.0;
                // Final coverage on 1000 eval rollouts.
                let mut rng = ChaCha8Rng::seed_from_u64(31337 + seed);
                let samples: Vec<Vec<f64>> = (0..1000)
                    .map(|_| rollout(&model, &sch, CondId(0), &mut rng).unwrap().final_x0)
                    .collect();
                let cov = mode_coverage(&samples, &ds, CondId(0), MODE_COVERAGE_RADIUS, MODE_COVERAGE_SHARE)
                    .unwrap();
                final_covs.push(cov);
                match absorb {
                    Some(s) => line.push_str(&format!(" {s:>4}/{cov:.1}/{d_r:+.2}")),
                    None => line.push_str(&format!("    -/{cov:.1}/{d_r:+.2}")),
                }
            }
            let full = final_covs.iter().filter(|&&c| c >= 1.0).count();
            let half = final_covs.iter().filter(|&&c| c <= 0.5).count();
            eprintln!("{line}  | full {full}/8 collapsed {half}/8");
        }
    }
}
