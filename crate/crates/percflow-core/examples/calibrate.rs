//! Scratch harness for eyeballing the training dynamics: pretrain once,
//! then sweep RLHF variants and print coverage/reward/entropy summaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use percflow_core::analysis::{
    entropy_reward_fit, mode_coverage, MODE_COVERAGE_RADIUS, MODE_COVERAGE_SHARE,
};
use percflow_core::flow::{rollout, CondId, NoiseSchedule, SigmaKind, VelocityModel};
use percflow_core::numeric::Activation;
use percflow_core::perceptual::{perceptual_entropy_estimate, PerceptualMap};
use percflow_core::pretrain::{pretrain, GmmDataset, GmmMode, PretrainConfig};
use percflow_core::rlhf::{
    rlhf_train, RegularizerKind, RegularizerSpec, RewardKind, RewardLandscape, RlhfConfig,
    UpdateStats,
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

struct EvalOut {
    coverage: f64,
    share_right: f64,
    h_perc: f64,
}

fn eval_model(
    model: &VelocityModel,
    ds: &GmmDataset,
    sch: &NoiseSchedule,
    map: &PerceptualMap,
    n: usize,
    seed: u64,
) -> EvalOut {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rolls: Vec<_> = (0..n)
        .map(|_| rollout(model, sch, CondId(0), &mut rng).unwrap())
        .collect();
    let samples: Vec<Vec<f64>> = rolls.iter().map(|t| t.final_x0.clone()).collect();
    let coverage =
        mode_coverage(&samples, ds, CondId(0), MODE_COVERAGE_RADIUS, MODE_COVERAGE_SHARE).unwrap();
    let share_right = samples.iter().filter(|x| x[0] > 0.0).count() as f64 / n as f64;
    let h_perc = perceptual_entropy_estimate(&rolls, map).unwrap().mean;
    EvalOut { coverage, share_right, h_perc }
}

fn avg(xs: &[UpdateStats], f: fn(&UpdateStats) -> f64) -> f64 {
    xs.iter().map(f).sum::<f64>() / xs.len() as f64
}

fn main() {
    let ds = two_mode_ds();
    let ckpt = std::path::Path::new("/tmp/calibrate_pretrained.json");

    let pretrained = if ckpt.exists() {
        VelocityModel::load_json(ckpt).unwrap()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        let mut model =
            VelocityModel::new(2, 1, &[64, 64], Activation::Tanh, 4, &mut rng).unwrap();
        let t0 = std::time::Instant::now();
        pretrain(&mut model, &ds, &PretrainConfig { seed: 42, ..Default::default() }).unwrap();
        eprintln!("pretrained in {:?}", t0.elapsed());
        model.save_json(ckpt).unwrap();
        model
    };

    let land = RewardLandscape::new(vec![RewardKind::TwinPeaks {
        c1: vec![3.0, 0.0],
        c2: vec![-3.0, 0.0],
        scale: 1.0,
    }])
    .unwrap();

    let args: Vec<String> = std::env::args().collect();
    let etas: Vec<f64> = if args.len() > 1 { vec![args[1].parse().unwrap()] } else { vec![0.5] };
    let lrs: Vec<f64> = if args.len() > 2 { vec![args[2].parse().unwrap()] } else { vec![1e-2] };
    let amps: Vec<f64> = if args.len() > 3 { vec![args[3].parse().unwrap()] } else { vec![1.0, 2.0, 4.0] };

    for &amp in &amps {
    let map = PerceptualMap::frozen_from_net(
        "frozen_mlp",
        percflow_core::perceptual::anchored_frozen_net(
            &[[3.0, 0.0], [-3.0, 0.0]],
            percflow_core::perceptual::FrozenNetGains::default().amplified(amp),
        ),
    );
    eprintln!("#### amplification {amp}");
    for &eta in &etas {
        let sch = NoiseSchedule::uniform(10, SigmaKind::Constant { eta }, 1e-3, 1e-3).unwrap();
        let base = eval_model(&pretrained, &ds, &sch, &map, 2000, 999);
        eprintln!(
            "== eta {eta}: pretrained coverage {} share {:.2} H_perc {:.3}",
            base.coverage, base.share_right, base.h_perc
        );
        for &lr in &lrs {
            let mut none_final_h = Vec::new();
            let mut pec_final_h = Vec::new();
            for (name, spec) in [
                ("none", RegularizerSpec::none()),
                ("pec0.10", RegularizerSpec::with_kind(RegularizerKind::Pec { lambda: 0.10 })),
            ] {
                let mut crit_pass = 0;
                for seed in 0..5u64 {
                    let mut model = pretrained.clone();
                    let cfg = RlhfConfig { seed, learning_rate: lr, ..Default::default() };
                    let run =
                        rlhf_train(&mut model, &ds, &land, &map, &sch, &spec, &[CondId(0)], &cfg)
                            .unwrap();
                    let first = &run.stats[..10];
                    let last = &run.stats[run.stats.len() - 10..];
                    let r0 = avg(first, |s| s.mean_raw_reward);
                    let r1 = avg(last, |s| s.mean_raw_reward);
                    let s0 = avg(first, |s| s.std_raw_reward);
                    let s1 = avg(last, |s| s.std_raw_reward);
                    let h0 = avg(first, |s| s.perc_entropy);
                    let h1 = avg(last, |s| s.perc_entropy);
                    let out = eval_model(&model, &ds, &sch, &map, 2000, 777 + seed);
                    let fit = entropy_reward_fit(
                        &run.stats
                            .iter()
                            .map(|s| (s.perc_entropy, s.mean_raw_reward))
                            .collect::<Vec<_>>(),
                    );
                    let (fa, fr2) = fit.map(|f| (f.a, f.r_squared)).unwrap_or((f64::NAN, f64::NAN));
                    let pass = if name == "none" {
                        none_final_h.push(out.h_perc);
                        (r1 - r0 >= 0.1 && out.coverage == 0.5 && s1 < 0.5 * s0) as u32
                    } else {
                        pec_final_h.push(out.h_perc);
                        (r1 - r0 >= 0.05 && out.coverage == 1.0) as u32
                    };
                    crit_pass += pass;
                    eprintln!(
                        "eta {eta} lr {lr} {name} seed {seed}: R {r0:.3}->{r1:.3} std {s0:.3}->{s1:.3} Hp {h0:.3}->{h1:.3} cov {} share {:.2} Hp_eval {:.3} fit a {fa:.3} r2 {fr2:.2} pass {pass}",
                        out.coverage, out.share_right, out.h_perc
                    );
                }
                eprintln!("eta {eta} lr {lr} {name}: criterion pass {crit_pass}/5");
            }
            let wins = none_final_h
                .iter()
                .zip(&pec_final_h)
                .filter(|(n, p)| p > n)
                .count();
            eprintln!("eta {eta} lr {lr} amp {amp}: H_perc(pec) > H_perc(none) in {wins}/5 seed pairs");
        }
    }
    }
}
