//! One RLHF update: assemble the clipped surrogate and the spec'd
//! regularizer terms over a batch of rollout groups, take one ascent step.
//!
//! All old-policy quantities (log-probs, transition means) are read from
//! the trajectories themselves, which were rolled out under the frozen
//! snapshot; the model being updated only enters through the fresh
//! transition means μ_θ.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    advantage_prob_extremes, mode_coverage, vendi_score, MODE_COVERAGE_RADIUS,
    MODE_COVERAGE_SHARE,
};
use crate::error::{Error, Result};
use crate::flow::{
    analytic_step_entropy, posterior_mean, posterior_mean_backward, posterior_mean_with_cache,
    transition_logprob, VelocityModel,
};
use crate::numeric::{adam_step, AdamState, GradBundle};
use crate::perceptual::{perceptual_logprob, PerceptualMap};
use crate::pretrain::GmmDataset;
use crate::rlhf::cov::{clip_cov_mask, covariance_scores, kl_ref_penalty, top_fraction_indices};
use crate::rlhf::group::RolloutGroup;
use crate::rlhf::spec::{EntropySpace, RegularizerKind, RegularizerSpec};
use crate::rlhf::surrogate::{clipped_surrogate, ratio};
use crate::flow::NoiseSchedule;

/// Everything an update step needs besides the model and the groups.
pub struct StepContext<'a> {
    pub sch: &'a NoiseSchedule,
    pub map: &'a PerceptualMap,
    pub dataset: &'a GmmDataset,
    /// Frozen pretraining reference, required by `kl_ref`.
    pub reference: Option<&'a VelocityModel>,
}

/// Per-update diagnostics; one CSV row per update.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpdateStats {
    pub step: usize,
    pub mean_raw_reward: f64,
    /// Mean over groups of the within-group population std.
    pub std_raw_reward: f64,
    pub mean_shaped_reward: f64,
    pub clipped_frac: f64,
    pub mean_ratio: f64,
    /// Mean over step indices of the schedule's closed-form entropy.
    pub analytic_entropy: f64,
    /// Old-policy perceptual entropy of this batch under the run's map.
    pub perc_entropy: f64,
    pub mode_coverage: f64,
    pub vendi: f64,
    pub p_adv_max: f64,
    pub p_adv_min: f64,
    /// [min, q25, median, q75, max] of the covariance scores.
    pub cov_score_quantiles: [f64; 5],
    pub ratio_clamp_warnings: usize,
}

impl UpdateStats {
    pub const CSV_HEADER: &'static str = "step,mean_raw_reward,std_raw_reward,mean_shaped_reward,clipped_frac,mean_ratio,analytic_entropy,perc_entropy,mode_coverage,vendi,p_adv_max,p_adv_min";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.mean_raw_reward,
            self.std_raw_reward,
            self.mean_shaped_reward,
            self.clipped_frac,
            self.mean_ratio,
            self.analytic_entropy,
            self.perc_entropy,
            self.mode_coverage,
            self.vendi,
            self.p_adv_max,
            self.p_adv_min
        )
    }
}

/// Aggregates from the gradient pass.
#[derive(Debug, Clone, Default)]
pub struct GradientAggregates {
    pub objective: f64,
    pub mean_ratio: f64,
    pub clipped_frac: f64,
    pub ratio_clamp_warnings: usize,
    pub cov_scores: Vec<f64>,
}

struct FlatTransition<'a> {
    step: &'a crate::flow::TransitionStep,
    condition: crate::flow::CondId,
    advantage: f64,
}

fn flatten(groups: &[RolloutGroup]) -> Vec<FlatTransition<'_>> {
    let mut out = Vec::new();
    for g in groups {
        for (traj, &adv) in g.trajectories.iter().zip(&g.advantages) {
            for step in &traj.steps {
                out.push(FlatTransition {
                    step,
                    condition: g.condition,
                    advantage: adv,
                });
            }
        }
    }
    out
}

/// Objective value and parameter gradients of the *loss* `L = −J` at the
/// current parameters, for one batch of groups produced under the frozen
/// snapshot. Exposed separately from [`rlhf_step`] so tests can compare
/// gradients across regularizer specs directly.
pub fn rlhf_gradient(
    model: &VelocityModel,
    groups: &[RolloutGroup],
    spec: &RegularizerSpec,
    ctx: &StepContext,
) -> Result<(GradBundle, GradientAggregates)> {
    spec.validate()?;
    if groups.is_empty() {
        return Err(Error::EmptyInput("rollout groups"));
    }
    let flat = flatten(groups);
    let n = flat.len();
    let inv_n = 1.0 / n as f64;
    let (eps_low, eps_high) = spec.clip_bounds();

    // Covariance scores over stored old-policy log-probs; θ-free, so masks
    // and selections are fixed for the whole step.
    let old_logps: Vec<f64> = flat.iter().map(|t| t.step.log_prob).collect();
    let advs: Vec<f64> = flat.iter().map(|t| t.advantage).collect();
    let cov_scores = covariance_scores(&old_logps, &advs)?;

    let mask: Option<Vec<bool>> = match spec.kind {
        RegularizerKind::ClipCov { rate } => Some(clip_cov_mask(&cov_scores, rate)?),
        _ => None,
    };
    let kl_cov_selected: Option<Vec<bool>> = match spec.kind {
        RegularizerKind::KlCov { rate, .. } => {
            let mut sel = vec![false; n];
            for i in top_fraction_indices(&cov_scores, rate)? {
                sel[i] = true;
            }
            Some(sel)
        }
        _ => None,
    };

    let mut grads = GradBundle::zeros_like(model.net());
    let mut agg = GradientAggregates {
        cov_scores: cov_scores.clone(),
        ..Default::default()
    };
    let mut objective = 0.0;

    for (i, tr) in flat.iter().enumerate() {
        let st = tr.step;
        let s = st.time;
        let dt = ctx.sch.dt(st.step_index);
        let sigma2 = ctx.sch.sigma().sigma2(s);
        let s2dt = st.sigma2_dt;

        let (mu_new, cache) =
            posterior_mean_with_cache(model, &st.state_in, s, dt, sigma2, tr.condition)?;
        if mu_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: st.step_index,
                limit: f64::INFINITY,
            });
        }
        let new_logp = transition_logprob(&st.state_out, &mu_new, s2dt)?;
        let (rho, clamp_warn) = ratio(new_logp, st.log_prob);
        if clamp_warn {
            agg.ratio_clamp_warnings += 1;
        }
        agg.mean_ratio += rho * inv_n;

        let masked = mask.as_ref().is_some_and(|m| m[i]);
        let (surr, clip_binding) = clipped_surrogate(rho, tr.advantage, eps_low, eps_high);
        if clip_binding {
            agg.clipped_frac += inv_n;
        }

        // d loss / d μ for this transition, all terms combined.
        let mut dl_dmu = vec![0.0; mu_new.len()];
        if !masked {
            objective += surr * inv_n;
            if !clip_binding {
                // ∂(ρA)/∂μ = A·ρ·(x_out − μ)/σ²Δt; loss flips the sign.
                let coeff = -tr.advantage * rho * inv_n / s2dt;
                for (slot, (&xo, &mu)) in dl_dmu.iter_mut().zip(st.state_out.iter().zip(&mu_new)) {
                    *slot += coeff * (xo - mu);
                }
            }
        }

        match spec.kind {
            RegularizerKind::KlRef { weight } => {
                let reference = ctx.reference.ok_or_else(|| {
                    Error::InvalidParameter("kl_ref requires a reference model".into())
                })?;
                let mu_ref =
                    posterior_mean(reference, &st.state_in, s, dt, sigma2, tr.condition)?;
                let kl = kl_ref_penalty(&mu_new, &mu_ref, s2dt);
                objective -= weight * kl * inv_n;
                let coeff = weight * inv_n / s2dt;
                for (slot, (&mu, &mr)) in dl_dmu.iter_mut().zip(mu_new.iter().zip(&mu_ref)) {
                    *slot += coeff * (mu - mr);
                }
            }
            RegularizerKind::KlCov { beta, .. } => {
                if kl_cov_selected.as_ref().is_some_and(|sel| sel[i]) {
                    // Reverse KL to the snapshot's own transition mean.
                    let kl = kl_ref_penalty(&mu_new, &st.mean, s2dt);
                    objective -= beta * kl;
                    let coeff = beta / s2dt;
                    for (slot, (&mu, &mo)) in dl_dmu.iter_mut().zip(mu_new.iter().zip(&st.mean)) {
                        *slot += coeff * (mu - mo);
                    }
                }
            }
            RegularizerKind::EntropyReg { space, weight } => match space {
                EntropySpace::Generation => {
                    // Closed-form entropy is constant in θ: adds value, no
                    // gradient — by the schedule-fixed covariance.
                    objective +=
                        weight * analytic_step_entropy(mu_new.len(), s2dt) * inv_n;
                }
                EntropySpace::Perceptual => {
                    let z_out = ctx.map.apply(&st.state_out)?;
                    let z_mu = ctx.map.apply(&mu_new)?;
                    let lp = perceptual_logprob(&z_out, &z_mu, s2dt)?;
                    objective += weight * (-lp) * inv_n;
                    // ∂(−log p_perc)/∂μ = −J_φᵀ(z_out − φ(μ))/σ²Δt.
                    let diff: Vec<f64> =
                        z_out.iter().zip(&z_mu).map(|(&a, &b)| a - b).collect();
                    let pull = ctx.map.backprop_input(&mu_new, &diff)?;
                    let coeff = weight * inv_n / s2dt;
                    for (slot, &p) in dl_dmu.iter_mut().zip(&pull) {
                        *slot += coeff * p;
                    }
                }
            },
            _ => {}
        }

        if dl_dmu.iter().any(|&g| g != 0.0) {
            let tg = posterior_mean_backward(model, &cache, &dl_dmu)?;
            grads.add_scaled(&tg, 1.0);
        }
    }

    agg.objective = objective;
    Ok((grads, agg))
}

fn quantiles(values: &[f64]) -> [f64; 5] {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
    [pick(0.0), pick(0.25), pick(0.5), pick(0.75), pick(1.0)]
}

/// One gradient-ascent update on the mean surrogate plus the spec'd
/// regularizer terms; records the batch diagnostics.
pub fn rlhf_step(
    model: &mut VelocityModel,
    opt: &mut AdamState,
    groups: &[RolloutGroup],
    spec: &RegularizerSpec,
    ctx: &StepContext,
    step: usize,
) -> Result<UpdateStats> {
    let (grads, agg) = rlhf_gradient(model, groups, spec, ctx)?;
    adam_step(model.net_mut(), &grads, opt)?;
    batch_stats(groups, ctx, step, &agg)
}

/// Diagnostics over a batch of groups (usable without an update).
pub fn batch_stats(
    groups: &[RolloutGroup],
    ctx: &StepContext,
    step: usize,
    agg: &GradientAggregates,
) -> Result<UpdateStats> {
    let n_traj: usize = groups.iter().map(|g| g.len()).sum();
    let mean_raw: f64 = groups
        .iter()
        .flat_map(|g| g.raw_rewards.iter())
        .sum::<f64>()
        / n_traj as f64;
    let mean_shaped: f64 = groups
        .iter()
        .flat_map(|g| g.shaped_rewards.iter())
        .sum::<f64>()
        / n_traj as f64;
    let std_raw: f64 = groups
        .iter()
        .map(|g| {
            let k = g.raw_rewards.len() as f64;
            let m = g.raw_rewards.iter().sum::<f64>() / k;
            (g.raw_rewards.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / k).sqrt()
        })
        .sum::<f64>()
        / groups.len() as f64;

    let d = groups[0].trajectories[0].final_x0.len();
    let analytic: f64 = (1..=ctx.sch.num_steps())
        .map(|i| analytic_step_entropy(d, ctx.sch.sigma2_dt(i).expect("valid step")))
        .sum::<f64>()
        / ctx.sch.num_steps() as f64;

    // Old-policy perceptual entropy of the batch under the run's map.
    let mut perc_terms = Vec::new();
    for g in groups {
        for t in &g.trajectories {
            for st in &t.steps {
                let z_out = ctx.map.apply(&st.state_out)?;
                let z_mu = ctx.map.apply(&st.mean)?;
                perc_terms.push(-perceptual_logprob(&z_out, &z_mu, st.sigma2_dt)?);
            }
        }
    }
    let perc_entropy = perc_terms.iter().sum::<f64>() / perc_terms.len() as f64;

    // Mode coverage per condition present in the batch, averaged.
    let mut conds: Vec<_> = groups.iter().map(|g| g.condition).collect();
    conds.sort_by_key(|c| c.0);
    conds.dedup();
    let mut coverage = 0.0;
    for &c in &conds {
        let samples: Vec<Vec<f64>> = groups
            .iter()
            .filter(|g| g.condition == c)
            .flat_map(|g| g.trajectories.iter().map(|t| t.final_x0.clone()))
            .collect();
        coverage += mode_coverage(
            &samples,
            ctx.dataset,
            c,
            MODE_COVERAGE_RADIUS,
            MODE_COVERAGE_SHARE,
        )?;
    }
    coverage /= conds.len() as f64;

    let features: Vec<Vec<f64>> = groups
        .iter()
        .flat_map(|g| g.trajectories.iter())
        .map(|t| ctx.map.apply(&t.final_x0))
        .collect::<Result<_>>()?;
    let vendi = vendi_score(&features)?;

    let mut p_max = 0.0;
    let mut p_min = 0.0;
    for g in groups {
        let (hi, lo) = advantage_prob_extremes(&g.advantages)?;
        p_max += hi;
        p_min += lo;
    }
    p_max /= groups.len() as f64;
    p_min /= groups.len() as f64;

    Ok(UpdateStats {
        step,
        mean_raw_reward: mean_raw,
        std_raw_reward: std_raw,
        mean_shaped_reward: mean_shaped,
        clipped_frac: agg.clipped_frac,
        mean_ratio: agg.mean_ratio,
        analytic_entropy: analytic,
        perc_entropy,
        mode_coverage: coverage,
        vendi,
        p_adv_max: p_max,
        p_adv_min: p_min,
        cov_score_quantiles: if agg.cov_scores.is_empty() {
            [0.0; 5]
        } else {
            quantiles(&agg.cov_scores)
        },
        ratio_clamp_warnings: agg.ratio_clamp_warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::CondId;
    use crate::numeric::Activation;
    use crate::rlhf::group::sample_group;
    use crate::rlhf::landscape::{RewardKind, RewardLandscape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lab() -> (VelocityModel, NoiseSchedule, RewardLandscape, PerceptualMap, GmmDataset) {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let ds = GmmDataset::default_lab();
        let model =
            VelocityModel::new(2, ds.n_conditions(), &[16], Activation::Tanh, 4, &mut rng)
                .unwrap();
        let sch = NoiseSchedule::default_constant();
        let land = RewardLandscape::new(vec![
            RewardKind::TwinPeaks { c1: vec![3.0, 0.0], c2: vec![-3.0, 0.0], scale: 1.0 },
            RewardKind::Peak { center: vec![3.0, 3.0], scale: 1.0 },
        ])
        .unwrap();
        let map = PerceptualMap::default_frozen(2);
        (model, sch, land, map, ds)
    }

    fn groups_for(
        model: &VelocityModel,
        sch: &NoiseSchedule,
        land: &RewardLandscape,
        map: &PerceptualMap,
        spec: &RegularizerSpec,
        seed: u64,
        k: usize,
    ) -> Vec<RolloutGroup> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        vec![sample_group(model, sch, land, map, spec, CondId(0), k, &mut rng).unwrap()]
    }

    #[test]
    fn zero_advantages_freeze_parameters() {
        let (mut model, sch, _land, map, ds) = lab();
        // Constant reward → std floor → all-zero advantages.
        let land = RewardLandscape::new(vec![
            RewardKind::Linear { w: vec![0.0, 0.0] },
            RewardKind::Linear { w: vec![0.0, 0.0] },
        ])
        .unwrap();
        let spec = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &spec, 3, 6);
        assert!(groups[0].advantages.iter().all(|&a| a == 0.0));
        let before = model.net().layers()[0].weights.clone();
        let mut opt = AdamState::new(model.net(), 1e-3);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let stats = rlhf_step(&mut model, &mut opt, &groups, &spec, &ctx, 1).unwrap();
        assert_eq!(model.net().layers()[0].weights, before);
        assert_eq!(stats.clipped_frac, 0.0);
    }

    #[test]
    fn on_policy_start_has_unit_ratios() {
        let (mut model, sch, land, map, ds) = lab();
        let spec = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &spec, 4, 8);
        let mut opt = AdamState::new(model.net(), 1e-3);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let stats = rlhf_step(&mut model, &mut opt, &groups, &spec, &ctx, 1).unwrap();
        assert!((stats.mean_ratio - 1.0).abs() < 1e-12);
        assert_eq!(stats.clipped_frac, 0.0);
        assert_eq!(stats.ratio_clamp_warnings, 0);
    }

    #[test]
    fn on_policy_gradient_matches_reinforce_finite_differences() {
        // At θ = θ_old the surrogate gradient is the REINFORCE gradient
        // (1/N)·Σ A·∇logp. Finite-difference the mean of A·logp directly.
        let (model, sch, land, map, ds) = lab();
        let spec = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &spec, 5, 6);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let (grads, _) = rlhf_gradient(&model, &groups, &spec, &ctx).unwrap();

        let reinforce_value = |m: &VelocityModel| -> f64 {
            let mut acc = 0.0;
            let mut n = 0usize;
            for g in &groups {
                for (t, &a) in g.trajectories.iter().zip(&g.advantages) {
                    for st in &t.steps {
                        let s = st.time;
                        let dt = sch.dt(st.step_index);
                        let sigma2 = sch.sigma().sigma2(s);
                        let mu =
                            posterior_mean(m, &st.state_in, s, dt, sigma2, g.condition).unwrap();
                        let lp = transition_logprob(&st.state_out, &mu, st.sigma2_dt).unwrap();
                        acc += a * lp;
                        n += 1;
                    }
                }
            }
            acc / n as f64
        };

        let h = 1e-6;
        let mut checked = 0;
        for li in 0..model.net().layers().len() {
            let n_w = model.net().layers()[li].weights.len();
            for slot in (0..n_w).step_by(17) {
                let mut p = model.clone();
                p.net_mut().layers_mut()[li].weights[slot] += h;
                let up = reinforce_value(&p);
                p.net_mut().layers_mut()[li].weights[slot] -= 2.0 * h;
                let dn = reinforce_value(&p);
                let fd = (up - dn) / (2.0 * h);
                // grads hold ∇(−J); REINFORCE ascent direction is +fd.
                let an = -grads.weights[li][slot];
                let denom = an.abs().max(fd.abs()).max(1e-10);
                assert!(
                    ((fd - an) / denom).abs() < 1e-3,
                    "layer {li} slot {slot}: fd {fd} vs {an}"
                );
                checked += 1;
            }
        }
        assert!(checked >= 10);
    }

    #[test]
    fn native_entropy_bonus_moves_no_gradient() {
        let (model, sch, land, map, ds) = lab();
        let base_spec = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &base_spec, 6, 8);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let (g0, a0) = rlhf_gradient(&model, &groups, &base_spec, &ctx).unwrap();
        let ent_spec = RegularizerSpec::with_kind(RegularizerKind::EntropyReg {
            space: EntropySpace::Generation,
            weight: 0.05,
        });
        let (g1, a1) = rlhf_gradient(&model, &groups, &ent_spec, &ctx).unwrap();
        for (w0, w1) in g0.weights.iter().zip(&g1.weights) {
            assert_eq!(w0, w1);
        }
        for (b0, b1) in g0.biases.iter().zip(&g1.biases) {
            assert_eq!(b0, b1);
        }
        // The bonus does change the objective value.
        assert!(a1.objective != a0.objective);
    }

    #[test]
    fn perceptual_entropy_bonus_does_move_gradient() {
        let (model, sch, land, map, ds) = lab();
        let base = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &base, 7, 8);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let (g0, _) = rlhf_gradient(&model, &groups, &base, &ctx).unwrap();
        let spec = RegularizerSpec::with_kind(RegularizerKind::EntropyReg {
            space: EntropySpace::Perceptual,
            weight: 0.05,
        });
        let (g1, _) = rlhf_gradient(&model, &groups, &spec, &ctx).unwrap();
        let differs = g0
            .weights
            .iter()
            .flatten()
            .zip(g1.weights.iter().flatten())
            .any(|(a, b)| a != b);
        assert!(differs);
    }

    #[test]
    fn clip_cov_masked_transitions_contribute_zero_gradient() {
        // Finite-difference the masked objective: moving a parameter must
        // change it exactly as the analytic gradient predicts, and the
        // masked transitions must not appear.
        let (model, sch, land, map, ds) = lab();
        let spec = RegularizerSpec::with_kind(RegularizerKind::ClipCov { rate: 0.25 });
        let groups = groups_for(&model, &sch, &land, &map, &spec, 8, 8);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let (grads, _) = rlhf_gradient(&model, &groups, &spec, &ctx).unwrap();

        let h = 1e-6;
        let mut checked = 0;
        for li in 0..model.net().layers().len() {
            let n_w = model.net().layers()[li].weights.len();
            for slot in (0..n_w).step_by(23) {
                let mut p = model.clone();
                p.net_mut().layers_mut()[li].weights[slot] += h;
                let (_, up) = rlhf_gradient(&p, &groups, &spec, &ctx).unwrap();
                p.net_mut().layers_mut()[li].weights[slot] -= 2.0 * h;
                let (_, dn) = rlhf_gradient(&p, &groups, &spec, &ctx).unwrap();
                let fd = (up.objective - dn.objective) / (2.0 * h);
                let an = -grads.weights[li][slot];
                let denom = an.abs().max(fd.abs()).max(1e-10);
                assert!(
                    ((fd - an) / denom).abs() < 1e-3,
                    "layer {li} slot {slot}: fd {fd} vs analytic {an}"
                );
                checked += 1;
            }
        }
        assert!(checked >= 8);
    }

    #[test]
    fn kl_ref_requires_reference_model() {
        let (model, sch, land, map, ds) = lab();
        let spec = RegularizerSpec::with_kind(RegularizerKind::KlRef { weight: 0.001 });
        let groups = groups_for(&model, &sch, &land, &map, &spec, 9, 4);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        assert!(rlhf_gradient(&model, &groups, &spec, &ctx).is_err());
    }

    #[test]
    fn kl_cov_zero_value_and_gradient_at_snapshot_nonzero_away() {
        let (model, sch, land, map, ds) = lab();
        let spec = RegularizerSpec::with_kind(RegularizerKind::KlCov { rate: 0.25, beta: 1.0 });
        let base = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &spec, 10, 8);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        // At θ = θ_old the penalty is 0 and the gradients coincide with none.
        let (g_kl, a_kl) = rlhf_gradient(&model, &groups, &spec, &ctx).unwrap();
        let (g_none, a_none) = rlhf_gradient(&model, &groups, &base, &ctx).unwrap();
        assert!((a_kl.objective - a_none.objective).abs() < 1e-15);
        for (a, b) in g_kl.weights.iter().flatten().zip(g_none.weights.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
        // Away from the snapshot the penalty bites.
        let mut moved = model.clone();
        for l in moved.net_mut().layers_mut() {
            l.biases.iter_mut().for_each(|b| *b += 0.05);
        }
        let (_, a_moved_kl) = rlhf_gradient(&moved, &groups, &spec, &ctx).unwrap();
        let (_, a_moved_none) = rlhf_gradient(&moved, &groups, &base, &ctx).unwrap();
        assert!(a_moved_kl.objective < a_moved_none.objective);
    }

    #[test]
    fn stats_row_has_expected_shape() {
        let (mut model, sch, land, map, ds) = lab();
        let spec = RegularizerSpec::none();
        let groups = groups_for(&model, &sch, &land, &map, &spec, 11, 8);
        let mut opt = AdamState::new(model.net(), 1e-3);
        let ctx = StepContext { sch: &sch, map: &map, dataset: &ds, reference: None };
        let stats = rlhf_step(&mut model, &mut opt, &groups, &spec, &ctx, 42).unwrap();
        let row = stats.csv_row();
        assert_eq!(row.split(',').count(), UpdateStats::CSV_HEADER.split(',').count());
        assert!(row.starts_with("42,"));
        assert!(stats.vendi >= 1.0);
        assert!((0.0..=1.0).contains(&stats.mode_coverage));
        assert!(stats.p_adv_max >= stats.p_adv_min);
    }
}
