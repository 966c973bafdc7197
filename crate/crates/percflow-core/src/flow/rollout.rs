//! Full reverse-time rollouts: the policy's unit of account.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::model::{CondId, VelocityModel};
use crate::flow::schedule::NoiseSchedule;
use crate::flow::transition::{sample_transition, standard_normal_vec, TransitionStep};

/// A complete trajectory from the standard-normal init down to the sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub condition: CondId,
    pub init: Vec<f64>,
    /// Steps in sampling order (step_index T down to 1).
    pub steps: Vec<TransitionStep>,
    pub final_x0: Vec<f64>,
}

impl Trajectory {
    /// Sum of per-step log-densities under the policy that produced it.
    pub fn total_log_prob(&self) -> f64 {
        self.steps.iter().map(|s| s.log_prob).sum()
    }
}

/// Sample a trajectory: `x_T ~ N(0, I)` followed by the chained transitions.
pub fn rollout<R: Rng + ?Sized>(
    model: &VelocityModel,
    sch: &NoiseSchedule,
    c: CondId,
    rng: &mut R,
) -> Result<Trajectory> {
    let d = model.sample_dim();
    let init = standard_normal_vec(d, rng);
    let mut steps = Vec::with_capacity(sch.num_steps());
    let mut x = init.clone();
    for i in sch.sampling_order() {
        let step = sample_transition(model, &x, i, sch, c, rng)?;
        x = step.state_out.clone();
        steps.push(step);
    }
    Ok(Trajectory {
        condition: c,
        init,
        steps,
        final_x0: x,
    })
}

/// Flat CSV serialization, one row per step:
/// `run_id,condition,step_index,s,x_t_*,mu_*,x_out_*,log_prob`.
pub fn write_trajectories_csv<W: Write>(
    out: &mut W,
    run_id: &str,
    trajectories: &[Trajectory],
) -> Result<()> {
    let d = trajectories
        .first()
        .map(|t| t.init.len())
        .ok_or(Error::EmptyInput("trajectories"))?;
    let mut header = String::from("run_id,condition,step_index,s");
    for (prefix, _) in [("x_t", 0), ("mu", 1), ("x_out", 2)] {
        for k in 0..d {
            header.push_str(&format!(",{prefix}_{k}"));
        }
    }
    header.push_str(",log_prob");
    writeln!(out, "{header}")?;
    for t in trajectories {
        for s in &t.steps {
            let mut row = format!("{run_id},{},{},{}", t.condition.0, s.step_index, s.time);
            for v in s.state_in.iter().chain(&s.mean).chain(&s.state_out) {
                row.push_str(&format!(",{v}"));
            }
            row.push_str(&format!(",{}", s.log_prob));
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}
