use serde::{Deserialize, Serialize};

use crate::mode::Mode;
use crate::qp::{KktResiduals, QpStatus};

/// One control interval `[t, t + Δt)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    /// `(x, y, v, θ, φ)` at `t`.
    pub state: [f64; 5],
    /// `(u_1, u_2)` at `t`; held over the interval except that in integral
    /// mode `u_2` follows `u̇_2 = ν`.
    pub applied: [f64; 2],
    /// Auxiliary chain state at `t` (empty outside integral mode).
    pub aux: Vec<f64>,
    /// Auxiliary inputs held over the interval.
    pub nu: Vec<f64>,
    pub delta: f64,
    /// Control-point barrier, margin `r + r_b + d`.
    pub b: f64,
    /// Center barrier, margin `r + r_b`.
    pub b_t: f64,
    /// `ψ_0 .. ψ_{m−1}` of the enforced obstacle constraint.
    pub psi: Vec<f64>,
    pub status: QpStatus,
    pub active: Vec<String>,
    /// Steering coefficient of the obstacle row.
    pub obstacle_u1_coeff: f64,
    pub min_hard_slack: f64,
    pub kkt: Option<KktResiduals<f64>>,
}

/// Wall-clock measurements; never part of log equality.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timings {
    /// Row construction, assembly and solve, per step.
    pub controller_ns: Vec<u64>,
}

impl PartialEq for Timings {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Timings {
    pub fn mean_controller_us(&self) -> f64 {
        if self.controller_ns.is_empty() {
            return 0.0;
        }
        self.controller_ns.iter().map(|&n| n as f64).sum::<f64>() / self.controller_ns.len() as f64 / 1e3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryLog {
    pub mode: Mode,
    pub dt: f64,
    pub steps: Vec<StepRecord>,
    pub final_time: f64,
    pub final_state: [f64; 5],
    /// Why the run stopped early on a numerical failure.
    pub aborted: Option<String>,
    pub obstacle_degree: usize,
    pub class_k_count: usize,
    #[serde(skip)]
    pub timings: Timings,
}

impl TrajectoryLog {
    pub fn infeasible_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.status != QpStatus::Optimal).count()
    }

    pub fn all_feasible(&self) -> bool {
        self.infeasible_steps() == 0 && self.aborted.is_none()
    }

    /// Every logged state followed by the final state.
    pub fn states(&self) -> impl Iterator<Item = &[f64; 5]> {
        self.steps.iter().map(|s| &s.state).chain(std::iter::once(&self.final_state))
    }
}
