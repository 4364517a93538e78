use serde::Serialize;

use crate::mode::Mode;
use crate::qp::{KktResiduals, QpStatus};

use super::config::ScenarioConfig;
use super::log::TrajectoryLog;

/// Largest excursion beyond each bound; zero when never exceeded.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundViolations {
    pub v: f64,
    pub phi: f64,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub mode: Mode,
    pub steps: usize,
    pub final_time: f64,
    pub final_distance: f64,
    pub reached_goal: bool,
    /// Center clearance minus `r + r_b`.
    pub min_center_clearance: f64,
    /// Control-point clearance minus `r + r_b + d`.
    pub min_control_point_clearance: f64,
    /// Lowest value of each `ψ_i` of the enforced obstacle constraint.
    pub min_psi: Vec<f64>,
    pub bound_violations: BoundViolations,
    /// `Σ (u_1² + u_2²) Δt + p ‖x_p(t_f) − X‖`.
    pub objective: f64,
    pub infeasible_steps: usize,
    pub degenerate_steps: usize,
    pub aborted: Option<String>,
    pub max_kkt: KktResiduals<f64>,
    pub max_abs_u1: f64,
    pub max_abs_obstacle_u1_coeff: f64,
    pub max_delta: f64,
    /// Lowest hard-row slack at the applied decision on optimal steps.
    pub min_hard_slack: f64,
    pub obstacle_degree: usize,
    pub class_k_count: usize,
    /// `min_center_clearance ≥ −1e−3`.
    pub safe: bool,
}

pub const SAFETY_TOLERANCE: f64 = 1e-3;

pub fn safety_metrics(log: &TrajectoryLog, config: &ScenarioConfig) -> Summary {
    let l = &config.limits;
    let (u2_min, u2_max) = config.u2_bounds();
    let over = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);

    let mut min_center = f64::INFINITY;
    let mut min_point = f64::INFINITY;
    let mut viol = BoundViolations::default();
    for x in log.states() {
        min_center = min_center.min(config.center_clearance(x));
        min_point = min_point.min(config.control_point_clearance(x));
        viol.v = viol.v.max(over(x[2], l.v_min, l.v_max));
        viol.phi = viol.phi.max(over(x[4], l.phi_min, l.phi_max));
    }

    let mut min_psi: Vec<f64> = Vec::new();
    let mut max_kkt: KktResiduals<f64> = KktResiduals {
        stationarity: 0.0,
        primal: 0.0,
        complementarity: 0.0,
        dual: 0.0,
    };
    let mut effort = 0.0;
    let (mut max_u1, mut max_coeff, mut max_delta) = (0.0f64, 0.0f64, 0.0f64);
    let mut min_hard_slack = f64::INFINITY;
    for s in &log.steps {
        viol.u1 = viol.u1.max(over(s.applied[0], l.u1_min, l.u1_max));
        viol.u2 = viol.u2.max(over(s.applied[1], u2_min, u2_max));
        for (i, &p) in s.psi.iter().enumerate() {
            match min_psi.get_mut(i) {
                Some(m) => *m = m.min(p),
                None => min_psi.push(p),
            }
        }
        if let Some(k) = &s.kkt {
            max_kkt.stationarity = max_kkt.stationarity.max(k.stationarity);
            max_kkt.primal = max_kkt.primal.max(k.primal);
            max_kkt.complementarity = max_kkt.complementarity.max(k.complementarity);
            max_kkt.dual = max_kkt.dual.max(k.dual);
        }
        if s.status == QpStatus::Optimal {
            min_hard_slack = min_hard_slack.min(s.min_hard_slack);
        }
        effort += (s.applied[0].powi(2) + s.applied[1].powi(2)) * log.dt;
        max_u1 = max_u1.max(s.applied[0].abs());
        max_coeff = max_coeff.max(s.obstacle_u1_coeff.abs());
        max_delta = max_delta.max(s.delta);
    }
    let x = &log.final_state;
    let [gx, gy] = config.target.position;
    let final_distance = (x[0] - gx).hypot(x[1] - gy);

    Summary {
        scenario: config.name.clone(),
        mode: log.mode,
        steps: log.steps.len(),
        final_time: log.final_time,
        final_distance,
        reached_goal: final_distance <= config.target.tolerance,
        min_center_clearance: min_center,
        min_control_point_clearance: min_point,
        min_psi,
        bound_violations: viol,
        objective: effort + config.target.terminal_weight * final_distance,
        infeasible_steps: log.steps.iter().filter(|s| s.status == QpStatus::Infeasible).count(),
        degenerate_steps: log.steps.iter().filter(|s| s.status == QpStatus::Degenerate).count(),
        aborted: log.aborted.clone(),
        max_kkt,
        max_abs_u1: max_u1,
        max_abs_obstacle_u1_coeff: max_coeff,
        max_delta,
        min_hard_slack,
        obstacle_degree: log.obstacle_degree,
        class_k_count: log.class_k_count,
        safe: min_center >= -SAFETY_TOLERANCE,
    }
}
