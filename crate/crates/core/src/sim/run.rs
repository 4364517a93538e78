use std::time::Instant;

use crate::error::Result;
use crate::integrate::step_integrate;
use crate::qp::ConstraintRef;
use crate::scalar::Real;

use super::config::ScenarioConfig;
use super::controller::Controller;
use super::log::{StepRecord, Timings, TrajectoryLog};

/// Runs the scenario in `f64`.
pub fn run(config: &ScenarioConfig) -> Result<TrajectoryLog> {
    run_with::<f64>(config)
}

/// Closed loop: each step builds the mode's rows, solves the QP, holds the
/// decision over `Δt` and integrates the controller state.
///
/// Stops at `t_final`, on reaching the target tolerance, or when the state
/// becomes non-finite (recorded in `aborted`).
pub fn run_with<T: Real>(config: &ScenarioConfig) -> Result<TrajectoryLog> {
    let ctrl = Controller::<T>::new(config)?;
    let lit = T::lit;
    let x0: Vec<T> = config.initial.state.iter().map(|&v| lit(v)).collect();
    let mut y = ctrl.initial_state(&x0)?;
    let dt = lit(config.dt);
    let steps = (config.t_final / config.dt).round() as usize;
    let target = config.target.position;
    let q = ctrl.decision_labels().len();
    let mut previous = vec![T::zero(); q];
    let mut records = Vec::with_capacity(steps);
    let mut timings = Timings::default();
    let mut aborted = None;
    let to_f64 = |v: &[T]| -> Vec<f64> { v.iter().map(|x| x.to_f64_lossy()).collect() };
    let base5 = |y: &[T]| -> [f64; 5] { std::array::from_fn(|i| y[i].to_f64_lossy()) };

    let mut k = 0;
    while k < steps {
        let x = base5(&y);
        if (x[0] - target[0]).hypot(x[1] - target[1]) <= config.target.tolerance {
            break;
        }
        let t = k as f64 * config.dt;
        let started = Instant::now();
        let decision = match ctrl.step(&y, &previous) {
            Ok(d) => d,
            Err(e) => {
                aborted = Some(format!("t = {t}: {e}"));
                break;
            }
        };
        timings.controller_ns.push(started.elapsed().as_nanos() as u64);

        let applied = ctrl.applied_control(&y, &decision.decision);
        let aux = y[5..].to_vec();
        let nu = if ctrl.augmented().is_some() {
            vec![decision.decision[1].to_f64_lossy()]
        } else {
            Vec::new()
        };
        let psi = ctrl.psi_values(&y).map(|p| to_f64(&p)).unwrap_or_default();
        let active = decision
            .solution
            .active
            .iter()
            .map(|r| match r {
                ConstraintRef::Row(i) => decision
                    .hard_rows
                    .get(*i)
                    .map_or_else(|| "clf".to_string(), |row| row.tag.clone()),
                ConstraintRef::Lower(j) => format!("{} lower", label(&ctrl, *j)),
                ConstraintRef::Upper(j) => format!("{} upper", label(&ctrl, *j)),
            })
            .collect();
        records.push(StepRecord {
            t,
            state: x,
            applied: [applied[0].to_f64_lossy(), applied[1].to_f64_lossy()],
            aux: to_f64(&aux),
            nu,
            delta: decision.delta.to_f64_lossy(),
            b: ctrl.control_point_barrier(&y).map_or(f64::NAN, |v| v.to_f64_lossy()),
            b_t: ctrl.center_barrier(&y).map_or(f64::NAN, |v| v.to_f64_lossy()),
            psi,
            status: decision.solution.status,
            active,
            obstacle_u1_coeff: decision.obstacle_row.coeffs[0].to_f64_lossy(),
            min_hard_slack: decision.min_hard_slack.to_f64_lossy(),
            kkt: decision.kkt.map(|k| crate::qp::KktResiduals {
                stationarity: k.stationarity.to_f64_lossy(),
                primal: k.primal.to_f64_lossy(),
                complementarity: k.complementarity.to_f64_lossy(),
                dual: k.dual.to_f64_lossy(),
            }),
        });

        match step_integrate(ctrl.system(), &y, &decision.decision, dt, config.integrator) {
            Ok(next) => y = next,
            Err(e) => {
                aborted = Some(format!("t = {t}: {e}"));
                k += 1;
                break;
            }
        }
        previous = decision.decision;
        k += 1;
    }

    Ok(TrajectoryLog {
        mode: config.mode,
        dt: config.dt,
        steps: records,
        final_time: k as f64 * config.dt,
        final_state: base5(&y),
        aborted,
        obstacle_degree: ctrl.obstacle_degree(),
        class_k_count: ctrl.class_k_count(),
        timings,
    })
}

fn label<T: Real>(ctrl: &Controller<T>, j: usize) -> String {
    ctrl.decision_labels()
        .get(j)
        .cloned()
        .unwrap_or_else(|| "delta".to_string())
}
