use crate::autodiff::ScalarField;
use crate::barrier::{
    build_psi_sequence, detect_relative_degree_set, ClassK, ConstraintRow, HocbfSpec, ProbeSettings,
    PsiSequence,
};
use crate::clf::{clf_row, unicycle_steering_clf, ClfSpec, SpeedChannel, SteeringGains};
use crate::dynamics::{
    clamp_to_bounds, make_unicycle, AffineSystem, AugmentedSystem, ControlBounds, UnicycleParams,
};
use crate::error::{Error, Result};
use crate::integral::{build_ihocbf, IntegralHocbf, IntegralOptions};
use crate::mode::Mode;
use crate::qp::{assemble_step_qp, kkt_residuals, solve, KktResiduals, QpSolution, QpStatus, StepQpInput};
use crate::scalar::Real;
use crate::transform::{make_center_transform, CenterTransformParams, TransformSpec};

use super::config::ScenarioConfig;

#[derive(Clone, Debug)]
enum ObstacleConstraint<T> {
    Standard(PsiSequence<T>),
    Integral(Box<IntegralHocbf<T>>),
    Transform(Box<TransformSpec<T>>),
}

/// Per-step CLF-HOCBF-QP controller for one mode of a scenario.
///
/// The controller state is the base state in standard and transform mode and
/// `(x, u_2)` in integral mode; decision inputs are `(u_1, u_2)` or
/// `(u_1, ν)` respectively.
#[derive(Clone, Debug)]
pub struct Controller<T> {
    mode: Mode,
    base: AffineSystem<T>,
    system: AffineSystem<T>,
    augmented: Option<AugmentedSystem<T>>,
    obstacle: ObstacleConstraint<T>,
    limits: Vec<PsiSequence<T>>,
    clf: ClfSpec<T>,
    labels: Vec<String>,
    weights: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    /// Control-point barrier (margin `r + r_b + d`).
    barrier: ScalarField<T>,
    /// Center barrier (margin `r + r_b`).
    center_barrier: ScalarField<T>,
}

/// Everything decided in one step.
#[derive(Clone, Debug)]
pub struct StepDecision<T> {
    /// Solver output over the decision inputs and slack.
    pub solution: QpSolution<T>,
    /// Decision inputs to apply (the fallback when the QP failed).
    pub decision: Vec<T>,
    pub delta: T,
    pub hard_rows: Vec<ConstraintRow<T>>,
    /// Smallest `a·z + r` over the hard rows at `decision`.
    pub min_hard_slack: T,
    pub kkt: Option<KktResiduals<T>>,
    pub obstacle_row: ConstraintRow<T>,
}

impl<T: Real> Controller<T> {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let lit = T::lit;
        let mass = lit(config.vehicle.mass);
        let l = &config.limits;
        let (u2_min, u2_max) = config.u2_bounds();
        let bounds = ControlBounds::new(vec![lit(l.u1_min), lit(u2_min)], vec![lit(l.u1_max), lit(u2_max)])?;
        let base = make_unicycle(UnicycleParams { mass }, bounds.clone())?;
        let alphas: Vec<ClassK<T>> = config.obstacle_gains().iter().map(|&k| ClassK::linear(lit(k))).collect();

        let probe = ProbeSettings { seed: config.seed, ..ProbeSettings::default() };
        let params = CenterTransformParams {
            offset: lit(config.vehicle.offset),
            body_radius: lit(config.vehicle.body_radius),
            obstacle: [lit(config.obstacle.center[0]), lit(config.obstacle.center[1])],
            obstacle_radius: lit(config.obstacle.radius),
        };
        let barrier = params.control_point_barrier(5);
        let center_barrier = crate::dynamics::obstacle_barrier(
            5,
            params.obstacle,
            params.obstacle_radius + params.body_radius,
            params.offset,
        );

        let (system, augmented, obstacle) = match config.mode {
            Mode::Standard => {
                let psi = build_psi_sequence(
                    &HocbfSpec::new(barrier.clone(), 2, alphas, &base).with_tag("obstacle"),
                )?;
                (base.clone(), None, ObstacleConstraint::Standard(psi))
            }
            Mode::Transform => {
                let spec = make_center_transform(&params, &base, alphas)?;
                (base.clone(), None, ObstacleConstraint::Transform(Box::new(spec)))
            }
            Mode::Integral => {
                let degrees = detect_relative_degree_set(&barrier, &base, &probe)?;
                let mut initial = vec![T::zero(), T::zero()];
                if let Some(f) = config.initial.force {
                    initial[1] = lit(f);
                }
                let options = IntegralOptions {
                    bound_alpha: ClassK::linear(lit(config.gains.force_bound)),
                    initial_controls: Some(initial),
                    probe: probe.clone(),
                    ..IntegralOptions::default()
                };
                let spec = build_ihocbf(&barrier, &base, &degrees, alphas, &options)?;
                if spec.augmented().aux().len() != 1 {
                    return Err(Error::Auxiliary("expected a single force chain".into()));
                }
                let aug = spec.augmented().clone();
                (aug.system().clone(), Some(aug), ObstacleConstraint::Integral(Box::new(spec)))
            }
        };

        let n = system.state_dim();
        let k = lit(config.gains.state_limit);
        let mut limits = Vec::new();
        for (name, index, value, upper) in [
            ("v_max", 2, l.v_max, true),
            ("v_min", 2, l.v_min, false),
            ("phi_max", 4, l.phi_max, true),
            ("phi_min", 4, l.phi_min, false),
        ] {
            let value = lit(value);
            let coord = ScalarField::coordinate(n, index);
            let field = if upper {
                coord.map(name, move |s| -s + value)
            } else {
                coord.map(name, move |s| s - value)
            };
            let degrees = detect_relative_degree_set(&field, &system, &probe)?;
            let m = degrees.min_degree().ok_or_else(|| {
                Error::ProbeFailure(format!("no input reaches the {name} limit"))
            })?;
            limits.push(build_psi_sequence(
                &HocbfSpec::new(field, m, vec![ClassK::linear(k); m], &system).with_tag(name),
            )?);
        }

        let target = [lit(config.target.position[0]), lit(config.target.position[1])];
        let gains = SteeringGains {
            heading: lit(config.clf.heading_gain),
            speed: lit(config.clf.speed_gain),
            max_speed: lit(l.v_max),
            blend: lit(config.clf.blend),
        };
        let channel = match config.mode {
            Mode::Integral => SpeedChannel::IntegratedForce {
                index: 5,
                mass,
                gain: lit(config.clf.accel_gain),
            },
            _ => SpeedChannel::Force,
        };
        let v = unicycle_steering_clf(n, target, gains, channel)?;
        let clf = ClfSpec::new(target, v, lit(config.clf.rate), lit(config.clf.slack_weight))?;

        let inv_m2 = (mass * mass).recip();
        let (labels, lower, upper) = match config.mode {
            Mode::Integral => {
                let nu = lit(config.gains.nu_box_factor * (u2_max - u2_min) / config.dt);
                (
                    vec!["u1".to_string(), "nu".to_string()],
                    vec![bounds.lower[0], -nu],
                    vec![bounds.upper[0], nu],
                )
            }
            _ => (
                vec!["u1".to_string(), "u2".to_string()],
                bounds.lower.clone(),
                bounds.upper.clone(),
            ),
        };

        Ok(Controller {
            mode: config.mode,
            base,
            system,
            augmented,
            obstacle,
            limits,
            clf,
            labels,
            weights: vec![T::one(), inv_m2],
            lower,
            upper,
            barrier,
            center_barrier,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn base(&self) -> &AffineSystem<T> {
        &self.base
    }

    /// The system the controller state evolves on.
    pub fn system(&self) -> &AffineSystem<T> {
        &self.system
    }

    pub fn augmented(&self) -> Option<&AugmentedSystem<T>> {
        self.augmented.as_ref()
    }

    pub fn decision_labels(&self) -> &[String] {
        &self.labels
    }

    /// Relative degree of the enforced obstacle constraint.
    pub fn obstacle_degree(&self) -> usize {
        self.obstacle_psi().degree()
    }

    /// Class-K functions in the obstacle constraint, including the bound
    /// barriers of integral mode.
    pub fn class_k_count(&self) -> usize {
        match &self.obstacle {
            ObstacleConstraint::Integral(spec) => {
                spec.degree()
                    + spec
                        .bounds()
                        .iter()
                        .flat_map(|b| b.lower.iter().chain(b.upper.iter()))
                        .map(|p| p.degree())
                        .sum::<usize>()
            }
            _ => self.obstacle_degree(),
        }
    }

    fn obstacle_psi(&self) -> &PsiSequence<T> {
        match &self.obstacle {
            ObstacleConstraint::Standard(p) => p,
            ObstacleConstraint::Integral(s) => s.main(),
            ObstacleConstraint::Transform(s) => s.psi(),
        }
    }

    /// Controller state at the start of a run.
    pub fn initial_state(&self, x: &[T]) -> Result<Vec<T>> {
        match &self.augmented {
            Some(aug) => aug.initial_state(x),
            None => Ok(x.to_vec()),
        }
    }

    /// `ψ_0 .. ψ_{m−1}` of the obstacle constraint.
    pub fn psi_values(&self, y: &[T]) -> Result<Vec<T>> {
        self.obstacle_psi().values(y)
    }

    /// Lowest `ψ_i` over the obstacle, limit and bound barriers; the start of
    /// a run is inside every safe set when this is non-negative.
    pub fn min_psi_all(&self, y: &[T]) -> Result<T> {
        let mut all = self.obstacle_psi().values(y)?;
        for l in &self.limits {
            all.extend(l.values(y)?);
        }
        if let ObstacleConstraint::Integral(spec) = &self.obstacle {
            for b in spec.bounds() {
                for p in b.lower.iter().chain(b.upper.iter()) {
                    all.extend(p.values(y)?);
                }
            }
        }
        Ok(all.into_iter().fold(T::infinity(), T::min))
    }

    pub fn control_point_barrier(&self, y: &[T]) -> Result<T> {
        self.barrier.eval(&y[..5])
    }

    pub fn center_barrier(&self, y: &[T]) -> Result<T> {
        self.center_barrier.eval(&y[..5])
    }

    /// Base control `(u_1, u_2)` applied at `y` under decision `z`.
    pub fn applied_control(&self, y: &[T], decision: &[T]) -> Vec<T> {
        match &self.augmented {
            Some(aug) => aug.base_control(y, decision),
            None => decision.to_vec(),
        }
    }

    /// The decision that keeps the previously applied control: the same
    /// `u` in standard and transform mode, `(u_1, ν = 0)` in integral mode.
    pub fn hold(&self, previous: &[T]) -> Vec<T> {
        let mut d = previous.to_vec();
        if self.augmented.is_some() {
            d[1] = T::zero();
        }
        d
    }

    pub fn hard_rows(&self, y: &[T]) -> Result<(ConstraintRow<T>, Vec<ConstraintRow<T>>)> {
        let mut rows = match &self.obstacle {
            ObstacleConstraint::Standard(p) => vec![p.row(y)?],
            ObstacleConstraint::Integral(s) => s.rows(y)?,
            ObstacleConstraint::Transform(s) => vec![s.row(y)?],
        };
        let obstacle = rows[0].clone();
        for l in &self.limits {
            rows.push(l.row(y)?);
        }
        Ok((obstacle, rows))
    }

    /// Builds the rows at `y`, solves the QP and falls back to `hold(previous)`
    /// when it is not optimal.
    pub fn step(&self, y: &[T], previous: &[T]) -> Result<StepDecision<T>> {
        let (obstacle_row, hard_rows) = self.hard_rows(y)?;
        let clf = clf_row(&self.clf, &self.system, y)?;
        let qp = assemble_step_qp(&StepQpInput {
            mode: self.mode,
            labels: &self.labels,
            weights: &self.weights,
            lower: &self.lower,
            upper: &self.upper,
            hard_rows: &hard_rows,
            clf: Some(&clf),
            slack_weight: self.clf.slack_weight,
        })?;
        let solution = solve(&qp.problem)?;
        let q = self.labels.len();
        let (decision, delta, kkt) = if solution.status == QpStatus::Optimal {
            let bounds = ControlBounds {
                lower: self.lower.clone(),
                upper: self.upper.clone(),
            };
            let z = clamp_to_bounds(&solution.z[..q], &bounds);
            (z, solution.z[q], Some(kkt_residuals(&qp.problem, &solution)))
        } else {
            (self.hold(previous), T::zero(), None)
        };
        let min_hard_slack = hard_rows
            .iter()
            .map(|r| r.slack(&decision))
            .fold(T::infinity(), T::min);
        Ok(StepDecision {
            solution,
            decision,
            delta,
            hard_rows,
            min_hard_slack,
            kkt,
            obstacle_row,
        })
    }
}
