use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Integrator;
use crate::mode::Mode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    /// kg.
    pub mass: f64,
    /// Control point to geometric center, m.
    pub offset: f64,
    pub body_radius: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        VehicleConfig {
            mass: 1650.0,
            offset: 0.5,
            body_radius: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleConfig {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        ObstacleConfig {
            center: [35.0, 14.0],
            radius: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    pub position: [f64; 2],
    /// `p` in the reported objective.
    pub terminal_weight: f64,
    /// Runs stop once the control point is this close.
    pub tolerance: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig {
            position: [65.0, 15.0],
            terminal_weight: 1.0,
            tolerance: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub u1_min: f64,
    pub u1_max: f64,
    /// N; `-3 M` when absent.
    pub u2_min: Option<f64>,
    /// N; `3 M` when absent.
    pub u2_max: Option<f64>,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        LimitsConfig {
            v_min: 0.0,
            v_max: 5.0,
            phi_min: -0.6981,
            phi_max: 0.6981,
            u1_min: -0.3491,
            u1_max: 0.3491,
            u2_min: None,
            u2_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    /// `(x, y, v, θ, φ)`.
    pub state: [f64; 5],
    /// Initial force in integral mode; zero when absent.
    pub force: Option<f64>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            state: [5.0, 15.0, 5.0, 0.0, 0.0],
            force: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainsConfig {
    /// Linear class-K gains of the obstacle HOCBF, one per order; all ones
    /// when absent.
    pub obstacle: Option<Vec<f64>>,
    /// Gain of every order of the speed and turn-rate limit barriers.
    pub state_limit: f64,
    /// Gain of the force-bound barriers in integral mode.
    pub force_bound: f64,
    /// `ν ∈ ±factor (u2_max − u2_min) / dt`.
    pub nu_box_factor: f64,
}

impl Default for GainsConfig {
    fn default() -> Self {
        GainsConfig {
            obstacle: None,
            state_limit: 1.0,
            force_bound: 5.0,
            nu_box_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClfConfig {
    pub rate: f64,
    pub slack_weight: f64,
    pub heading_gain: f64,
    pub speed_gain: f64,
    /// Integral mode: acceleration tracking gain.
    pub accel_gain: f64,
    pub blend: f64,
}

impl Default for ClfConfig {
    fn default() -> Self {
        ClfConfig {
            rate: 1.0,
            slack_weight: 100.0,
            heading_gain: 2.0,
            speed_gain: 1.0,
            accel_gain: 1.0,
            blend: 0.1,
        }
    }
}

/// One closed-loop scenario. Every field defaults to `paper_sec4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    pub integrator: Integrator,
    pub seed: u64,
    pub dt: f64,
    pub t_final: f64,
    pub vehicle: VehicleConfig,
    pub obstacle: ObstacleConfig,
    pub target: TargetConfig,
    pub limits: LimitsConfig,
    pub initial: InitialConfig,
    pub gains: GainsConfig,
    pub clf: ClfConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "paper_sec4".into(),
            mode: Mode::default(),
            integrator: Integrator::Rk4,
            seed: 0,
            dt: 0.1,
            t_final: 25.0,
            vehicle: VehicleConfig::default(),
            obstacle: ObstacleConfig::default(),
            target: TargetConfig::default(),
            limits: LimitsConfig::default(),
            initial: InitialConfig::default(),
            gains: GainsConfig::default(),
            clf: ClfConfig::default(),
        }
    }
}

pub const SCENARIOS: [&str; 1] = ["paper_sec4"];

impl ScenarioConfig {
    pub fn paper_sec4() -> Self {
        Self::default()
    }

    pub fn named(name: &str) -> Option<Self> {
        match name {
            "paper_sec4" => Some(Self::paper_sec4()),
            _ => None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn u2_bounds(&self) -> (f64, f64) {
        let m = self.vehicle.mass;
        (
            self.limits.u2_min.unwrap_or(-3.0 * m),
            self.limits.u2_max.unwrap_or(3.0 * m),
        )
    }

    /// Relative degree of the obstacle HOCBF the mode enforces.
    pub fn obstacle_degree(&self) -> usize {
        match self.mode {
            Mode::Standard | Mode::Transform => 2,
            Mode::Integral => 3,
        }
    }

    pub fn obstacle_gains(&self) -> Vec<f64> {
        self.gains
            .obstacle
            .clone()
            .unwrap_or_else(|| vec![1.0; self.obstacle_degree()])
    }

    /// Distance from the control point to the obstacle center minus
    /// `r + r_b + d`.
    pub fn control_point_clearance(&self, x: &[f64]) -> f64 {
        let [cx, cy] = self.obstacle.center;
        (x[0] - cx).hypot(x[1] - cy)
            - (self.obstacle.radius + self.vehicle.body_radius + self.vehicle.offset)
    }

    /// Distance from the geometric center to the obstacle center minus `r + r_b`.
    pub fn center_clearance(&self, x: &[f64]) -> f64 {
        let [cx, cy] = self.obstacle.center;
        let d = self.vehicle.offset;
        (x[0] + d * x[3].cos() - cx).hypot(x[1] + d * x[3].sin() - cy)
            - (self.obstacle.radius + self.vehicle.body_radius)
    }

    /// Checks everything that does not need the controller; the start must
    /// satisfy the barrier enforced by the selected mode and the state limits.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        if self.t_final < self.dt {
            return Err(Error::invalid("t_final", "must be at least one step long"));
        }
        positive("vehicle.mass", self.vehicle.mass)?;
        positive("vehicle.body_radius", self.vehicle.body_radius)?;
        if self.mode == Mode::Transform {
            positive("vehicle.offset", self.vehicle.offset)?;
        } else if !(self.vehicle.offset >= 0.0 && self.vehicle.offset.is_finite()) {
            return Err(Error::invalid("vehicle.offset", "must be non-negative and finite"));
        }
        positive("obstacle.radius", self.obstacle.radius)?;
        positive("target.tolerance", self.target.tolerance)?;
        if !(self.target.terminal_weight >= 0.0) {
            return Err(Error::invalid("target.terminal_weight", "must be non-negative"));
        }
        let finite = self
            .obstacle
            .center
            .iter()
            .chain(&self.target.position)
            .chain(&self.initial.state)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("initial.state", "positions and states must be finite"));
        }
        let l = &self.limits;
        let (u2_min, u2_max) = self.u2_bounds();
        for (name, lo, hi) in [
            ("limits.v", l.v_min, l.v_max),
            ("limits.phi", l.phi_min, l.phi_max),
            ("limits.u1", l.u1_min, l.u1_max),
            ("limits.u2", u2_min, u2_max),
        ] {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::invalid(name, format!("min ({lo}) must be below max ({hi})")));
            }
        }
        if !(u2_min < 0.0 && 0.0 < u2_max) && self.initial.force.is_none() && self.mode == Mode::Integral {
            return Err(Error::invalid("initial.force", "required when 0 is not inside the force bounds"));
        }
        if let Some(f) = self.initial.force {
            if !(u2_min < f && f < u2_max) {
                return Err(Error::invalid("initial.force", format!("{f} must lie strictly inside the force bounds")));
            }
        }
        let x = &self.initial.state;
        if !(l.v_min <= x[2] && x[2] <= l.v_max) {
            return Err(Error::invalid("initial.state", format!("speed {} outside [{}, {}]", x[2], l.v_min, l.v_max)));
        }
        if !(l.phi_min <= x[4] && x[4] <= l.phi_max) {
            return Err(Error::invalid("initial.state", format!("turn rate {} outside limits", x[4])));
        }
        let clearance = match self.mode {
            Mode::Transform => self.center_clearance(x),
            _ => self.control_point_clearance(x),
        };
        if !(clearance > 0.0) {
            return Err(Error::invalid("initial.state", format!("starts inside the obstacle margin (barrier {clearance})")));
        }
        let gains = self.obstacle_gains();
        if gains.len() != self.obstacle_degree() {
            return Err(Error::invalid(
                "gains.obstacle",
                format!("{} mode needs {} gains, got {}", self.mode, self.obstacle_degree(), gains.len()),
            ));
        }
        for (name, v) in [
            ("gains.state_limit", self.gains.state_limit),
            ("gains.force_bound", self.gains.force_bound),
            ("gains.nu_box_factor", self.gains.nu_box_factor),
            ("clf.rate", self.clf.rate),
            ("clf.slack_weight", self.clf.slack_weight),
            ("clf.heading_gain", self.clf.heading_gain),
            ("clf.speed_gain", self.clf.speed_gain),
            ("clf.accel_gain", self.clf.accel_gain),
            ("clf.blend", self.clf.blend),
        ] {
            positive(name, v)?;
        }
        if gains.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("gains.obstacle", "gains must be positive"));
        }
        Ok(())
    }
}
