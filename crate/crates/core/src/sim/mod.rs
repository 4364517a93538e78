//! Closed-loop simulation of the unicycle under a CLF-HOCBF-QP controller.

mod config;
mod controller;
mod fuzz;
mod log;
mod metrics;
mod run;

pub use crate::integrate::{step_integrate, Integrator};
pub use config::{
    ClfConfig, GainsConfig, InitialConfig, LimitsConfig, ObstacleConfig, ScenarioConfig, TargetConfig,
    VehicleConfig, SCENARIOS,
};
pub use controller::{Controller, StepDecision};
pub use fuzz::fuzz_scenario;
pub use log::{StepRecord, Timings, TrajectoryLog};
pub use metrics::{safety_metrics, BoundViolations, Summary, SAFETY_TOLERANCE};
pub use run::{run, run_with};
