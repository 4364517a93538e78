use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use hocbf::barrier::{detect_relative_degree_set, ProbeSettings, RelativeDegreeSet};
use hocbf::dynamics::{
    double_integrator, make_unicycle, single_integrator, ControlBounds, UnicycleParams,
};
use hocbf::sim::{run, safety_metrics, ScenarioConfig, Summary, TrajectoryLog};
use hocbf::transform::CenterTransformParams;
use hocbf::{Field64, Mode, System64};
use serde::Serialize;

use crate::config::{resolve, ConfigError, ScenarioSource};
use crate::output::{rows, write_csv_file, write_json};

/// Process exit status of a subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok = 0,
    Config = 1,
    Infeasible = 2,
    Unsafe = 3,
}

impl Outcome {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// An unsafe run outranks an infeasible one.
    pub fn of(summary: &Summary) -> Self {
        if !summary.safe {
            Outcome::Unsafe
        } else if summary.infeasible_steps + summary.degenerate_steps > 0 || summary.aborted.is_some() {
            Outcome::Infeasible
        } else {
            Outcome::Ok
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunManifest {
    pub source: ScenarioSource,
    pub out: PathBuf,
    pub formats: Vec<Format>,
}

/// Everything one run produced, before it is written.
pub struct RunArtifacts {
    pub config: ScenarioConfig,
    pub log: TrajectoryLog,
    pub summary: Summary,
    pub wall_time_s: f64,
}

pub fn execute(config: &ScenarioConfig) -> Result<RunArtifacts> {
    let started = Instant::now();
    let log = run(config).with_context(|| format!("running {} in {} mode", config.name, config.mode))?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let summary = safety_metrics(&log, config);
    Ok(RunArtifacts { config: config.clone(), log, summary, wall_time_s })
}

pub fn write_artifacts(a: &RunArtifacts, out: &Path, formats: &[Format]) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let rows = rows(&a.log);
    for f in formats {
        match f {
            Format::Csv => write_csv_file(&out.join("trajectory.csv"), &rows)?,
            Format::Json => write_json(&out.join("trajectory.json"), &rows)?,
        }
    }
    write_json(&out.join("summary.json"), &a.summary)?;
    write_json(&out.join("config-echo.json"), &a.config)?;
    Ok(())
}

pub fn cmd_run(manifest: &RunManifest) -> Result<Outcome> {
    let config = match resolve(&manifest.source) {
        Ok(c) => c,
        Err(e) => return config_failure(e),
    };
    let a = execute(&config)?;
    write_artifacts(&a, &manifest.out, &manifest.formats)?;
    let s = &a.summary;
    eprintln!(
        "{} [{}]: {} steps, final distance {:.3} m, min clearance {:.4} m, {} failed steps -> {}",
        s.scenario,
        s.mode,
        s.steps,
        s.final_distance,
        s.min_center_clearance,
        s.infeasible_steps + s.degenerate_steps,
        manifest.out.display()
    );
    Ok(Outcome::of(s))
}

fn config_failure(e: ConfigError) -> Result<Outcome> {
    eprintln!("config error: {e}");
    Ok(Outcome::Config)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeReport {
    pub mode: Mode,
    pub objective: f64,
    pub min_center_clearance: f64,
    pub min_control_point_clearance: f64,
    pub infeasible_steps: usize,
    pub final_distance: f64,
    pub reached_goal: bool,
    pub safe: bool,
    pub mean_controller_us: f64,
    pub wall_time_s: f64,
    pub relative_degree: usize,
    pub class_k_count: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ranking {
    /// Cheapest mean per-step controller time first.
    pub computational_cost: Vec<Mode>,
    /// Lowest enforced relative degree first.
    pub relative_degree: Vec<Mode>,
    pub class_k_count: Vec<Mode>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub scenario: String,
    pub modes: Vec<ModeReport>,
    pub ranking: Ranking,
}

#[derive(Clone, Debug)]
pub struct CompareManifest {
    pub source: ScenarioSource,
    pub modes: Vec<Mode>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    /// Runs the modes on separate threads; timings then share the machine.
    pub parallel: bool,
}

pub fn compare(manifest: &CompareManifest) -> Result<std::result::Result<CompareReport, ConfigError>> {
    if manifest.modes.len() < 2 {
        return Ok(Err(ConfigError { message: "compare needs at least two modes".into() }));
    }
    let mut configs = Vec::new();
    for &mode in &manifest.modes {
        let source = ScenarioSource { mode: Some(mode), ..manifest.source.clone() };
        match resolve(&source) {
            Ok(c) => configs.push(c),
            Err(e) => return Ok(Err(e)),
        }
    }
    let runs: Vec<RunArtifacts> = if manifest.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || execute(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect::<Result<_>>()
        })?
    } else {
        configs.iter().map(execute).collect::<Result<_>>()?
    };

    let mut modes = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        // repeated modes get their own directory
        let name = if manifest.modes[..i].contains(&a.config.mode) {
            format!("{}-{i}", a.config.mode)
        } else {
            a.config.mode.to_string()
        };
        write_artifacts(a, &manifest.out.join(name), &manifest.formats)?;
        let s = &a.summary;
        modes.push(ModeReport {
            mode: a.config.mode,
            objective: s.objective,
            min_center_clearance: s.min_center_clearance,
            min_control_point_clearance: s.min_control_point_clearance,
            infeasible_steps: s.infeasible_steps + s.degenerate_steps,
            final_distance: s.final_distance,
            reached_goal: s.reached_goal,
            safe: s.safe,
            mean_controller_us: a.log.timings.mean_controller_us(),
            wall_time_s: a.wall_time_s,
            relative_degree: s.obstacle_degree,
            class_k_count: s.class_k_count,
            outcome: Outcome::of(s),
        });
    }
    let ranked = |key: &dyn Fn(&ModeReport) -> f64| {
        let mut order: Vec<&ModeReport> = modes.iter().collect();
        order.sort_by(|a, b| key(a).total_cmp(&key(b)));
        let mut out: Vec<Mode> = Vec::new();
        for r in order {
            if !out.contains(&r.mode) {
                out.push(r.mode);
            }
        }
        out
    };
    let ranking = Ranking {
        computational_cost: ranked(&|r| r.mean_controller_us),
        relative_degree: ranked(&|r| r.relative_degree as f64),
        class_k_count: ranked(&|r| r.class_k_count as f64),
    };
    let report = CompareReport { scenario: runs[0].config.name.clone(), modes, ranking };
    std::fs::create_dir_all(&manifest.out)?;
    write_json(&manifest.out.join("compare.json"), &report)?;
    Ok(Ok(report))
}

pub fn cmd_compare(manifest: &CompareManifest) -> Result<Outcome> {
    let report = match compare(manifest)? {
        Ok(r) => r,
        Err(e) => return config_failure(e),
    };
    for m in &report.modes {
        eprintln!(
            "{:>9}: objective {:10.3}, min clearance {:8.4} m, failed steps {}, {:7.1} us/step, degree {}, goal {}",
            m.mode,
            m.objective,
            m.min_center_clearance,
            m.infeasible_steps,
            m.mean_controller_us,
            m.relative_degree,
            if m.reached_goal { "reached" } else { "missed" }
        );
    }
    Ok(report.modes.iter().map(|m| m.outcome).max().unwrap_or(Outcome::Ok))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Unicycle,
    SingleIntegrator,
    DoubleIntegrator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierKind {
    /// Control-point clearance to the obstacle, margin `r + r_b + d`.
    Obstacle,
    /// Clearance of the point `d` ahead along the heading, margin `r + r_b`.
    Center,
    /// `b(x) = x_0`.
    Coordinate,
}

#[derive(Clone, Debug)]
pub struct DegreeManifest {
    pub source: ScenarioSource,
    pub model: Model,
    pub barrier: BarrierKind,
    pub cap: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub model: Model,
    pub barrier: BarrierKind,
    pub label: String,
    pub degrees: serde_json::Map<String, serde_json::Value>,
    pub undetected: Vec<String>,
    pub detected: RelativeDegreeSet,
}

pub fn degree(manifest: &DegreeManifest) -> Result<std::result::Result<DegreeReport, String>> {
    let config = match resolve(&manifest.source) {
        Ok(c) => c,
        Err(e) => return Ok(Err(e.message)),
    };
    let (sys, b): (System64, Field64) = match (manifest.model, manifest.barrier) {
        (Model::Unicycle, kind @ (BarrierKind::Obstacle | BarrierKind::Center)) => {
            let (lo, hi) = config.u2_bounds();
            let l = &config.limits;
            let bounds = ControlBounds::new(vec![l.u1_min, lo], vec![l.u1_max, hi])?;
            let sys = make_unicycle(UnicycleParams { mass: config.vehicle.mass }, bounds)?;
            let params = CenterTransformParams {
                offset: config.vehicle.offset,
                body_radius: config.vehicle.body_radius,
                obstacle: config.obstacle.center,
                obstacle_radius: config.obstacle.radius,
            };
            let b = if kind == BarrierKind::Center {
                params.center_barrier(5)
            } else {
                params.control_point_barrier(5)
            };
            (sys, b)
        }
        (Model::SingleIntegrator, BarrierKind::Coordinate) => {
            (single_integrator(1).with_labels(&["x"], &["u"]), Field64::coordinate(1, 0))
        }
        (Model::DoubleIntegrator, BarrierKind::Coordinate) => {
            (double_integrator(), Field64::coordinate(2, 0))
        }
        (model, barrier) => {
            return Ok(Err(format!("barrier {barrier:?} is not defined for model {model:?}")))
        }
    };
    let settings = ProbeSettings { cap: manifest.cap, seed: config.seed, ..ProbeSettings::default() };
    let detected = match detect_relative_degree_set(&b, &sys, &settings) {
        Ok(d) => d,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let mut degrees = serde_json::Map::new();
    let mut undetected = Vec::new();
    for (label, d) in detected.control_labels.iter().zip(&detected.degrees) {
        degrees.insert(label.clone(), serde_json::json!(d));
        if d.is_none() {
            undetected.push(label.clone());
        }
    }
    Ok(Ok(DegreeReport {
        model: manifest.model,
        barrier: manifest.barrier,
        label: b.label().to_string(),
        degrees,
        undetected,
        detected,
    }))
}

pub fn cmd_degree(manifest: &DegreeManifest) -> Result<Outcome> {
    let report = match degree(manifest)? {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(Outcome::Config);
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if report.undetected.is_empty() {
        Ok(Outcome::Ok)
    } else {
        eprintln!(
            "relative degree of {} not detected within {} Lie derivatives",
            report.undetected.join(", "),
            manifest.cap
        );
        Ok(Outcome::Config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_of(model: Model, barrier: BarrierKind, cap: usize) -> DegreeReport {
        let manifest = DegreeManifest { source: ScenarioSource::default(), model, barrier, cap };
        degree(&manifest).unwrap().unwrap()
    }

    #[test]
    fn degree_reports_per_control() {
        let r = degree_of(Model::Unicycle, BarrierKind::Obstacle, 5);
        assert_eq!(serde_json::Value::Object(r.degrees), serde_json::json!({"u1": 3, "u2": 2}));
        let r = degree_of(Model::Unicycle, BarrierKind::Center, 5);
        assert_eq!(serde_json::Value::Object(r.degrees), serde_json::json!({"u1": 2, "u2": 2}));
        let r = degree_of(Model::DoubleIntegrator, BarrierKind::Coordinate, 1);
        assert_eq!(r.undetected.len(), 1);
    }

    #[test]
    fn mismatched_selector_is_an_error() {
        let manifest = DegreeManifest {
            source: ScenarioSource::default(),
            model: Model::SingleIntegrator,
            barrier: BarrierKind::Center,
            cap: 5,
        };
        assert!(degree(&manifest).unwrap().is_err());
    }

    #[test]
    fn unsafe_outranks_infeasible() {
        assert!(Outcome::Unsafe > Outcome::Infeasible);
        assert_eq!(Outcome::Unsafe.code(), 3);
    }
}
