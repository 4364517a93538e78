//! Runs the default scenario in every mode and prints the headline metrics.

use hocbf::sim::{run, safety_metrics, ScenarioConfig};
use hocbf::Mode;

fn main() -> hocbf::Result<()> {
    for mode in Mode::ALL {
        let config = ScenarioConfig::paper_sec4().with_mode(mode);
        let log = run(&config)?;
        let s = safety_metrics(&log, &config);
        println!(
            "{mode:>9}: t={:5.1}s dist={:7.3} center={:7.4} point={:7.4} failed={} max|u1|={:.4} max_delta={:.3} kkt={:.1e}/{:.1e} viol={:?} {:.0}us/step",
            s.final_time,
            s.final_distance,
            s.min_center_clearance,
            s.min_control_point_clearance,
            s.infeasible_steps + s.degenerate_steps,
            s.max_abs_u1,
            s.max_delta,
            s.max_kkt.stationarity,
            s.max_kkt.primal,
            s.bound_violations,
            log.timings.mean_controller_us(),
        );
        if let Some(a) = &s.aborted {
            println!("  aborted: {a}");
        }
    }
    Ok(())
}
