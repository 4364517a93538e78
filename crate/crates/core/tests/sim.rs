use hocbf::dynamics::{make_unicycle, ControlBounds, UnicycleParams};
use hocbf::qp::QpStatus;
use hocbf::sim::{fuzz_scenario, run, run_with, safety_metrics, step_integrate, ScenarioConfig};
use hocbf::Mode;
use proptest::prelude::*;

#[test]
fn runs_are_deterministic() {
    for mode in Mode::ALL {
        let c = ScenarioConfig::paper_sec4().with_mode(mode);
        assert_eq!(run(&c).unwrap(), run(&c).unwrap(), "{mode}");
    }
}

#[test]
fn control_is_held_over_each_step() {
    let c = ScenarioConfig::paper_sec4().with_mode(Mode::Transform);
    let log = run(&c).unwrap();
    let m = c.vehicle.mass;
    let bounds = ControlBounds::symmetric(&[c.limits.u1_max, 3.0 * m]).unwrap();
    let sys = make_unicycle(UnicycleParams { mass: m }, bounds).unwrap();
    for pair in log.steps.windows(2) {
        let next = step_integrate(&sys, &pair[0].state, &pair[0].applied, c.dt, c.integrator).unwrap();
        assert_eq!(next.as_slice(), pair[1].state.as_slice(), "t = {}", pair[0].t);
    }
}

#[test]
fn integral_force_follows_the_chain() {
    let c = ScenarioConfig::paper_sec4();
    let log = run(&c).unwrap();
    assert_eq!(log.mode, Mode::Integral);
    for pair in log.steps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        assert_eq!(a.aux, vec![a.applied[1]]);
        let expect = a.applied[1] + a.nu[0] * c.dt;
        assert!((b.applied[1] - expect).abs() <= 1e-9 * expect.abs().max(1.0));
    }
}

#[test]
fn single_precision_run_is_safe() {
    let c = ScenarioConfig::paper_sec4().with_mode(Mode::Transform);
    let log = run_with::<f32>(&c).unwrap();
    let s = safety_metrics(&log, &c);
    assert!(s.safe, "{}", s.min_center_clearance);
    assert!(s.final_distance < 2.0, "{}", s.final_distance);
}

#[test]
fn invalid_configs_name_the_field() {
    let mut c = ScenarioConfig::paper_sec4();
    c.dt = -0.1;
    assert!(run(&c).unwrap_err().to_string().contains("`dt`"));
    let mut c = ScenarioConfig::paper_sec4();
    c.initial.state = [35.0, 14.0, 0.0, 0.0, 0.0];
    assert!(run(&c).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn slack_is_nonnegative_and_hard_rows_hold(seed in 0u64..10_000, transform in any::<bool>()) {
        let mode = if transform { Mode::Transform } else { Mode::Integral };
        let c = fuzz_scenario(seed, mode);
        let log = run(&c).unwrap();
        for s in &log.steps {
            prop_assert!(s.delta >= 0.0, "delta {} at t = {}", s.delta, s.t);
            if s.status == QpStatus::Optimal {
                prop_assert!(s.min_hard_slack >= -1e-6, "hard slack {} at t = {}", s.min_hard_slack, s.t);
            }
        }
        if log.all_feasible() {
            prop_assert!(safety_metrics(&log, &c).safe);
        }
    }
}
