use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mode::Mode;

use super::config::ScenarioConfig;
use super::controller::Controller;

/// A randomized variant of `paper_sec4` whose start lies inside every safe
/// set of the mode's controller (all `ψ_i ≥ 0`).
///
/// Obstacle center, radius, initial heading and speed are drawn from
/// `seed`; draws whose start is outside a safe set are redrawn.
pub fn fuzz_scenario(seed: u64, mode: Mode) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut c = ScenarioConfig::paper_sec4().with_mode(mode);
        c.name = format!("fuzz_{seed}");
        c.seed = seed;
        c.t_final = 15.0;
        c.obstacle.center = [rng.gen_range(18.0..50.0), rng.gen_range(7.0..23.0)];
        c.obstacle.radius = rng.gen_range(2.0..6.0);
        c.initial.state[2] = rng.gen_range(0.0..=5.0);
        c.initial.state[3] = rng.gen_range(-0.8..0.8);
        let Ok(ctrl) = Controller::<f64>::new(&c) else { continue };
        let Ok(y) = ctrl.initial_state(&c.initial.state) else { continue };
        if ctrl.min_psi_all(&y).is_ok_and(|m| m > 0.0) {
            return c;
        }
    }
}
