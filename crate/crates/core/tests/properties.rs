use hocbf::autodiff::{lie_along_f, lie_along_g, ScalarField};
use hocbf::barrier::{
    build_psi_sequence, detect_relative_degree_set, hocbf_row, ClassK, HocbfSpec, ProbeSettings,
};
use hocbf::dynamics::{
    double_integrator, make_unicycle, obstacle_barrier, AffineSystem, ControlBounds, UnicycleParams,
};
use hocbf::integral::{build_ihocbf, IntegralOptions};
use hocbf::integrate::{step_integrate, Integrator};
use hocbf::qp::{solve, QpProblem, QpStatus};
use hocbf::transform::{make_center_transform, CenterTransformParams};
use proptest::prelude::*;

const M: f64 = 1650.0;

fn unicycle() -> AffineSystem<f64> {
    let bounds = ControlBounds::symmetric(&[0.3491, 3.0 * M]).unwrap();
    make_unicycle(UnicycleParams { mass: M }, bounds).unwrap()
}

fn state() -> impl Strategy<Value = [f64; 5]> {
    (0.0..30.0f64, 0.0..30.0f64, 0.0..5.0f64, -3.0..3.0f64, -0.7..0.7f64)
        .prop_map(|(x, y, v, t, p)| [x, y, v, t, p])
}

/// Central difference of `h` along the vector field `dir` at `x`.
fn fd_along(h: &ScalarField<f64>, x: &[f64], dir: &[f64], eps: f64) -> f64 {
    let shift = |s: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, d)| a + s * d).collect() };
    (h.eval(&shift(eps)).unwrap() - h.eval(&shift(-eps)).unwrap()) / (2.0 * eps)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lie_derivatives_match_finite_differences(x in state(), oy in 8.0..22.0f64) {
        let sys = unicycle();
        for b in [obstacle_barrier(5, [35.0, oy], 6.5, 0.0), obstacle_barrier(5, [35.0, oy], 6.0, 0.5)] {
            let mut level = b.clone();
            for _ in 0..3 {
                let f = sys.drift(&x).unwrap();
                let next = lie_along_f(&level, &sys);
                prop_assert!(close(next.eval(&x).unwrap(), fd_along(&level, &x, &f, 1e-5), 1e-6));
                let g = sys.input_columns(&x).unwrap();
                let row = lie_along_g(&level, &sys).eval(&x).unwrap();
                for (j, col) in g.iter().enumerate() {
                    prop_assert!(close(row[j], fd_along(&level, &x, col, 1e-5), 1e-6));
                }
                level = next;
            }
        }
    }

    #[test]
    fn lie_derivatives_match_closed_form(x in state()) {
        let sys = unicycle();
        let (c0, c1) = (35.0, 14.0);
        let b = obstacle_barrier(5, [c0, c1], 6.5, 0.0);
        let (dx, dy) = (x[0] - c0, x[1] - c1);
        let rho = dx.hypot(dy);
        let (c, s) = (x[3].cos(), x[3].sin());
        let p = dx * c + dy * s;
        let q = -dx * s + dy * c;
        let v = x[2];
        let lf = lie_along_f(&b, &sys);
        let lf2 = lie_along_f(&lf, &sys);
        prop_assert!(close(lf.eval(&x).unwrap(), v * p / rho, 1e-10));
        let expect = v * v / rho - v * v * p * p / rho.powi(3) + v * q * x[4] / rho;
        prop_assert!(close(lf2.eval(&x).unwrap(), expect, 1e-10));
        let lglf = lie_along_g(&lf, &sys).eval(&x).unwrap();
        prop_assert!(lglf[0].abs() < 1e-14);
        prop_assert!(close(lglf[1], p / (rho * M), 1e-10));
    }

    #[test]
    fn integral_main_row_is_plain_hocbf_on_augmented(
        x in state(), u2 in -4950.0..4950.0f64, gains in proptest::collection::vec(0.2..3.0f64, 3)
    ) {
        let sys = unicycle();
        let b = obstacle_barrier(5, [35.0, 14.0], 6.5, 0.0);
        let degrees = detect_relative_degree_set(&b, &sys, &ProbeSettings::default()).unwrap();
        let alphas = gains.iter().map(|&k| ClassK::linear(k)).collect();
        let spec = build_ihocbf(&b, &sys, &degrees, alphas, &IntegralOptions::default()).unwrap();
        let aug = spec.augmented().system();
        let mut y = x.to_vec();
        y.push(u2);
        let plain = hocbf_row(&HocbfSpec::linear(b.lift(6), &gains, aug).unverified(), &y).unwrap();
        let row = spec.main_row(&y).unwrap();
        for (a, p) in row.coeffs.iter().zip(&plain.coeffs) {
            prop_assert!((a - p).abs() <= 1e-10);
        }
        prop_assert!((row.rhs - plain.rhs).abs() <= 1e-10 * plain.rhs.abs().max(1.0));
    }

    #[test]
    fn transform_row_is_affine_in_u(x in state(), u in (-1.0..1.0f64, -5000.0..5000.0f64)) {
        let sys = unicycle();
        let params = CenterTransformParams { offset: 0.5, body_radius: 1.0, obstacle: [35.0, 14.0], obstacle_radius: 5.0 };
        let spec = make_center_transform(&params, &sys, vec![ClassK::linear(1.0); 2]).unwrap();
        let row = spec.row(&x).unwrap();
        let u = [u.0, u.1];
        // ψ̇_1 + ψ_1 at x under u, by differencing ψ_1 along f + g u
        let dx = sys.dynamics(&x, &u).unwrap();
        let psi1 = spec.psi().field(1);
        let direct = fd_along(psi1, &x, &dx, 1e-6) + psi1.eval(&x).unwrap();
        prop_assert!(close(row.slack(&u), direct, 1e-5));
    }

    #[test]
    fn double_integrator_stays_safe_under_row_satisfying_inputs(
        x0 in 0.5..5.0f64, v0 in -2.0..2.0f64, k1 in 0.5..3.0f64, k2 in 0.5..3.0f64,
        wish in proptest::collection::vec(-5.0..5.0f64, 200)
    ) {
        let sys = double_integrator::<f64>();
        let spec = HocbfSpec::linear(ScalarField::coordinate(2, 0), &[k1, k2], &sys);
        let psi = build_psi_sequence(&spec).unwrap();
        let mut x = vec![x0, v0];
        prop_assume!(psi.contains(&x).unwrap());
        for w in wish {
            let row = psi.row(&x).unwrap();
            // project the wish onto the row
            let problem = QpProblem::new(vec![vec![2.0]], vec![-2.0 * w]).with_rows(vec![row]);
            let s = solve(&problem).unwrap();
            prop_assert_eq!(s.status, QpStatus::Optimal);
            x = step_integrate(&sys, &x, &s.z, 0.01, Integrator::Rk4).unwrap();
            prop_assert!(x[0] >= -1e-3, "position {}", x[0]);
        }
    }

    #[test]
    fn force_bound_rows_keep_force_inside(
        start in -4000.0..4000.0f64, wishes in proptest::collection::vec(-1e6..1e6f64, 100)
    ) {
        let sys = unicycle();
        let b = obstacle_barrier(5, [35.0, 14.0], 6.5, 0.0);
        let degrees = detect_relative_degree_set(&b, &sys, &ProbeSettings::default()).unwrap();
        let options = IntegralOptions { initial_controls: Some(vec![0.0, start]), ..IntegralOptions::default() };
        let spec = build_ihocbf(&b, &sys, &degrees, vec![ClassK::linear(1.0); 3], &options).unwrap();
        let mut u2 = vec![start];
        for w in wishes {
            let mut y = vec![10.0, 14.0, 3.0, 0.0, 0.0];
            y.push(u2[0]);
            let rows = spec.bound_rows(&y).unwrap();
            let nu = rows.iter().fold(w, |nu, r| {
                // each row is ±ν + rhs ≥ 0
                let c = r.coeffs[1];
                let limit = -r.rhs / c;
                if c > 0.0 { nu.max(limit) } else { nu.min(limit) }
            });
            u2 = spec.integrate_aux(&[u2], &[nu], 0.1, Integrator::Rk4).unwrap().remove(0);
            prop_assert!(u2[0] >= -3.0 * M - 1e-6 && u2[0] <= 3.0 * M + 1e-6, "u2 {}", u2[0]);
        }
    }
}

#[test]
fn transform_barrier_has_uniform_degree_on_probes() {
    let sys = unicycle();
    let params = CenterTransformParams { offset: 0.5, body_radius: 1.0, obstacle: [35.0, 14.0], obstacle_radius: 5.0 };
    let bt = params.center_barrier(5);
    let probe = ProbeSettings::<f64>::default();
    let degrees = detect_relative_degree_set(&bt, &sys, &probe).unwrap();
    assert_eq!(degrees.degrees, vec![Some(2), Some(2)]);
    let first = lie_along_g(&bt, &sys);
    let second = lie_along_g(&lie_along_f(&bt, &sys), &sys);
    let domain = sys.domain();
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut both = 0;
    let total = 200;
    for _ in 0..total {
        let x = domain.sample(&mut rng);
        assert!(first.eval(&x).unwrap().iter().all(|c| c.abs() <= 1e-12));
        if second.eval(&x).unwrap().iter().all(|c| c.abs() > 1e-9) {
            both += 1;
        }
    }
    assert!(both * 10 >= total * 9, "{both} of {total}");
}

#[test]
fn hand_derived_values_at_reference_state() {
    let sys = unicycle();
    let b = obstacle_barrier(5, [35.0, 15.0], 5.0, 0.0);
    let x = [10.0, 15.0, 5.0, 0.0, 0.0];
    let lf = lie_along_f(&b, &sys);
    assert!((lf.eval(&x).unwrap() + 5.0).abs() < 1e-9);
    assert!(lie_along_f(&lf, &sys).eval(&x).unwrap().abs() < 1e-9);
    let row = lie_along_g(&lf, &sys).eval(&x).unwrap();
    assert!(row[0].abs() < 1e-9 && (row[1] + 1.0 / M).abs() < 1e-9);
}
