//! Exhaustive active-set oracle for small QPs and a random problem generator.

use hocbf::barrier::ConstraintRow;
use hocbf::qp::QpProblem;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum over all constraint subsets of the equality-constrained optimum that
/// is feasible for every inequality; `None` when no subset yields one.
pub fn enumerate(p: &QpProblem<f64>) -> Option<(Vec<f64>, f64)> {
    let n = p.dim();
    let mut cons: Vec<(Vec<f64>, f64)> = p.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        if p.lower[j].is_finite() {
            e[j] = 1.0;
            cons.push((e.clone(), -p.lower[j]));
        }
        if p.upper[j].is_finite() {
            e[j] = -1.0;
            cons.push((e, p.upper[j]));
        }
    }
    let m = cons.len();
    let feasible = |z: &[f64]| {
        cons.iter().all(|(a, r)| {
            let s: f64 = a.iter().zip(z).map(|(x, y)| x * y).sum::<f64>() + r;
            s >= -1e-9 * (1.0 + r.abs())
        })
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut subset = Vec::new();
    fn visit(
        start: usize,
        m: usize,
        n: usize,
        subset: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        f(subset);
        if subset.len() == n {
            return;
        }
        for i in start..m {
            subset.push(i);
            visit(i + 1, m, n, subset, f);
            subset.pop();
        }
    }
    visit(0, m, n, &mut subset, &mut |s: &[usize]| {
        let k = s.len();
        let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
        let mut rhs = DVector::<f64>::zeros(n + k);
        for i in 0..n {
            for j in 0..n {
                kkt[(i, j)] = p.hessian[i][j];
            }
            rhs[i] = -p.linear[i];
        }
        for (c, &idx) in s.iter().enumerate() {
            for j in 0..n {
                kkt[(j, n + c)] = -cons[idx].0[j];
                kkt[(n + c, j)] = cons[idx].0[j];
            }
            rhs[n + c] = -cons[idx].1;
        }
        let lu = kkt.lu();
        if lu.determinant().abs() < 1e-12 {
            return;
        }
        let Some(sol) = lu.solve(&rhs) else { return };
        let z: Vec<f64> = sol.rows(0, n).iter().copied().collect();
        if !feasible(&z) {
            return;
        }
        let obj = p.objective(&z);
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((z, obj));
        }
    });
    best
}

pub fn random_problem(seed: u64) -> QpProblem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(0..=10);
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let hessian: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: f64 = (0..n).map(|k| b[k][i] * b[k][j]).sum();
                    s + if i == j { 0.1 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let linear = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let rows = (0..m)
        .map(|i| {
            ConstraintRow::new(
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                rng.gen_range(-2.0..1.0),
                format!("r{i}"),
            )
        })
        .collect();
    let mut lower = vec![f64::NEG_INFINITY; n];
    let mut upper = vec![f64::INFINITY; n];
    for j in 0..n {
        if rng.gen_bool(0.3) {
            lower[j] = rng.gen_range(-2.0..0.0);
            upper[j] = lower[j] + rng.gen_range(0.1..3.0);
        }
    }
    QpProblem::new(hessian, linear).with_rows(rows).with_box(lower, upper)
}
