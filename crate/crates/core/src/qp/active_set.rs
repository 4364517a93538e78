//! Goldfarb–Idnani dual active-set method.
//!
//! Starts at the unconstrained minimizer and repeatedly adds the most violated
//! inequality, dropping working constraints whose multiplier would turn
//! negative. Every iterate is dual feasible, so the first primal-feasible
//! iterate is optimal; a violated inequality that admits neither a primal nor
//! a dual step certifies infeasibility.

use crate::error::Result;
use crate::scalar::Real;

use super::linalg::{backward, cholesky, cholesky_solve, dot, forward, mat_vec};
use super::{kkt_residuals, QpProblem, QpSolution, QpStatus, SolverOptions};

pub fn solve<T: Real>(problem: &QpProblem<T>) -> Result<QpSolution<T>> {
    solve_with(problem, &SolverOptions::default())
}

pub fn solve_with<T: Real>(problem: &QpProblem<T>, options: &SolverOptions<T>) -> Result<QpSolution<T>> {
    problem.validate()?;
    let n = problem.dim();
    let constraints = problem.constraints();
    let m = constraints.len();
    let max_iterations = if options.max_iterations == 0 {
        50 + 10 * (n + m)
    } else {
        options.max_iterations
    };

    let shifted: Vec<Vec<T>> = shift(&problem.hessian, -options.min_eigenvalue);
    let (l, regularization) = match cholesky(&shifted) {
        Some(_) => (cholesky(&problem.hessian), T::zero()),
        None => (cholesky(&shift(&problem.hessian, options.regularization)), options.regularization),
    };
    let Some(l) = l else {
        return Err(crate::error::Error::invalid(
            "hessian",
            "not positive definite even after regularization",
        ));
    };

    let mut x: Vec<T> = cholesky_solve(&l, &problem.linear).into_iter().map(|v| -v).collect();
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<T> = Vec::new();
    let mut iterations = 0;

    let slack = |x: &[T], i: usize| dot(&constraints[i].0, x) + constraints[i].1;
    let violated = |x: &[T], i: usize| {
        let (a, r, _) = &constraints[i];
        let scale = a
            .iter()
            .zip(x)
            .fold(T::one().max(r.abs()), |s, (&ai, &xi)| s.max((ai * xi).abs()));
        slack(x, i) < -options.feasibility_tol * scale
    };

    let finish = |x: Vec<T>, status, active: &[usize], u: &[T], iterations, conflict: Vec<usize>| QpSolution {
        objective: problem.objective(&x),
        z: x,
        status,
        active: active.iter().map(|&i| constraints[i].2).collect(),
        multipliers: u.to_vec(),
        iterations,
        regularization,
        conflict: conflict.into_iter().map(|i| constraints[i].2).collect(),
    };

    loop {
        // most violated, lowest index on ties
        let mut pick: Option<(usize, T)> = None;
        for i in 0..m {
            if active.contains(&i) || !violated(&x, i) {
                continue;
            }
            let s = slack(&x, i);
            if pick.is_none_or(|(_, worst)| s < worst) {
                pick = Some((i, s));
            }
        }
        let Some((p, _)) = pick else {
            let candidate = finish(x.clone(), QpStatus::Optimal, &active, &u, iterations, Vec::new());
            let rows: Vec<&[T]> = active.iter().map(|&i| constraints[i].0.as_slice()).collect();
            let rhs: Vec<T> = active.iter().map(|&i| constraints[i].1).collect();
            let h = shift(&problem.hessian, regularization);
            return Ok(refine(problem, &h, &l, &rows, &rhs, candidate));
        };

        let np = &constraints[p].0;
        let c = forward(&l, np);
        let mut up = T::zero();
        loop {
            iterations += 1;
            if iterations > max_iterations {
                return Ok(finish(x, QpStatus::Degenerate, &active, &u, iterations, Vec::new()));
            }
            // B = L⁻¹ N, r = (BᵀB)⁻¹ Bᵀ c, w = c − B r, step z = L⁻ᵀ w
            let b: Vec<Vec<T>> = active.iter().map(|&i| forward(&l, &constraints[i].0)).collect();
            let r = if b.is_empty() {
                Vec::new()
            } else {
                let gram: Vec<Vec<T>> = b.iter().map(|bi| b.iter().map(|bj| dot(bi, bj)).collect()).collect();
                let rhs: Vec<T> = b.iter().map(|bi| dot(bi, &c)).collect();
                match cholesky(&gram) {
                    Some(g) => cholesky_solve(&g, &rhs),
                    None => {
                        return Ok(finish(x, QpStatus::Degenerate, &active, &u, iterations, Vec::new()));
                    }
                }
            };
            let mut w = c.clone();
            for (bi, &ri) in b.iter().zip(&r) {
                for (wk, &bk) in w.iter_mut().zip(bi) {
                    *wk = *wk - ri * bk;
                }
            }
            let zn = dot(&w, &w);
            let dependent = zn <= options.dependence_tol * dot(&c, &c);

            let mut t1: Option<(usize, T)> = None;
            for (k, (&rk, &uk)) in r.iter().zip(&u).enumerate() {
                if rk > T::zero() {
                    let t = uk / rk;
                    if t1.is_none_or(|(_, best)| t < best) {
                        t1 = Some((k, t));
                    }
                }
            }

            if dependent {
                let Some((k, t)) = t1 else {
                    let mut conflict = active.clone();
                    conflict.push(p);
                    return Ok(finish(x, QpStatus::Infeasible, &active, &u, iterations, conflict));
                };
                for (uj, &rj) in u.iter_mut().zip(&r) {
                    *uj = *uj - t * rj;
                }
                up = up + t;
                active.remove(k);
                u.remove(k);
                continue;
            }

            let t2 = (-slack(&x, p) / zn).max(T::zero());
            let full = t1.is_none_or(|(_, t)| t2 <= t);
            let t = if full { t2 } else { t1.expect("partial step has a blocking multiplier").1 };
            let z = backward(&l, &w);
            for (xi, &zi) in x.iter_mut().zip(&z) {
                *xi = *xi + t * zi;
            }
            for (uj, &rj) in u.iter_mut().zip(&r) {
                *uj = (*uj - t * rj).max(T::zero());
            }
            up = up + t;
            if full {
                active.push(p);
                u.push(up);
                break;
            }
            let (k, _) = t1.expect("partial step has a blocking multiplier");
            active.remove(k);
            u.remove(k);
        }
    }
}

/// Iterative refinement of the equality-constrained KKT system on the final
/// working set. The incremental updates accumulate rounding error when the
/// working rows are nearly dependent; a refined point is kept only when no
/// KKT residual gets worse.
fn refine<T: Real>(
    problem: &QpProblem<T>,
    h: &[Vec<T>],
    l: &[Vec<T>],
    rows: &[&[T]],
    rhs: &[T],
    start: QpSolution<T>,
) -> QpSolution<T> {
    if rows.is_empty() {
        return start;
    }
    let b: Vec<Vec<T>> = rows.iter().map(|a| forward(l, a)).collect();
    let gram: Vec<Vec<T>> = b.iter().map(|bi| b.iter().map(|bj| dot(bi, bj)).collect()).collect();
    let Some(g) = cholesky(&gram) else { return start };
    let worst = |s: &QpSolution<T>| {
        let k = kkt_residuals(problem, s);
        (k.stationarity.max(k.primal).max(k.complementarity), k.dual)
    };
    let mut best = start;
    let mut best_score = worst(&best);
    let mut current = best.clone();
    for _ in 0..3 {
        // e1 = H z − N λ + c, e2 = Nᵀ z + r
        let mut e1 = mat_vec(h, &current.z);
        for (e, &c) in e1.iter_mut().zip(&problem.linear) {
            *e = *e + c;
        }
        for (a, &lam) in rows.iter().zip(&current.multipliers) {
            for (e, &ai) in e1.iter_mut().zip(a.iter()) {
                *e = *e - lam * ai;
            }
        }
        let e2: Vec<T> = rows.iter().zip(rhs).map(|(a, &r)| dot(a, &current.z) + r).collect();
        // BᵀB dλ = Bᵀ L⁻¹ e1 − e2, dz = L⁻ᵀ (B dλ − L⁻¹ e1)
        let y = forward(l, &e1);
        let rhs_l: Vec<T> = b.iter().zip(&e2).map(|(bi, &e)| dot(bi, &y) - e).collect();
        let dl = cholesky_solve(&g, &rhs_l);
        let mut w: Vec<T> = y.iter().map(|&v| -v).collect();
        for (bi, &d) in b.iter().zip(&dl) {
            for (wk, &bk) in w.iter_mut().zip(bi) {
                *wk = *wk + d * bk;
            }
        }
        let dz = backward(l, &w);
        for (zi, &d) in current.z.iter_mut().zip(&dz) {
            *zi = *zi + d;
        }
        for (u, &d) in current.multipliers.iter_mut().zip(&dl) {
            *u = *u + d;
        }
        current.objective = problem.objective(&current.z);
        let score = worst(&current);
        if score.1 <= best_score.1 && score.0 < best_score.0 {
            best = current.clone();
            best_score = score;
        }
    }
    best
}

fn shift<T: Real>(h: &[Vec<T>], by: T) -> Vec<Vec<T>> {
    h.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| if i == j { v + by } else { v })
                .collect()
        })
        .collect()
}
