//! Dense strictly convex QPs `min ½ zᵀHz + fᵀz` subject to `a_i·z + r_i ≥ 0`
//! and a variable box.

mod active_set;
mod assemble;
pub mod linalg;

use serde::Serialize;

use crate::barrier::ConstraintRow;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use active_set::{solve, solve_with};
pub use assemble::{assemble_step_qp, StepQp, StepQpInput};

#[derive(Clone, Debug, PartialEq)]
pub struct QpProblem<T> {
    pub hessian: Vec<Vec<T>>,
    pub linear: Vec<T>,
    pub rows: Vec<ConstraintRow<T>>,
    /// `-∞` for no lower bound.
    pub lower: Vec<T>,
    /// `+∞` for no upper bound.
    pub upper: Vec<T>,
}

impl<T: Real> QpProblem<T> {
    /// No rows and an unbounded box.
    pub fn new(hessian: Vec<Vec<T>>, linear: Vec<T>) -> Self {
        let n = linear.len();
        QpProblem {
            hessian,
            linear,
            rows: Vec::new(),
            lower: vec![T::neg_infinity(); n],
            upper: vec![T::infinity(); n],
        }
    }

    pub fn with_rows(mut self, rows: Vec<ConstraintRow<T>>) -> Self {
        self.rows = rows;
        self
    }

    pub fn with_box(mut self, lower: Vec<T>, upper: Vec<T>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.hessian.len() != n || self.hessian.iter().any(|r| r.len() != n) {
            return Err(Error::dimension("hessian", n, self.hessian.len()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::dimension("variable box", n, self.lower.len().min(self.upper.len())));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::dimension(format!("row {i} ({})", row.tag), n, row.coeffs.len()));
            }
            if !row.is_finite() {
                return Err(Error::NonFinite {
                    primitive: "row",
                    context: format!("row {i} ({})", row.tag),
                });
            }
        }
        let finite = self.hessian.iter().flatten().chain(&self.linear).all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                primitive: "cost",
                context: "hessian or linear term".into(),
            });
        }
        let tol = T::epsilon().sqrt();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (self.hessian[i][j], self.hessian[j][i]);
                if (a - b).abs() > tol * T::one().max(a.abs()).max(b.abs()) {
                    return Err(Error::invalid("hessian", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        for (j, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::invalid(format!("box[{j}]"), "lower bound exceeds upper bound"));
            }
        }
        Ok(())
    }

    pub fn objective(&self, z: &[T]) -> T {
        let hz = linalg::mat_vec(&self.hessian, z);
        linalg::dot(z, &hz) * T::lit(0.5) + linalg::dot(&self.linear, z)
    }

    /// Every inequality as `(a, r, which)` with box sides after the rows.
    pub(crate) fn constraints(&self) -> Vec<(Vec<T>, T, ConstraintRef)> {
        let n = self.dim();
        let unit = |j: usize, s: T| {
            let mut a = vec![T::zero(); n];
            a[j] = s;
            a
        };
        let mut out: Vec<_> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.coeffs.clone(), r.rhs, ConstraintRef::Row(i)))
            .collect();
        for j in 0..n {
            if self.lower[j].is_finite() {
                out.push((unit(j, T::one()), -self.lower[j], ConstraintRef::Lower(j)));
            }
            if self.upper[j].is_finite() {
                out.push((unit(j, -T::one()), self.upper[j], ConstraintRef::Upper(j)));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QpStatus {
    Optimal,
    Infeasible,
    /// Iteration cap reached.
    Degenerate,
}

impl QpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            QpStatus::Optimal => "optimal",
            QpStatus::Infeasible => "infeasible",
            QpStatus::Degenerate => "degenerate",
        }
    }
}

/// An inequality of a [`QpProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintRef {
    Row(usize),
    Lower(usize),
    Upper(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpSolution<T> {
    pub z: Vec<T>,
    pub status: QpStatus,
    pub active: Vec<ConstraintRef>,
    /// Multipliers of `active`, same order.
    pub multipliers: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    /// Multiple of the identity added to `H`; zero when none was needed.
    pub regularization: T,
    /// For infeasible problems, the working set together with the row that
    /// could not be satisfied.
    pub conflict: Vec<ConstraintRef>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Zero picks `50 + 10 (n + m)`.
    pub max_iterations: usize,
    /// Relative violation treated as satisfied.
    pub feasibility_tol: T,
    /// Relative residual below which a new row is taken as dependent on the
    /// working set.
    pub dependence_tol: T,
    /// `H` is regularised when its smallest eigenvalue is below this.
    pub min_eigenvalue: T,
    pub regularization: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        SolverOptions {
            max_iterations: 0,
            feasibility_tol: eps * T::lit(1e3),
            dependence_tol: eps * T::lit(1e2),
            min_eigenvalue: T::lit(1e-10),
            regularization: T::lit(1e-9),
        }
    }
}

/// First-order optimality residuals, all `≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KktResiduals<T> {
    /// `‖Hz + f − Σ λ_i a_i‖_∞`.
    pub stationarity: T,
    /// Largest violation of any inequality.
    pub primal: T,
    /// `max |λ_i s_i|` over the active set.
    pub complementarity: T,
    /// `max(0, −min λ_i)`.
    pub dual: T,
}

pub fn kkt_residuals<T: Real>(problem: &QpProblem<T>, solution: &QpSolution<T>) -> KktResiduals<T> {
    let z = &solution.z;
    let mut grad = linalg::mat_vec(&problem.hessian, z);
    for ((g, &f), &zi) in grad.iter_mut().zip(&problem.linear).zip(z) {
        *g = *g + f + solution.regularization * zi;
    }
    let constraints = problem.constraints();
    let find = |r: ConstraintRef| constraints.iter().find(|c| c.2 == r);
    let mut complementarity = T::zero();
    let mut dual = T::zero();
    for (r, &lambda) in solution.active.iter().zip(&solution.multipliers) {
        if let Some((a, rhs, _)) = find(*r) {
            for (g, &ai) in grad.iter_mut().zip(a) {
                *g = *g - lambda * ai;
            }
            let s = linalg::dot(a, z) + *rhs;
            complementarity = complementarity.max((lambda * s).abs());
        }
        dual = dual.max(-lambda);
    }
    let primal = constraints
        .iter()
        .map(|(a, r, _)| -(linalg::dot(a, z) + *r))
        .fold(T::zero(), T::max);
    KktResiduals {
        stationarity: grad.iter().fold(T::zero(), |m, g| m.max(g.abs())),
        primal,
        complementarity,
        dual,
    }
}
