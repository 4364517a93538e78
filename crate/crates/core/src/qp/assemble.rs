use crate::barrier::ConstraintRow;
use crate::clf::ClfRow;
use crate::error::{Error, Result};
use crate::mode::Mode;
use crate::scalar::Real;

use super::QpProblem;

/// Everything one control step contributes to its QP, over the decision
/// controls (before the slack).
#[derive(Clone, Debug)]
pub struct StepQpInput<'a, T> {
    pub mode: Mode,
    pub labels: &'a [String],
    /// Cost `Σ w_j z_j²` on the decision controls.
    pub weights: &'a [T],
    pub lower: &'a [T],
    pub upper: &'a [T],
    /// Hard rows: HOCBF, bound and state-limit constraints.
    pub hard_rows: &'a [ConstraintRow<T>],
    pub clf: Option<&'a ClfRow<T>>,
    pub slack_weight: T,
}

#[derive(Clone, Debug)]
pub struct StepQp<T> {
    pub mode: Mode,
    pub problem: QpProblem<T>,
    /// Decision labels, `delta` last when a CLF row is present.
    pub labels: Vec<String>,
    pub slack_index: Option<usize>,
}

/// Decision vector `(controls, δ)`; cost `Σ w_j z_j² + p δ²`; hard rows padded
/// with a zero slack coefficient; the CLF row enters softly through `δ ≥ 0`.
pub fn assemble_step_qp<T: Real>(input: &StepQpInput<'_, T>) -> Result<StepQp<T>> {
    let q = input.labels.len();
    for (name, len) in [
        ("cost weights", input.weights.len()),
        ("lower bounds", input.lower.len()),
        ("upper bounds", input.upper.len()),
    ] {
        if len != q {
            return Err(Error::dimension(name, q, len));
        }
    }
    if input.weights.iter().any(|w| !(*w > T::zero() && w.is_finite())) {
        return Err(Error::invalid("cost weights", "must be positive and finite"));
    }
    let has_slack = input.clf.is_some();
    let n = q + usize::from(has_slack);
    let two = T::lit(2.0);

    let mut hessian = vec![vec![T::zero(); n]; n];
    for (j, &w) in input.weights.iter().enumerate() {
        hessian[j][j] = two * w;
    }
    let mut lower = input.lower.to_vec();
    let mut upper = input.upper.to_vec();
    let mut labels = input.labels.to_vec();

    let mut rows = Vec::with_capacity(input.hard_rows.len() + 1);
    for row in input.hard_rows {
        if row.coeffs.len() != q {
            return Err(Error::dimension(format!("row {}", row.tag), q, row.coeffs.len()));
        }
        if !row.is_finite() {
            return Err(Error::NonFinite {
                primitive: "row",
                context: row.tag.clone(),
            });
        }
        let mut coeffs = row.coeffs.clone();
        coeffs.resize(n, T::zero());
        rows.push(ConstraintRow::new(coeffs, row.rhs, row.tag.clone()));
    }
    if let Some(clf) = input.clf {
        if clf.coeffs.len() != q {
            return Err(Error::dimension("clf row", q, clf.coeffs.len()));
        }
        if !(input.slack_weight > T::zero() && input.slack_weight.is_finite()) {
            return Err(Error::invalid("slack weight", "must be positive and finite"));
        }
        hessian[q][q] = two * input.slack_weight;
        lower.push(T::zero());
        upper.push(T::infinity());
        labels.push("delta".into());
        rows.push(clf.to_constraint());
    }

    Ok(StepQp {
        mode: input.mode,
        problem: QpProblem::new(hessian, vec![T::zero(); n])
            .with_rows(rows)
            .with_box(lower, upper),
        labels,
        slack_index: has_slack.then_some(q),
    })
}
