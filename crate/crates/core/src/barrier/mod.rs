//! Class-K functions, the ψ recursion and HOCBF constraint rows.

mod class_k;
mod degree;
mod psi;

use serde::Serialize;

use crate::scalar::Real;

pub use class_k::ClassK;
pub use degree::{detect_relative_degree_set, ProbeReport, ProbeSettings, RelativeDegreeSet};
pub use psi::{build_psi_sequence, hocbf_row, HocbfSpec, PsiSequence};

/// Linear inequality `coeffs · u + rhs ≥ 0` in the decision controls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintRow<T> {
    pub coeffs: Vec<T>,
    pub rhs: T,
    /// Which barrier and formulation produced the row.
    pub tag: String,
}

impl<T: Real> ConstraintRow<T> {
    pub fn new(coeffs: Vec<T>, rhs: T, tag: impl Into<String>) -> Self {
        ConstraintRow {
            coeffs,
            rhs,
            tag: tag.into(),
        }
    }

    /// `coeffs · u + rhs`; non-negative when the row is satisfied.
    pub fn slack(&self, u: &[T]) -> T {
        self.coeffs
            .iter()
            .zip(u)
            .fold(self.rhs, |acc, (&a, &v)| acc + a * v)
    }

    pub fn is_finite(&self) -> bool {
        self.rhs.is_finite() && self.coeffs.iter().all(|c| c.is_finite())
    }
}
