use crate::dynamics::AffineSystem;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Jet, ScalarField};

/// Evaluates `h` at `x + ε dir` on a fresh top tag.
///
/// Returns `(h(x), ∇h(x)·dir)`, both at the depth of the inputs.
pub fn directional<T: Real>(h: &ScalarField<T>, x: &[Jet<T>], dir: &[Jet<T>]) -> (Jet<T>, Jet<T>) {
    let depth = x.iter().chain(dir).map(Jet::depth).max().unwrap_or(0);
    let seeded: Vec<Jet<T>> = x
        .iter()
        .zip(dir)
        .map(|(xi, di)| Jet::with_tangent(&xi.promoted(depth), &di.promoted(depth)))
        .collect();
    h.eval_jets(&seeded).split_top(depth + 1)
}

/// `(h(x), L_f h(x))` in one pass.
pub fn lie_with_value<T: Real>(
    h: &ScalarField<T>,
    sys: &AffineSystem<T>,
    x: &[Jet<T>],
) -> (Jet<T>, Jet<T>) {
    let fx = sys.drift_jets(x);
    directional(h, x, &fx)
}

/// `∇h(x)`.
pub fn gradient<T: Real>(h: &ScalarField<T>, x: &[T]) -> Result<Vec<T>> {
    let n = h.arity();
    if x.len() != n {
        return Err(Error::dimension(format!("argument of {}", h.label()), n, x.len()));
    }
    let xj: Vec<Jet<T>> = x.iter().map(|&v| Jet::constant(v)).collect();
    (0..n)
        .map(|i| {
            let dir: Vec<Jet<T>> = (0..n)
                .map(|k| Jet::constant(if k == i { T::one() } else { T::zero() }))
                .collect();
            let (_, d) = directional(h, &xj, &dir);
            h.checked(d).map(|j| j.value())
        })
        .collect()
}

/// The field `x ↦ ∇h(x)·f(x)`.
pub fn lie_along_f<T: Real>(h: &ScalarField<T>, sys: &AffineSystem<T>) -> ScalarField<T> {
    check_arity(h, sys);
    let inner = h.clone();
    let sys = sys.clone();
    ScalarField::new(h.arity(), format!("L_f[{}]", h.label()), move |x| {
        lie_with_value(&inner, &sys, x).1
    })
}

/// The row field `x ↦ ∇h(x)·g(x)`.
pub fn lie_along_g<T: Real>(h: &ScalarField<T>, sys: &AffineSystem<T>) -> ControlRowField<T> {
    check_arity(h, sys);
    ControlRowField {
        h: h.clone(),
        sys: sys.clone(),
    }
}

fn check_arity<T: Real>(h: &ScalarField<T>, sys: &AffineSystem<T>) {
    assert_eq!(
        h.arity(),
        sys.state_dim(),
        "field {} has arity {} but the system has {} states",
        h.label(),
        h.arity(),
        sys.state_dim()
    );
}

/// `L_g h` as a `q`-row of fields.
#[derive(Clone, Debug)]
pub struct ControlRowField<T> {
    h: ScalarField<T>,
    sys: AffineSystem<T>,
}

impl<T: Real> ControlRowField<T> {
    pub fn eval_jets(&self, x: &[Jet<T>]) -> Vec<Jet<T>> {
        self.sys
            .input_jets(x)
            .iter()
            .map(|col| directional(&self.h, x, col).1)
            .collect()
    }

    pub fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.h.arity() {
            return Err(Error::dimension(
                format!("argument of L_g[{}]", self.h.label()),
                self.h.arity(),
                x.len(),
            ));
        }
        let xj: Vec<Jet<T>> = x.iter().map(|&v| Jet::constant(v)).collect();
        self.eval_jets(&xj)
            .into_iter()
            .map(|j| self.h.checked(j).map(|j| j.value()))
            .collect()
    }

    /// Component `j` as a standalone field, e.g. to differentiate it further.
    pub fn component(&self, j: usize) -> ScalarField<T> {
        let h = self.h.clone();
        let sys = self.sys.clone();
        ScalarField::new(h.arity(), format!("L_g{}[{}]", j + 1, h.label()), move |x| {
            let col = sys.input_jets(x).swap_remove(j);
            directional(&h, x, &col).1
        })
    }

    pub fn len(&self) -> usize {
        self.sys.control_dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
