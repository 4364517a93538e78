use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Jet;

type FieldFn<T> = dyn Fn(&[Jet<T>]) -> Jet<T> + Send + Sync;

/// Scalar function of the state, evaluable on any jet depth.
///
/// Fields compose: Lie derivatives of a field are again fields, so the same
/// closure serves plain evaluation and every derivative order.
#[derive(Clone)]
pub struct ScalarField<T> {
    arity: usize,
    label: Arc<str>,
    func: Arc<FieldFn<T>>,
}

impl<T> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({}, arity {})", self.label, self.arity)
    }
}

impl<T: Real> ScalarField<T> {
    pub fn new(
        arity: usize,
        label: impl Into<String>,
        func: impl Fn(&[Jet<T>]) -> Jet<T> + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            arity,
            label: Arc::from(label.into()),
            func: Arc::new(func),
        }
    }

    pub fn constant(arity: usize, value: T) -> Self {
        Self::new(arity, format!("{value}"), move |_| Jet::constant(value))
    }

    /// The `index`-th state coordinate.
    pub fn coordinate(arity: usize, index: usize) -> Self {
        Self::new(arity, format!("x[{index}]"), move |x| x[index].clone())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = Arc::from(label.into());
        self
    }

    pub fn eval_jets(&self, x: &[Jet<T>]) -> Jet<T> {
        (self.func)(x)
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.arity {
            return Err(Error::dimension(format!("argument of {}", self.label), self.arity, x.len()));
        }
        let jets: Vec<Jet<T>> = x.iter().map(|&v| Jet::constant(v)).collect();
        let out = self.eval_jets(&jets);
        self.checked(out).map(|j| j.value())
    }

    pub(crate) fn checked(&self, out: Jet<T>) -> Result<Jet<T>> {
        match out.fault() {
            Some(primitive) => Err(Error::NonFinite {
                primitive,
                context: self.label.to_string(),
            }),
            None if !out.value().is_finite() => Err(Error::NonFinite {
                primitive: "result",
                context: self.label.to_string(),
            }),
            None => Ok(out),
        }
    }

    /// The same function on a larger state whose first `self.arity()`
    /// coordinates are the original state.
    pub fn lift(&self, arity: usize) -> Self {
        assert!(arity >= self.arity, "lift cannot shrink the state");
        let inner = self.clone();
        let n = self.arity;
        ScalarField::new(arity, self.label.to_string(), move |y| inner.eval_jets(&y[..n]))
    }

    /// Pointwise `op(self)`.
    pub fn map(
        &self,
        label: impl Into<String>,
        op: impl Fn(&Jet<T>) -> Jet<T> + Send + Sync + 'static,
    ) -> Self {
        let inner = self.clone();
        ScalarField::new(self.arity, label, move |x| op(&inner.eval_jets(x)))
    }
}
