//! Affine control systems `ẋ = f(x) + g(x)u` with box control bounds.
//!
//! Dynamics are closures over the [`Jet`] algebra so every Lie derivative of a
//! barrier along them can be taken by nested forward differentiation.

mod augmented;
mod models;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Jet;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use augmented::{compose_augmented, AugmentedSystem, AuxiliaryDynamics, ChainDynamics, ControlSlot};
pub use models::{
    double_integrator, make_unicycle, obstacle_barrier, single_integrator, unicycle_labels,
    UnicycleParams, unicycle_index,
};

pub type DriftFn<T> = dyn Fn(&[Jet<T>]) -> Vec<Jet<T>> + Send + Sync;
/// Returns the `q` columns of `g(x)`, each of length `n`.
pub type InputFn<T> = dyn Fn(&[Jet<T>]) -> Vec<Vec<Jet<T>>> + Send + Sync;

/// Componentwise control box `u_min ≤ u ≤ u_max`. Infinite entries are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> ControlBounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dimension("control bounds", lower.len(), upper.len()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::invalid(
                    format!("bounds[{i}]"),
                    format!("u_min ({lo}) must not exceed u_max ({hi})"),
                ));
            }
        }
        Ok(ControlBounds { lower, upper })
    }

    /// Symmetric box `[-limit_i, limit_i]`.
    pub fn symmetric(limits: &[T]) -> Result<Self> {
        Self::new(limits.iter().map(|&l| -l).collect(), limits.to_vec())
    }

    pub fn unbounded(q: usize) -> Self {
        ControlBounds {
            lower: vec![T::neg_infinity(); q],
            upper: vec![T::infinity(); q],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, u: &[T]) -> bool {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| v >= lo && v <= hi)
    }
}

/// Componentwise clamp into the bounds; the final guard before actuation.
pub fn clamp_to_bounds<T: Real>(u: &[T], bounds: &ControlBounds<T>) -> Vec<T> {
    u.iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
        .collect()
}

/// Axis-aligned box of states, used for sampling probe states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> StateBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dimension("state box", lower.len(), upper.len()));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
        {
            return Err(Error::invalid("state box", "bounds must be finite with lower <= upper"));
        }
        Ok(StateBox { lower, upper })
    }

    pub fn unit(n: usize) -> Self {
        StateBox {
            lower: vec![-T::one(); n],
            upper: vec![T::one(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                let s: f64 = rng.gen();
                lo + (hi - lo) * T::lit(s)
            })
            .collect()
    }
}

/// `ẋ = f(x) + g(x)u`, immutable once built and cheap to clone.
#[derive(Clone)]
pub struct AffineSystem<T> {
    n: usize,
    q: usize,
    drift: Arc<DriftFn<T>>,
    input: Arc<InputFn<T>>,
    bounds: ControlBounds<T>,
    state_labels: Vec<String>,
    control_labels: Vec<String>,
    domain: Option<StateBox<T>>,
}

impl<T> fmt::Debug for AffineSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineSystem")
            .field("n", &self.n)
            .field("q", &self.q)
            .field("state_labels", &self.state_labels)
            .field("control_labels", &self.control_labels)
            .finish_non_exhaustive()
    }
}

impl<T: Real> AffineSystem<T> {
    pub fn new(
        n: usize,
        q: usize,
        drift: impl Fn(&[Jet<T>]) -> Vec<Jet<T>> + Send + Sync + 'static,
        input: impl Fn(&[Jet<T>]) -> Vec<Vec<Jet<T>>> + Send + Sync + 'static,
        bounds: ControlBounds<T>,
    ) -> Result<Self> {
        if bounds.dim() != q {
            return Err(Error::dimension("control bounds", q, bounds.dim()));
        }
        Ok(AffineSystem {
            n,
            q,
            drift: Arc::new(drift),
            input: Arc::new(input),
            bounds,
            state_labels: (0..n).map(|i| format!("x{}", i + 1)).collect(),
            control_labels: (0..q).map(|j| format!("u{}", j + 1)).collect(),
            domain: None,
        })
    }

    pub fn with_labels(mut self, states: &[&str], controls: &[&str]) -> Self {
        if states.len() == self.n {
            self.state_labels = states.iter().map(|s| s.to_string()).collect();
        }
        if controls.len() == self.q {
            self.control_labels = controls.iter().map(|s| s.to_string()).collect();
        }
        self
    }

    /// Nominal operating region used when probing relative degrees.
    pub fn with_domain(mut self, domain: StateBox<T>) -> Result<Self> {
        if domain.dim() != self.n {
            return Err(Error::dimension("probe domain", self.n, domain.dim()));
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn with_bounds(mut self, bounds: ControlBounds<T>) -> Result<Self> {
        if bounds.dim() != self.q {
            return Err(Error::dimension("control bounds", self.q, bounds.dim()));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn control_dim(&self) -> usize {
        self.q
    }

    pub fn bounds(&self) -> &ControlBounds<T> {
        &self.bounds
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn control_labels(&self) -> &[String] {
        &self.control_labels
    }

    pub fn domain(&self) -> StateBox<T> {
        self.domain.clone().unwrap_or_else(|| StateBox::unit(self.n))
    }

    pub fn drift_jets(&self, x: &[Jet<T>]) -> Vec<Jet<T>> {
        (self.drift)(x)
    }

    pub fn input_jets(&self, x: &[Jet<T>]) -> Vec<Vec<Jet<T>>> {
        (self.input)(x)
    }

    pub fn drift(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_state(x)?;
        let fx = self.drift_jets(&lift(x));
        values(&fx, "f(x)")
    }

    /// `g(x)` as `q` columns of length `n`.
    pub fn input_columns(&self, x: &[T]) -> Result<Vec<Vec<T>>> {
        self.check_state(x)?;
        self.input_jets(&lift(x))
            .iter()
            .map(|col| values(col, "g(x)"))
            .collect()
    }

    /// Full vector field `f(x) + g(x)u`.
    pub fn dynamics(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        if u.len() != self.q {
            return Err(Error::dimension("control vector", self.q, u.len()));
        }
        let mut dx = self.drift(x)?;
        for (col, &uj) in self.input_columns(x)?.iter().zip(u) {
            for (d, &c) in dx.iter_mut().zip(col) {
                *d = *d + c * uj;
            }
        }
        if let Some(bad) = dx.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                primitive: "f(x) + g(x)u",
                context: format!("state derivative component {bad}"),
            });
        }
        Ok(dx)
    }

    fn check_state(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::dimension("state vector", self.n, x.len()));
        }
        Ok(())
    }
}

pub(crate) fn lift<T: Real>(x: &[T]) -> Vec<Jet<T>> {
    x.iter().map(|&v| Jet::constant(v)).collect()
}

fn values<T: Real>(jets: &[Jet<T>], context: &str) -> Result<Vec<T>> {
    jets.iter()
        .map(|j| {
            if let Some(p) = j.fault() {
                Err(Error::NonFinite {
                    primitive: p,
                    context: context.to_string(),
                })
            } else {
                Ok(j.value())
            }
        })
        .collect()
}
