//! Fixed-step explicit integrators under a zero-order-held control.

use serde::{Deserialize, Serialize};

use crate::dynamics::AffineSystem;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// One step of `ẋ = rhs(x)`.
pub fn step<T: Real>(
    x: &[T],
    dt: T,
    method: Integrator,
    rhs: impl Fn(&[T]) -> Result<Vec<T>>,
) -> Result<Vec<T>> {
    if !(dt > T::zero()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let axpy = |a: &[T], k: &[T], h: T| -> Vec<T> { a.iter().zip(k).map(|(&a, &k)| a + h * k).collect() };
    let next = match method {
        Integrator::Euler => axpy(x, &rhs(x)?, dt),
        Integrator::Rk4 => {
            let half = dt * T::lit(0.5);
            let k1 = rhs(x)?;
            let k2 = rhs(&axpy(x, &k1, half))?;
            let k3 = rhs(&axpy(x, &k2, half))?;
            let k4 = rhs(&axpy(x, &k3, dt))?;
            let sixth = dt / T::lit(6.0);
            let two = T::lit(2.0);
            x.iter()
                .enumerate()
                .map(|(i, &xi)| xi + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
                .collect()
        }
    };
    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            primitive: "integrator step",
            context: format!("state component {i}"),
        });
    }
    Ok(next)
}

/// One step of `sys` with `u` held constant over `dt`.
pub fn step_integrate<T: Real>(
    sys: &AffineSystem<T>,
    x: &[T],
    u: &[T],
    dt: T,
    method: Integrator,
) -> Result<Vec<T>> {
    step(x, dt, method, |s| sys.dynamics(s, u))
}
