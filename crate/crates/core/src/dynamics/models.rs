use crate::autodiff::{Jet, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{AffineSystem, ControlBounds, StateBox};

/// State layout of the unicycle `(x, y, v, θ, φ)`.
pub mod unicycle_index {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const V: usize = 2;
    pub const THETA: usize = 3;
    pub const PHI: usize = 4;
    /// Angular acceleration.
    pub const U_STEER: usize = 0;
    /// Driving force.
    pub const U_FORCE: usize = 1;
}

pub fn unicycle_labels() -> ([&'static str; 5], [&'static str; 2]) {
    (["x", "y", "v", "theta", "phi"], ["u1", "u2"])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnicycleParams<T> {
    /// Mass in kg.
    pub mass: T,
}

/// `ẋ = v cosθ, ẏ = v sinθ, v̇ = u₂/M, θ̇ = φ, φ̇ = u₁`.
pub fn make_unicycle<T: Real>(
    params: UnicycleParams<T>,
    bounds: ControlBounds<T>,
) -> Result<AffineSystem<T>> {
    let mass = params.mass;
    if !(mass > T::zero() && mass.is_finite()) {
        return Err(Error::invalid("mass", format!("must be positive and finite, got {mass}")));
    }
    let inv_mass = mass.recip();
    let (states, controls) = unicycle_labels();
    let sys = AffineSystem::new(
        5,
        2,
        |x: &[Jet<T>]| {
            let v = &x[2];
            let theta = &x[3];
            vec![
                v * theta.cos(),
                v * theta.sin(),
                Jet::zero(),
                x[4].clone(),
                Jet::zero(),
            ]
        },
        move |_x: &[Jet<T>]| {
            let z = || Jet::zero();
            vec![
                vec![z(), z(), z(), z(), Jet::constant(T::one())],
                vec![z(), z(), Jet::constant(inv_mass), z(), z()],
            ]
        },
        bounds,
    )?
    .with_labels(&states, &controls);
    let pi = T::PI();
    let domain = StateBox::new(
        vec![T::lit(-50.0), T::lit(-50.0), T::zero(), -pi, T::lit(-1.0)],
        vec![T::lit(100.0), T::lit(100.0), T::lit(10.0), pi, T::lit(1.0)],
    )?;
    sys.with_domain(domain)
}

/// `ẋ = u` with `n` states and `n` unbounded controls.
pub fn single_integrator<T: Real>(n: usize) -> AffineSystem<T> {
    AffineSystem::new(
        n,
        n,
        move |_x: &[Jet<T>]| vec![Jet::zero(); n],
        move |_x: &[Jet<T>]| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|i| Jet::constant(if i == j { T::one() } else { T::zero() }))
                        .collect()
                })
                .collect()
        },
        ControlBounds::unbounded(n),
    )
    .expect("single integrator dimensions are consistent")
}

/// `ẋ₁ = x₂, ẋ₂ = u` with an unbounded scalar control.
pub fn double_integrator<T: Real>() -> AffineSystem<T> {
    AffineSystem::new(
        2,
        1,
        |x: &[Jet<T>]| vec![x[1].clone(), Jet::zero()],
        |_x: &[Jet<T>]| vec![vec![Jet::zero(), Jet::constant(T::one())]],
        ControlBounds::unbounded(1),
    )
    .expect("double integrator dimensions are consistent")
    .with_labels(&["position", "velocity"], &["u"])
}

/// `sqrt((p_x - c_x)² + (p_y - c_y)²) - margin` on the point `(state[0], state[1])`.
///
/// With `offset > 0` the point is moved ahead of the control point along the
/// heading `state[3]`, i.e. `(x + d cosθ, y + d sinθ)`.
pub fn obstacle_barrier<T: Real>(
    arity: usize,
    center: [T; 2],
    margin: T,
    offset: T,
) -> ScalarField<T> {
    let label = if offset == T::zero() {
        format!("clearance(control point, ({}, {})) - {}", center[0], center[1], margin)
    } else {
        format!("clearance(center d={offset}, ({}, {})) - {}", center[0], center[1], margin)
    };
    ScalarField::new(arity, label, move |s: &[Jet<T>]| {
        let (mut px, mut py) = (s[0].clone(), s[1].clone());
        if offset != T::zero() {
            px = px + s[3].cos() * offset;
            py = py + s[3].sin() * offset;
        }
        let dx = px - center[0];
        let dy = py - center[1];
        (dx.square() + dy.square()).sqrt() - margin
    })
}
