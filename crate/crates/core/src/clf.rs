//! Soft Lyapunov constraint `L_f V + L_g V u + c V ≤ δ` driving the robot
//! toward a target position.

use serde::{Deserialize, Serialize};

use crate::autodiff::{lie_along_g, lie_with_value, Jet, ScalarField};
use crate::barrier::ConstraintRow;
use crate::dynamics::{lift, unicycle_index as ix, AffineSystem};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gains of the unicycle steering Lyapunov function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteeringGains<T> {
    /// `k_θ`: desired turn rate per radian of heading error.
    pub heading: T,
    /// `k_v`: reference speed per metre of distance before saturation.
    pub speed: T,
    /// Saturation of the reference speed.
    pub max_speed: T,
    /// `ε`: smooths the distance at the target and the bearing behind it.
    pub blend: T,
}

impl<T: Real> Default for SteeringGains<T> {
    fn default() -> Self {
        SteeringGains {
            heading: T::lit(2.0),
            speed: T::one(),
            max_speed: T::lit(5.0),
            blend: T::lit(0.1),
        }
    }
}

/// How the longitudinal input enters `V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpeedChannel<T> {
    /// The force is a decision input: `v̇ = u_2 / M`.
    Force,
    /// The force is the state at `index`; `V` also penalises
    /// `(u_2/M − k_a (v_ref − v))²` so its integrator input appears.
    IntegratedForce { index: usize, mass: T, gain: T },
}

#[derive(Clone, Debug)]
pub struct ClfSpec<T> {
    pub target: [T; 2],
    pub v: ScalarField<T>,
    /// `c` in `V̇ + cV ≤ δ`.
    pub rate: T,
    /// `p_slack` in the QP cost `p_slack δ²`.
    pub slack_weight: T,
}

impl<T: Real> ClfSpec<T> {
    pub fn new(target: [T; 2], v: ScalarField<T>, rate: T, slack_weight: T) -> Result<Self> {
        if !(rate > T::zero() && rate.is_finite()) {
            return Err(Error::invalid("clf rate", format!("must be positive, got {rate}")));
        }
        if !(slack_weight > T::zero() && slack_weight.is_finite()) {
            return Err(Error::invalid("slack weight", format!("must be positive, got {slack_weight}")));
        }
        Ok(ClfSpec {
            target,
            v,
            rate,
            slack_weight,
        })
    }
}

/// `coeffs · u + constant + slack · δ ≤ 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClfRow<T> {
    pub coeffs: Vec<T>,
    /// `L_f V + c V`.
    pub constant: T,
    pub slack: T,
    pub value: T,
}

impl<T: Real> ClfRow<T> {
    /// The same inequality as a `≥ 0` row over `(u, δ)`.
    pub fn to_constraint(&self) -> ConstraintRow<T> {
        let mut coeffs: Vec<T> = self.coeffs.iter().map(|&c| -c).collect();
        coeffs.push(-self.slack);
        ConstraintRow::new(coeffs, -self.constant, "clf")
    }

    pub fn residual(&self, u: &[T], delta: T) -> T {
        self.coeffs
            .iter()
            .zip(u)
            .fold(self.constant + self.slack * delta, |acc, (&a, &v)| acc + a * v)
    }
}

/// Heading error toward `target`, reference speed and the Lyapunov value.
///
/// With `e_θ = atan2(Δy cosθ − Δx sinθ, Δx cosθ + Δy sinθ + ε)` and
/// `v_ref = v_max tanh(k_v (√(ρ² + ε²) − ε) / v_max)`,
/// `V = e_θ² + (φ − k_θ e_θ)² + (v − v_ref)²`.
pub fn unicycle_steering_clf<T: Real>(
    arity: usize,
    target: [T; 2],
    gains: SteeringGains<T>,
    channel: SpeedChannel<T>,
) -> Result<ScalarField<T>> {
    if arity < 5 {
        return Err(Error::dimension("steering clf state", 5, arity));
    }
    for (name, v) in [
        ("heading gain", gains.heading),
        ("speed gain", gains.speed),
        ("max speed", gains.max_speed),
        ("blend", gains.blend),
    ] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::invalid(name, format!("must be positive, got {v}")));
        }
    }
    if let SpeedChannel::IntegratedForce { index, mass, gain } = channel {
        if index >= arity {
            return Err(Error::dimension("integrated force index", arity, index));
        }
        if !(mass > T::zero() && gain > T::zero()) {
            return Err(Error::invalid("integrated force", "mass and gain must be positive"));
        }
    }
    let label = format!("steering clf to ({}, {})", target[0], target[1]);
    Ok(ScalarField::new(arity, label, move |s: &[Jet<T>]| {
        let dx = -&s[ix::X] + target[0];
        let dy = -&s[ix::Y] + target[1];
        let (c, sn) = (s[ix::THETA].cos(), s[ix::THETA].sin());
        let across = &dy * &c - &dx * &sn;
        let along = &dx * &c + &dy * &sn + gains.blend;
        let heading_err = across.atan2(&along);
        let eps = gains.blend;
        let rho = (dx.square() + dy.square() + eps * eps).sqrt() - eps;
        let v_ref = (rho * (gains.speed / gains.max_speed)).tanh() * gains.max_speed;
        let turn = &s[ix::PHI] - &heading_err * gains.heading;
        let speed_err = &s[ix::V] - &v_ref;
        let mut v = heading_err.square() + turn.square() + speed_err.square();
        if let SpeedChannel::IntegratedForce { index, mass, gain } = channel {
            let accel = &s[index] * mass.recip() - (v_ref - &s[ix::V]) * gain;
            v = v + accel.square();
        }
        v
    }))
}

/// `L_g V(x) u + L_f V(x) + c V(x) − δ ≤ 0`.
pub fn clf_row<T: Real>(spec: &ClfSpec<T>, sys: &AffineSystem<T>, x: &[T]) -> Result<ClfRow<T>> {
    if x.len() != sys.state_dim() || spec.v.arity() != sys.state_dim() {
        return Err(Error::dimension("clf state", sys.state_dim(), x.len()));
    }
    let (value, lie) = lie_with_value(&spec.v, sys, &lift(x));
    let value = spec.v.checked(value)?.value();
    let lie = spec.v.checked(lie)?.value();
    let coeffs = lie_along_g(&spec.v, sys).eval(x)?;
    let row = ClfRow {
        coeffs,
        constant: lie + spec.rate * value,
        slack: -T::one(),
        value,
    };
    if !(row.constant.is_finite() && row.coeffs.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite {
            primitive: "row",
            context: "clf".into(),
        });
    }
    Ok(row)
}
