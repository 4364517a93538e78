use serde::{Deserialize, Serialize};

use crate::autodiff::Jet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Class-K function `α` used in the ψ recursion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassK<T> {
    /// `α(s) = k s` with `k > 0`; class K and extended class K.
    Linear { gain: T },
    /// Same map, declared as extended class K on all of ℝ.
    ExtendedLinear { gain: T },
    /// `α(s) = k sign(s)|s|^p`. Smoothness at the origin is only as good as
    /// `p` allows, so the caller declares it.
    Power { gain: T, exponent: T, smoothness: usize },
}

impl<T: Real> ClassK<T> {
    pub fn linear(gain: T) -> Self {
        ClassK::Linear { gain }
    }

    pub fn validate(&self) -> Result<()> {
        let (gain, ok_extra) = match *self {
            ClassK::Linear { gain } | ClassK::ExtendedLinear { gain } => (gain, true),
            ClassK::Power { gain, exponent, .. } => (gain, exponent > T::zero() && exponent.is_finite()),
        };
        if !(gain > T::zero() && gain.is_finite()) {
            return Err(Error::invalid("class-K gain", format!("must be positive, got {gain}")));
        }
        if !ok_extra {
            return Err(Error::invalid("class-K exponent", "must be positive and finite"));
        }
        Ok(())
    }

    /// Number of continuous derivatives available.
    pub fn smoothness(&self) -> usize {
        match self {
            ClassK::Linear { .. } | ClassK::ExtendedLinear { .. } => usize::MAX,
            ClassK::Power { smoothness, .. } => *smoothness,
        }
    }

    pub fn apply(&self, s: T) -> T {
        match *self {
            ClassK::Linear { gain } | ClassK::ExtendedLinear { gain } => gain * s,
            ClassK::Power { gain, exponent, .. } => gain * s.signum() * s.abs().powf(exponent),
        }
    }

    pub fn apply_jet(&self, s: &Jet<T>) -> Jet<T> {
        match *self {
            ClassK::Linear { gain } | ClassK::ExtendedLinear { gain } => s * gain,
            ClassK::Power { gain, exponent, .. } => {
                if s.value() >= T::zero() {
                    s.powf(exponent) * gain
                } else {
                    -(-s).powf(exponent) * gain
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_zero_and_strictly_increasing() {
        let fns = [
            ClassK::linear(1.0),
            ClassK::ExtendedLinear { gain: 3.0 },
            ClassK::Power { gain: 2.0, exponent: 3.0, smoothness: 2 },
        ];
        for a in fns {
            a.validate().unwrap();
            assert_eq!(a.apply(0.0), 0.0);
            let grid: Vec<f64> = (0..=200).map(|i| -2.0 + 0.02 * i as f64).collect();
            for w in grid.windows(2) {
                assert!(a.apply(w[1]) > a.apply(w[0]), "{a:?} not increasing at {}", w[0]);
            }
        }
    }

    #[test]
    fn rejects_non_positive_gain() {
        assert!(ClassK::linear(0.0).validate().is_err());
        assert!(ClassK::Power { gain: 1.0, exponent: -1.0, smoothness: 0 }.validate().is_err());
    }
}
