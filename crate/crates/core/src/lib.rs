//! High order control barrier functions for affine systems with several
//! control inputs.
//!
//! Barriers whose control components appear at different derivative orders
//! are handled either by integrating the early components
//! ([`integral`]) or by switching to a transformed barrier of uniform
//! relative degree ([`transform`]). Each timestep the resulting rows are
//! solved as a small dense QP ([`qp`]) inside a closed-loop simulator
//! ([`sim`]).
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below pin it to `f64`.

pub mod autodiff;
pub mod barrier;
pub mod clf;
pub mod dynamics;
pub mod error;
pub mod integral;
pub mod integrate;
pub mod mode;
pub mod qp;
pub mod scalar;
pub mod sim;
pub mod transform;

pub use error::{Error, Result};
pub use mode::Mode;
pub use scalar::Real;

pub type Jet64 = autodiff::Jet<f64>;
pub type Field64 = autodiff::ScalarField<f64>;
pub type System64 = dynamics::AffineSystem<f64>;
pub type Row64 = barrier::ConstraintRow<f64>;
