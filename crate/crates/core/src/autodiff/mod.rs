//! Nested forward-mode differentiation and Lie derivatives.

mod field;
mod jet;
mod lie;

pub use field::ScalarField;
pub use jet::Jet;
pub use lie::{directional, gradient, lie_along_f, lie_along_g, lie_with_value, ControlRowField};
