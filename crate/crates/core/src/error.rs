use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value produced by `{primitive}` while evaluating {context}")]
    NonFinite {
        primitive: &'static str,
        context: String,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error(
        "premature control appearance: control component {component} shows at order {order} \
         (< declared relative degree {declared}); use the integral method or a lower degree"
    )]
    PrematureControl {
        component: usize,
        order: usize,
        declared: usize,
    },

    #[error("class-K function {index} provides smoothness order {available}, {required} required")]
    SmoothnessDeficit {
        index: usize,
        available: usize,
        required: usize,
    },

    #[error("probe failure: {0}")]
    ProbeFailure(String),

    #[error("auxiliary dynamics: {0}")]
    Auxiliary(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn dimension(context: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            got,
        }
    }
}
