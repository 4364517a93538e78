use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which HOCBF formulation enforces the obstacle constraint.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Degree-2 HOCBF on the control-point barrier; only the force appears.
    Standard,
    /// Degree-3 HOCBF with the force integrated from an auxiliary input.
    #[default]
    Integral,
    /// Degree-2 HOCBF on the geometric-center barrier.
    Transform,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Standard, Mode::Integral, Mode::Transform];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Integral => "integral",
            Mode::Transform => "transform",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Mode::Standard),
            "integral" => Ok(Mode::Integral),
            "transform" => Ok(Mode::Transform),
            other => Err(format!(
                "unknown mode `{other}` (expected standard, integral or transform)"
            )),
        }
    }
}
