//! Error taxonomy and resource limits shared by every module.

use thiserror::Error;

/// Failure modes surfaced to callers; messages carry the originating module.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A stated precondition does not hold (bad geometry, bad parameter).
    #[error("{0}")]
    Precondition(String),
    /// An explicit resource cap would be exceeded.
    #[error("{0}")]
    Capacity(String),
    /// A numeric routine failed to converge or produced an unusable value.
    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(module: &str, msg: impl AsRef<str>) -> Error {
    Error::Precondition(format!("{}: {}", module, msg.as_ref()))
}

pub(crate) fn capacity(module: &str, msg: impl AsRef<str>) -> Error {
    Error::Capacity(format!("{}: {}", module, msg.as_ref()))
}

pub(crate) fn numerical(module: &str, msg: impl AsRef<str>) -> Error {
    Error::Numerical(format!("{}: {}", module, msg.as_ref()))
}

/// Resource caps. Defaults are desk-scale; every field can be raised by callers
/// that know what they are asking for.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Transfer-matrix state space holds `2^N` amplitudes; refuse wider rows.
    pub max_state_bits: usize,
    /// Exhaustive enumeration stops with an error beyond this many configurations.
    pub max_configs: u64,
    /// Dense matrices (Pfaffian, eigensolver) are refused above this dimension.
    pub max_matrix_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_state_bits: 22,
            max_configs: 10_000_000,
            max_matrix_dim: 4096,
        }
    }
}

impl Limits {
    pub fn check_state_bits(&self, n: usize) -> Result<()> {
        if n > self.max_state_bits {
            Err(capacity(
                "transfer",
                format!(
                    "row width {} exceeds state-space cap of {} bits (2^{} states); raise the cap explicitly to proceed",
                    n, self.max_state_bits, self.max_state_bits
                ),
            ))
        } else {
            Ok(())
        }
    }

    pub fn check_matrix_dim(&self, dim: usize) -> Result<()> {
        if dim > self.max_matrix_dim {
            Err(capacity(
                "linalg",
                format!("matrix dimension {} exceeds cap {}", dim, self.max_matrix_dim),
            ))
        } else {
            Ok(())
        }
    }
}
