//! Error types shared by the simulator and the circuits built on it.

use std::error::Error;
use std::fmt;

/// Failure modes of the ciphertext simulator.
///
/// `LevelExhausted` is the interesting one: it is raised when a degree-2
/// ciphertext at level 0 has to be rescaled to feed a multiplication, which
/// is exactly the condition under which a real leveled runtime falls over.
/// Circuit runners catch it and turn it into a reported outcome; everything
/// else indicates caller error and propagates.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// Parameters outside the supported envelope, or malformed circuit
    /// configuration.
    InvalidParams(String),
    /// Slot-count disagreement between operands, or an out-of-range
    /// rotation amount.
    ShapeMismatch { expected: usize, got: usize },
    /// A value presented for encryption lies outside the clip bound.
    RangeViolation { slot: usize, value: f64, bound: f64 },
    /// A rescale was required but no levels remain.
    LevelExhausted,
    /// A ciphertext handle was released twice.
    DoubleRelease { id: u64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            SimError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            SimError::RangeViolation { slot, value, bound } => {
                write!(
                    f,
                    "plaintext value {value} at slot {slot} exceeds clip bound {bound}"
                )
            }
            SimError::LevelExhausted => write!(f, "level budget exhausted: rescale required at level 0"),
            SimError::DoubleRelease { id } => write!(f, "ciphertext {id} released twice"),
        }
    }
}

impl Error for SimError {}
