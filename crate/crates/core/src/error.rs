use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QwalkError {
    /// A position, basis label or packed index lies outside the lattice.
    #[error("out of bounds: {0}")]
    Bounds(String),

    /// An input failed validation (non-unit coin, non-unitary factor, bad parameter).
    #[error("invalid input: {0}")]
    Validation(String),

    /// The state has zero norm and cannot be renormalized.
    #[error("degenerate state: norm is zero")]
    DegenerateState,

    /// A dense matrix would exceed the dimension cap.
    #[error("matrix dimension {dim} exceeds cap {cap}")]
    Size { dim: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, QwalkError>;
