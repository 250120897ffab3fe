use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for {nvars} variables")]
    AxisOutOfRange { axis: usize, nvars: usize },

    #[error("tensor type mismatch: expected ({expected_contra},{expected_co}), found ({found_contra},{found_co})")]
    TensorType {
        expected_contra: usize,
        expected_co: usize,
        found_contra: usize,
        found_co: usize,
    },

    /// A structural invariant does not hold. `label` names the failed condition.
    #[error("{label}: {detail}")]
    Invariant { label: String, detail: String },

    /// A defining equation of a symmetry flavor is violated by the input field.
    #[error("{equation} violated at {indices}")]
    EquationViolated { equation: String, indices: String },

    #[error("matrix is singular")]
    Singular,

    #[error("{0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invariant(label: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Invariant {
            label: label.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn violated(equation: impl Into<String>, indices: impl Into<String>) -> Self {
        Error::EquationViolated {
            equation: equation.into(),
            indices: indices.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
