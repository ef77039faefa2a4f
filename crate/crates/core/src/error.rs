use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants split into two families: invalid inputs (domain, layout and
/// encoding problems) and numerical failures (subspace tracking, quadrature,
/// gauge alignment). [`HoloError::is_numerical`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HoloError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("layout/controls mismatch: {0}")]
    Layout(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("encoding does not match the holonomy subspace: {0}")]
    Encoding(String),

    #[error("operator is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("loop is not closed (endpoint mismatch {0:e})")]
    OpenLoop(f64),

    #[error("no eigenvalue within {tol:e} of energy {energy}")]
    NoSubspace { energy: f64, tol: f64 },

    #[error("degenerate subspace dimension changed from {expected} to {found} at sample {sample}")]
    DimensionChange {
        expected: usize,
        found: usize,
        sample: usize,
    },

    #[error("gauge alignment failed: smallest overlap singular value {0:e}")]
    GaugeAlignment(f64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

impl HoloError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            HoloError::NonHermitian(_)
                | HoloError::NoSubspace { .. }
                | HoloError::DimensionChange { .. }
                | HoloError::GaugeAlignment(_)
                | HoloError::Quadrature(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, HoloError>;
