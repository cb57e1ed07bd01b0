//! Error types shared by the whole crate.

use num_complex::Complex64;
use thiserror::Error;

/// Which of the three regularity conditions failed, with the offending data.
///
/// The conditions are: (a) the symbol value is invertible off the jumps,
/// (b) both one-sided limits at each jump are invertible, (c) each jump ratio
/// admits a logarithm whose eigenvalue real parts lie in `(-1/2, 1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegularityFailure {
    /// `det φ(t)` vanishes (or is numerically negligible) at an interior point.
    ValueSingular { theta: f64 },
    /// A one-sided limit at a jump is a singular matrix.
    LimitSingular { theta: f64 },
    /// An eigenvalue of the jump ratio lies on (or within `1e-10` of) the
    /// branch cut `(-∞, 0]`, so no admissible logarithm exists. A true
    /// boundary case (`|Re β| = 1/2`) lands here and is diagnosed, never
    /// silently perturbed.
    LogBranch {
        theta: f64,
        eigenvalue: Complex64,
        /// Distance of the eigenvalue from the cut; `<= 1e-10` means the
        /// hypotheses of the asymptotic theorem are violated exactly at the
        /// boundary of its range of validity.
        distance: f64,
    },
}

impl RegularityFailure {
    /// Condition label: `'a'`, `'b'` or `'c'`.
    pub fn condition(&self) -> char {
        match self {
            RegularityFailure::ValueSingular { .. } => 'a',
            RegularityFailure::LimitSingular { .. } => 'b',
            RegularityFailure::LogBranch { .. } => 'c',
        }
    }

    /// True when a ratio eigenvalue sits within the `1e-10` band around the
    /// branch cut, i.e. the boundary case excluded by the theorem.
    pub fn is_boundary_case(&self) -> bool {
        matches!(self, RegularityFailure::LogBranch { distance, .. } if *distance <= 1e-10)
    }
}

impl core::fmt::Display for RegularityFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RegularityFailure::ValueSingular { theta } => {
                write!(f, "condition (a): singular value at theta = {theta}")
            }
            RegularityFailure::LimitSingular { theta } => {
                write!(f, "condition (b): singular one-sided limit at theta = {theta}")
            }
            RegularityFailure::LogBranch { theta, eigenvalue, distance } => write!(
                f,
                "condition (c): jump ratio eigenvalue {eigenvalue} at theta = {theta} lies \
                 within {distance:.3e} of the branch cut (-inf, 0]"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("block size mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("evaluation at jump point theta = {theta}; use eval_sided")]
    JumpPointEvaluation { theta: f64 },
    #[error("singular matrix value encountered at theta = {theta}")]
    SingularValue { theta: f64 },
    #[error("symbol is not I-regular: {0}")]
    NotIRegular(RegularityFailure),
    #[error("matrix function evaluation failed: {0}")]
    BranchFailure(&'static str),
    #[error("quadrature failed to converge for coefficient k = {worst_k} (residual {residual:.3e})")]
    QuadratureNonConvergence { worst_k: i64, residual: f64 },
    #[error("continuous branch tracking failed near theta = {theta} (refinement cap hit)")]
    UnwindFailure { theta: f64 },
    #[error("winding number residual {residual:.3e} exceeds 1e-6")]
    NonIntegerWinding { residual: f64 },
    #[error("independent routes disagree: {context} ({left} vs {right})")]
    RouteMismatch { context: &'static str, left: Complex64, right: Complex64 },
    #[error("factorization left a residual jump at theta = {theta} (size {size:.3e})")]
    ResidualJump { theta: f64, size: f64 },
    #[error("similarity check failed at jump {index} (residual {residual:.3e})")]
    SimilarityMismatch { index: usize, residual: f64 },
    #[error("Barnes G pole: 1 + z is a nonpositive integer (z = {z})")]
    PoleOfBarnes { z: Complex64 },
    #[error("finite section of size {size} is numerically singular")]
    SectionSingular { size: usize },
    #[error("Fredholm index is {index}, asymptotic verification requires 0")]
    IndexNonzero { index: i64 },
    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
