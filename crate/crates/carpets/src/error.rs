//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong constructing carpets, measures, or running
/// the counting kernels. The `Display` form starts with a stable error name
/// so callers (and the CLI) can surface which contract was violated.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Grid parameters violate `2 <= m < n`.
    #[error("GridError: {0}")]
    Grid(String),
    /// Digit set empty, out of grid bounds, or not pairwise distinct.
    #[error("DigitError: {0}")]
    Digit(String),
    /// Probability weights have the wrong length, a non-positive entry, or
    /// a sum too far from 1.
    #[error("WeightError: {0}")]
    Weight(String),
    /// An enumeration or counting kernel would exceed its configured cap
    /// (or the range of exact integer arithmetic).
    #[error("CapExceeded: {0}")]
    CapExceeded(String),
    /// Argument outside the operation's domain.
    #[error("DomainError: {0}")]
    Domain(String),
    /// A word or depth parameter is too short for the requested resolution.
    #[error("DepthError: {0}")]
    Depth(String),
    /// Frequency floors are all zero; the subsystem at this `k` is empty.
    #[error("DegenerateError: {0}")]
    Degenerate(String),
    /// `log m / log n` is rational, so the projection theorem does not apply.
    #[error("RationalRatioError: {0}")]
    RationalRatio(String),
    /// Projection onto a principal coordinate axis is excluded.
    #[error("PrincipalAxisError: projection onto a principal coordinate axis is excluded")]
    PrincipalAxis,
    /// Malformed spec file.
    #[error("ParseError: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
