//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the library.
///
/// Numeric routines distinguish invalid inputs ([`Error::Domain`]) from
/// breakdowns of the computation itself (non-convergent integrals, missing
/// sign changes, degenerate regimes). The CLI maps the former to exit code 2
/// and the latter to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The integral of `e^{-V}` (or a moment of it) does not converge.
    #[error("integral does not converge: {0}")]
    NonIntegrable(String),

    /// An argument is outside the documented domain of the operation.
    #[error("invalid input: {0}")]
    Domain(String),

    /// A conditional regime carries (numerically) zero mass.
    #[error("degenerate regime at threshold {threshold}: side mass {mass:e}")]
    DegenerateRegime { threshold: f64, mass: f64 },

    /// The log-concavity probe found a convexity violation of `V`.
    #[error("density fails the log-concavity probe (worst second difference {worst:e})")]
    NotLogConcave { worst: f64 },

    /// Bracket expansion found no sign change for a root.
    #[error("bracketing failed: {0}")]
    BracketFailure(String),

    /// A polygon is empty, non-convex, or has zero area.
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    /// A vertical cut leaves one side of a polygon with zero area.
    #[error("degenerate cut at t = {0}: one side has zero area")]
    DegenerateCut(String),

    /// The Jacobi eigensolver did not reach its tolerance within the sweep cap.
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off:e})")]
    EigenFailure { sweeps: usize, off: f64 },
}
