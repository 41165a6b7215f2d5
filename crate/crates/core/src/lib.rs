//! Two-regime least-squares approximation of probability laws.
//!
//! The central object is the split functional
//! `f(t) = E[X; X <= t]^2 / P(X <= t) + E[X; X > t]^2 / P(X > t)`,
//! whose maximizer gives the best approximation of `X` by a two-level step
//! function in mean square. The crate provides:
//!
//! * [`density`]: 1-D laws given by a negative log-density `V` with adaptive
//!   quadrature for normalization, CDFs, partial means, and quantiles, plus
//!   weighted empirical laws.
//! * [`splitcore`]: evaluation of `f`, conditional level computation, a fast
//!   bisection solver for log-concave laws, a grid-plus-refinement global
//!   solver, an exact solver for empirical laws, and threshold sweeps.
//! * [`inequality`]: the convex-potential integral inequality
//!   `e^{-V(0)} * Int y e^{-V(y)} dy <= (Int e^{-V(y)} dy)^2` that drives
//!   monotonicity of the mean residual life, with exact handling of piecewise
//!   linear potentials.
//! * [`multidim`]: elliptical models in dimension d, the halfspace split
//!   functional, the optimal cut direction via the top eigenvector of the
//!   scatter matrix, and seeded Monte Carlo cross-checks.
//! * [`geometry`]: exact rational polygon computations (areas, first moments,
//!   vertical cuts) including a centered hexagon whose best vertical cut is
//!   not through the centroid.
//! * [`verify`]: the end-to-end acceptance checks used by the CLI and the
//!   integration test suite.

pub mod density;
pub mod error;
pub mod geometry;
pub mod inequality;
pub mod linalg;
pub mod multidim;
pub mod quad;
pub mod report;
pub mod roots;
pub mod splitcore;
pub mod verify;

pub use density::{Density1D, EmpiricalDist, FamilySpec, QuadratureConfig, SupportInterval};
pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, Rational};
pub use inequality::{ConvexPotential, LemmaCheck};
pub use multidim::{DirectionResult, EllipticalModel, HalfspaceCut, McEstimate};
pub use splitcore::{SplitMethod, SplitResult, SweepTable};
