//! Fixed numerical tolerances.
//!
//! These are build-time constants rather than runtime knobs so that every
//! report is reproducible from the seed and configuration alone.

/// Per-entry absolute tolerance for `A == A^†`.
pub const HERMITIAN: f64 = 1e-12;

/// Trace and eigenvalue tolerance for density operators.
pub const DENSITY: f64 = 1e-12;

/// Frobenius tolerance for `U^† U == 1`.
pub const UNITARY: f64 = 1e-10;

/// Effects must have spectrum in `[-EFFECT, 1 + EFFECT]`.
pub const EFFECT: f64 = 1e-12;

/// Frobenius tolerance for `sum_x F(x) == 1` and for Kraus completeness.
pub const NORMALIZATION: f64 = 1e-10;

/// Tolerance for `F^2 == F` and mutual orthogonality of projections.
pub const PROJECTION: f64 = 1e-10;

/// Relative tolerance under which outcome values are merged.
pub const OUTCOME_MERGE: f64 = 1e-9;

/// Probability vectors must sum to one within this.
pub const PROBABILITY_SUM: f64 = 1e-10;

/// Coupling marginals must match within this.
pub const COUPLING_MARGINAL: f64 = 1e-9;

/// Singular values below this are dropped when extracting Kraus operators.
pub const KRAUS_RANK: f64 = 1e-12;

/// Frobenius tolerance for deciding that two operators commute.
pub const COMMUTATOR: f64 = 1e-10;

/// Slack below `-VERDICT` counts as a violated inequality.
pub const VERDICT: f64 = 1e-9;

/// Purity tolerance for the pure-state precondition.
pub const PURITY: f64 = 1e-10;

/// Normalization tolerance for sampled wavefunctions.
pub const GRID_NORM: f64 = 1e-8;

/// Mass allowed near the grid boundary before aliasing is reported.
pub const GRID_ALIASING: f64 = 1e-8;
