//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Variants carry
//! enough context to name the violated precondition or the site of the
//! numerical failure; messages are meant to be actionable without a debugger.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// All error conditions produced by this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix (or a sheared family member) fails the hyperbolicity
    /// requirement `trace > 2`.
    #[error("trace {trace} of {context} is not > 2{hint}")]
    TraceTooSmall {
        /// Offending trace value.
        trace: f64,
        /// What was being constructed or evaluated.
        context: String,
        /// Optional remedial hint (e.g. negate an integer matrix).
        hint: String,
    },

    /// A computation produced a NaN or an infinity.
    #[error("non-finite value in {context}")]
    NonFinite {
        /// Where the non-finite value appeared.
        context: String,
    },

    /// A parameter lies outside its admissible domain. The message names the
    /// violated inequality with the offending values substituted in.
    #[error("parameter out of domain: {violated}")]
    ParamDomain {
        /// Human-readable statement of the violated inequality.
        violated: String,
    },

    /// Adaptive integration failed (step size underflow or step budget
    /// exhausted before reaching the requested accuracy).
    #[error("integration failure at t = {t}: {detail}")]
    IntegrationFailure {
        /// Integration time at which the failure occurred.
        t: f64,
        /// What went wrong.
        detail: String,
    },

    /// Two regions that are required to be disjoint (or nested) overlap.
    #[error("region overlap: {detail}")]
    RegionOverlap {
        /// Which regions, and by how much.
        detail: String,
    },

    /// A map could not be inverted at the given point.
    #[error("not invertible at ({x}, {y}): {detail}")]
    NotInvertibleAt {
        /// x-coordinate of the point.
        x: f64,
        /// y-coordinate of the point.
        y: f64,
        /// Why inversion failed.
        detail: String,
    },

    /// An iterative scheme did not converge within its iteration budget.
    #[error("no convergence in {context}: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        /// Which scheme.
        context: String,
        /// Last residual / defect observed.
        residual: f64,
        /// Iterations performed.
        iterations: usize,
    },

    /// An enumeration produced more candidates than its hard cap.
    #[error("too many points in {context}: {count} > cap {cap}")]
    TooManyPoints {
        /// Which enumeration.
        context: String,
        /// Number of candidates produced.
        count: usize,
        /// The cap that was exceeded.
        cap: usize,
    },

    /// Continuation along a deformation path lost a periodic orbit.
    #[error("continuation lost an orbit at step {step}: {detail}")]
    ContinuationLoss {
        /// Deformation step at which the orbit was lost.
        step: usize,
        /// Diagnostic detail (residual, collision distance, ...).
        detail: String,
    },

    /// A periodic-point set has the wrong cardinality.
    #[error("incomplete periodic set for period {period}: found {found}, expected {expected}")]
    IncompleteSet {
        /// Period whose point set is incomplete.
        period: usize,
        /// Points actually found.
        found: usize,
        /// Points required.
        expected: usize,
    },

    /// A transition matrix is reducible where irreducibility is required.
    #[error("transition matrix reducible: {detail}")]
    Reducible {
        /// Which states fail to communicate.
        detail: String,
    },

    /// An exact-arithmetic construction exceeded its complexity budget.
    #[error("budget exceeded in {context}: {used} > {budget}")]
    BudgetExceeded {
        /// Which construction.
        context: String,
        /// Units consumed (vertices, segments, ...).
        used: usize,
        /// The configured budget.
        budget: usize,
    },

    /// A candidate partition fails the closure (boundary-invariance) checks.
    #[error("partition not closed: {detail}")]
    PartitionNotClosed {
        /// Which structural check failed.
        detail: String,
    },

    /// A face or cell of a subdivision degenerated (empty interior,
    /// zero area, or a non-disk face where disks are required).
    #[error("degenerate cell: {detail}")]
    DegenerateCell {
        /// Description of the degeneracy.
        detail: String,
    },
}

impl Error {
    /// Convenience constructor for [`Error::ParamDomain`].
    pub fn domain(violated: impl Into<String>) -> Self {
        Error::ParamDomain { violated: violated.into() }
    }

    /// Convenience constructor for [`Error::NonFinite`].
    pub fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite { context: context.into() }
    }
}

/// Returns `value` unchanged if it is finite, otherwise a
/// [`Error::NonFinite`] naming `context`.
pub fn ensure_finite(value: f64, context: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::non_finite(context))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_name_the_violation() {
        let e = Error::domain("beta = 1.5 must satisfy 0 < beta < 1");
        assert!(e.to_string().contains("beta = 1.5"));

        let e = Error::TraceTooSmall {
            trace: -3.0,
            context: "matrix [[-2, -1], [-1, -1]]".into(),
            hint: "; negate the matrix to make the trace positive".into(),
        };
        let msg = e.to_string();
        assert!(msg.contains("-3"));
        assert!(msg.contains("negate"));
    }

    #[test]
    fn ensure_finite_accepts_and_rejects() {
        assert!(ensure_finite(1.0, "x").is_ok());
        assert!(ensure_finite(f64::NAN, "x").is_err());
        assert!(ensure_finite(f64::INFINITY, "x").is_err());
    }
}
