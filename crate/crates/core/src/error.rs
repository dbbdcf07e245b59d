//! Error taxonomy for the library.
//!
//! The variants mirror how failures must surface at the process boundary:
//! input/validation problems (a level function violating the domain
//! hypotheses, indices out of range, unsupported configurations) are
//! recoverable caller errors, while integration failures — in particular the
//! norm-overflow abort that an ill-posed integration direction is *expected*
//! to produce on unfiltered data — are numerical outcomes that carry their
//! diagnostic payload (the log-time τ of the blow-up).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A level function failed the domain hypotheses; the named violation is
    /// the first failing check.
    #[error("level-function validation failed: {0}")]
    Validation(String),

    /// Evaluation at a point outside an operation's domain (the origin, a
    /// critical point of ψ, a query outside the constructed shell, …).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input (mismatched bases, out-of-range mode
    /// index, empty history, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration that is declared unsupported rather than wrong (e.g. a
    /// nonradial level function in dimension 3).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The adaptive integrator could not continue (step-size underflow or a
    /// non-finite state that was not a clean overflow).
    #[error("integration failure at t = {t}: {reason}")]
    Integration { reason: String, t: f64 },

    /// The state norm crossed the overflow guard while integrating — the
    /// designed detection of the ill-posed direction. `tau` is the log-time
    /// at which the guard tripped.
    #[error("overflow abort at tau = {tau:.6}: state norm {norm:.3e} exceeded guard {limit:.1e}")]
    OverflowAbort { tau: f64, norm: f64, limit: f64 },

    /// A propagated frame lost numerical rank during re-orthonormalization:
    /// a post-QR diagonal entry fell below 10⁻¹² of the leading one.
    #[error("frame rank collapse at tau = {tau:.6}: column {column} has scale {scale:.3e}")]
    RankCollapse { tau: f64, column: usize, scale: f64 },
}

impl Error {
    /// True for the overflow-abort outcome (process exit code 3 territory).
    pub fn is_overflow(&self) -> bool {
        matches!(self, Error::OverflowAbort { .. })
    }
}
