use alloc::string::String;
use core::fmt;

use crate::scalar::C64;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An index, size or option is outside the accepted range.
    Argument(String),
    /// Parameters violate a type invariant (a_j <= 0, |alpha_j| >= 1, bad weights, ...).
    InvalidParams(String),
    /// Evaluation point sits on a pole; carries the offending singular point.
    Pole { at: C64 },
    /// Two eigenvalues closer than the allowed separation.
    DegenerateSpectrum { gap: f64 },
    /// The inverse spectral map lost positivity or left the disk.
    IllConditioned(String),
    /// An iterative solver failed to converge.
    NoConvergence(String),
    /// A derived quantity disagrees with its defining property (e.g. complex weight).
    Consistency(String),
    /// Non-finite values appeared.
    Numeric(String),
    /// A flow left the admissible region at the given time.
    BlowUp { time: f64, reason: String },
    /// A matrix that must be inverted is singular.
    Singular(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(m) => write!(f, "argument error: {m}"),
            Error::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            Error::Pole { at } => write!(f, "pole at {} + {}i", at.re, at.im),
            Error::DegenerateSpectrum { gap } => write!(f, "degenerate spectrum (gap {gap:e})"),
            Error::IllConditioned(m) => write!(f, "ill-conditioned measure: {m}"),
            Error::NoConvergence(m) => write!(f, "no convergence: {m}"),
            Error::Consistency(m) => write!(f, "consistency error: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::BlowUp { time, reason } => write!(f, "blow-up at t = {time}: {reason}"),
            Error::Singular(m) => write!(f, "singular matrix: {m}"),
        }
    }
}

impl core::error::Error for Error {}
