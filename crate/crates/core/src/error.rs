use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the toolkit.
///
/// `Refusal` is not a bug: it marks a semi-decidable question (orbit
/// finiteness, Følner search, reachability) that could not be settled inside
/// the given budget.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {reason}{}", witness_suffix(.witness))]
    Precondition {
        reason: String,
        witness: Option<String>,
    },
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("refused: {0}")]
    Refusal(Refusal),
}

fn witness_suffix(w: &Option<String>) -> String {
    match w {
        Some(w) => format!(" (witness: {w})"),
        None => String::new(),
    }
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(reason: impl Into<String>, witness: Option<String>) -> Self {
        Error::Precondition {
            reason: reason.into(),
            witness,
        }
    }

    pub fn refusal(reason: impl Into<String>) -> Self {
        Error::Refusal(Refusal::new(reason))
    }

    /// Refusals and precondition failures are reported with a distinct exit
    /// status by the command line front end.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Refusal(_) | Error::Precondition { .. })
    }
}

/// A budget-bounded search that gave up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Refusal {
    pub reason: String,
    /// Best Følner ratio seen before giving up, when the search was a Følner search.
    pub best_ratio: Option<Rational64>,
    /// Fusion stage that refused, when raised inside a fusion run.
    pub stage: Option<usize>,
}

impl Refusal {
    pub fn new(reason: impl Into<String>) -> Self {
        Refusal {
            reason: reason.into(),
            ..Default::default()
        }
    }
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(stage) = self.stage {
            write!(f, "stage {stage}: ")?;
        }
        write!(f, "{}", self.reason)?;
        if let Some(r) = self.best_ratio {
            write!(f, " (best ratio {r})")?;
        }
        Ok(())
    }
}
