use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its physical domain.
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: String,
        value: f64,
        expected: &'static str,
    },

    /// The input is well formed but the requested quantity is undefined for it
    /// (no heralds, vacuum input, zero singles, ...).
    #[error("{0}")]
    Degenerate(String),

    /// A truncated Fock-space distribution lost more mass than the tolerance allows.
    #[error("truncation at n_max = {n_max} discards {lost:e} of probability mass (tolerance {tolerance:e})")]
    Truncation {
        n_max: usize,
        lost: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn out_of_range(name: impl Into<String>, value: f64, expected: &'static str) -> Self {
        Error::OutOfRange {
            name: name.into(),
            value,
            expected,
        }
    }

    /// Prefixes the offending field name, so nested validation reports `memory.eta_echo`
    /// rather than `eta_echo`.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::OutOfRange {
                name,
                value,
                expected,
            } => Error::OutOfRange {
                name: format!("{prefix}.{name}"),
                value,
                expected,
            },
            other => other,
        }
    }
}

pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::out_of_range(name, value, "expected a probability in [0, 1]"))
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::out_of_range(name, value, "expected a finite value > 0"))
    }
}

pub(crate) fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::out_of_range(name, value, "expected a finite value >= 0"))
    }
}
