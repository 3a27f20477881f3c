use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical input outside its allowed range.
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Baselines given in the wrong order.
    #[error("baselines out of order: second length {second} km precedes first length {first} km")]
    Ordering { first: f64, second: f64 },

    /// A Monte Carlo orientation kept no runs, so its conditionals are undefined.
    #[error("no untriggered runs retained in orientation {orientation}")]
    Estimation { orientation: &'static str },

    /// Invalid scan grid or sweep specification.
    #[error("invalid {what}: {reason}")]
    InvalidGrid { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
