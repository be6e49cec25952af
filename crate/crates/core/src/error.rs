use thiserror::Error;

/// Error type shared by every module in this crate.
///
/// Variants are grouped by what went wrong rather than where: callers decide
/// severity (the CLI maps configuration-shaped errors to exit code 2 and
/// numeric/training failures to exit code 3).
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter value is outside its documented range or two parameters
    /// are inconsistent with each other.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Matrix / dataset dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Dataset contents violate an invariant (label out of range, empty
    /// sample set, ...).
    #[error("bad data: {0}")]
    Data(String),

    /// A binary file did not parse; `field` names the offending header field
    /// or region.
    #[error("malformed {field}: {message}")]
    Format { field: String, message: String },

    /// A forward/backward pass produced a non-finite value in `layer`.
    #[error("non-finite value in layer {layer}: {message}")]
    Numeric { layer: usize, message: String },

    /// Training diverged; `epoch` is the epoch during which it happened.
    #[error("training failed at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    /// A mathematical precondition does not hold (zero noise variance,
    /// non-positive slope, distribution support mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A joint distribution was declared to factorize as a Markov chain but
    /// does not.
    #[error("not a Markov chain: {0}")]
    NotMarkovChain(String),

    /// An estimator could not produce a usable value from the samples given.
    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that indicate a bad request rather than a failed
    /// computation. The CLI uses this to pick its exit code.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Shape(_)
                | Error::Data(_)
                | Error::Format { .. }
                | Error::Domain(_)
                | Error::NotMarkovChain(_)
                | Error::Io(_)
        )
    }
}
