use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature grid cannot meet its accuracy contract.
    #[error("resolution error: {message} (achieved relative error {achieved:.3e}, required {required:.3e})")]
    Resolution {
        message: String,
        achieved: f64,
        required: f64,
    },

    #[error("assembly error: {0}")]
    Assembly(String),

    /// The stability hypotheses (eta > 0, d0 > 0) are not met.
    #[error("hypothesis error: {0}")]
    Hypothesis(String),

    /// Singular systems, non-convergent iterations, refusals of ill-posed fits.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    /// An error raised inside a named pipeline stage.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn assembly(msg: impl Into<String>) -> Self {
        Error::Assembly(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
