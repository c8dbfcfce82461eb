use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at `{path}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Parse {
        path: String,
        message: String,
        line: Option<usize>,
    },
    #[error("invalid config at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("{stage}: {source}")]
    Numerical {
        stage: String,
        #[source]
        source: fpmr_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: 1 for config and file problems, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }
}

/// Annotates kernel errors with the experiment stage that raised them.
pub(crate) trait Stage<T> {
    fn stage(self, stage: &str) -> Result<T, Error>;
}

impl<T> Stage<T> for Result<T, fpmr_core::Error> {
    fn stage(self, stage: &str) -> Result<T, Error> {
        self.map_err(|source| Error::Numerical {
            stage: stage.to_string(),
            source,
        })
    }
}
