use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry {geometry}, stage {stage}: {source}")]
    Numerical {
        geometry: String,
        stage: &'static str,
        #[source]
        source: more_adapt::Error,
    },

    #[error("writing {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ScanError {
    /// Process exit status: 2 for configuration problems, 3 for failed
    /// calculations, 1 when output cannot be written.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScanError::Config(_) => 2,
            ScanError::Numerical { .. } => 3,
            ScanError::Output { .. } => 1,
        }
    }
}
