use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),
    #[error("could not parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("unknown preset '{0}' (see list-presets)")]
    UnknownPreset(String),
    #[error(transparent)]
    Core(#[from] qzd_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("could not serialize summary: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<qzd_core::zeno::RunFailure> for CliError {
    fn from(f: qzd_core::zeno::RunFailure) -> Self {
        CliError::Core(f.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
