use std::fmt;
use std::io;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparseable or inconsistent configuration.
    Config(String),
    /// A library operation failed on valid-looking input.
    Numerical(vnag_core::Error),
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<vnag_core::Error> for CliError {
    fn from(e: vnag_core::Error) -> Self {
        use vnag_core::Error as E;
        match e {
            E::DimensionMismatch { .. }
            | E::InvalidParameter(_)
            | E::SingularTime(_)
            | E::Unsupported(_)
            | E::NotAdmissible(_) => CliError::Config(e.to_string()),
            E::NonFinite(_) | E::Grid(_) | E::Degenerate(_) | E::TangentialZero(_) => {
                CliError::Numerical(e)
            }
        }
    }
}
