use std::fmt;

use topic_embedding::Error;

/// Failure of a command, grouped by what the user has to fix.
#[derive(Debug)]
pub enum CliError {
    /// Malformed command line.
    Usage(String),
    /// Every invalid setting, reported together.
    Config(Vec<String>),
    Core(Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(e) => match e {
                Error::Parse { .. } | Error::Empty(_) => "input",
                Error::Io { .. } => "io",
                Error::InvalidConfig(_) => "config",
                Error::ModelFormat(_) => "model",
                Error::Shape(_) => "shape",
                Error::Domain(_) | Error::NotPositiveDefinite { .. } | Error::Sampling(_) => "numeric",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "usage" => 2,
            "config" => 3,
            "input" | "io" => 4,
            "model" | "shape" => 5,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: ", self.category())?;
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Config(errors) | CliError::Core(Error::InvalidConfig(errors)) => {
                write!(f, "{} invalid setting(s)", errors.len())?;
                for e in errors {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub fn io_error(path: &std::path::Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
