//! CLI error classification onto the stable exit-code contract.

use std::fmt;

/// 1 = usage/config, 2 = data, 3 = numerical.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Default classification for library errors: numerical failures keep
/// their class, I/O and format problems are data errors, the rest are
/// configuration mistakes. Call sites with better context construct the
/// class directly.
impl From<bicilab::Error> for CliError {
    fn from(e: bicilab::Error) -> CliError {
        use bicilab::Error as E;
        match &e {
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::Io(_) | E::Wav(_) | E::Parse { .. } | E::NonFiniteSample { .. } => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}
