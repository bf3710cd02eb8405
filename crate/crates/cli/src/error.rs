use std::fmt;

/// Process exit statuses.
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_MODEL: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Parse(String),
    Model(copomo::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Model(_) => EXIT_MODEL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Model(e) => write!(f, "model error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Classifies library errors: domain failures keep their own status, invalid
/// inputs coming from a config are config errors.
impl From<copomo::Error> for CliError {
    fn from(e: copomo::Error) -> Self {
        match e {
            copomo::Error::Parse { .. } => CliError::Parse(e.to_string()),
            copomo::Error::InvalidInput(m) => CliError::Config(m),
            other => CliError::Model(other),
        }
    }
}

/// Invalid trace contents are reported as parse errors.
pub fn trace_error(e: copomo::Error) -> CliError {
    match e {
        copomo::Error::InvalidInput(m) => CliError::Parse(m),
        other => other.into(),
    }
}

pub type CliResult<T> = Result<T, CliError>;
