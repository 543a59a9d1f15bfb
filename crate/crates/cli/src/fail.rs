use std::fmt;
use std::io::ErrorKind;

/// Error categories and their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Runtime,
    MissingFile,
    HashMismatch,
    InvalidFlag,
    Format,
    InvalidInput,
}

impl Kind {
    pub fn code(self) -> i32 {
        match self {
            Kind::Runtime => 1,
            Kind::MissingFile => 2,
            Kind::HashMismatch => 3,
            Kind::InvalidFlag => 4,
            Kind::Format => 5,
            Kind::InvalidInput => 6,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Kind::Runtime => "runtime",
            Kind::MissingFile => "missing-file",
            Kind::HashMismatch => "hash-mismatch",
            Kind::InvalidFlag => "invalid-flag",
            Kind::Format => "format",
            Kind::InvalidInput => "invalid-input",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn flag(message: impl Into<String>) -> Self {
        Self::new(Kind::InvalidFlag, message)
    }
}

impl fmt::Display for CliError {
    /// Single line: `error[<tag>]: <message>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{}]: {}", self.kind.tag(), flat)
    }
}

impl From<comix::Error> for CliError {
    fn from(e: comix::Error) -> Self {
        use comix::Error as E;
        let kind = match &e {
            E::Io(io) if io.kind() == ErrorKind::NotFound => Kind::MissingFile,
            E::HashMismatch { .. } => Kind::HashMismatch,
            E::InvalidArgument(_) => Kind::InvalidFlag,
            E::Format(_) | E::Version(_) => Kind::Format,
            E::DimensionMismatch { .. } | E::LabelOutOfRange { .. } | E::Empty(_) => Kind::InvalidInput,
            _ => Kind::Runtime,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        comix::Error::Io(e).into()
    }
}

pub type CliResult<T> = Result<T, CliError>;
