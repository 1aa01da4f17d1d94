use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl From<hqnet::Error> for CliError {
    fn from(e: hqnet::Error) -> Self {
        use hqnet::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(m) => CliError::Config(m),
            E::Data(m) => CliError::Data(m),
            E::Format(_) | E::Label { .. } | E::Io { .. } => CliError::Data(msg),
            E::NonFinite(_) | E::Degenerate(_) => CliError::Numeric(msg),
            E::Shape(_) | E::Index { .. } | E::InvalidGate(_) => CliError::Other(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
