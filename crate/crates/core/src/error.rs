use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("market too large for exact enumeration: {students} students (limit {limit})")]
    UnsupportedSize { students: usize, limit: usize },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("schema violation at row {row}: {message}")]
    Schema { row: usize, message: String },
    #[error("lottery collision in session {session} round {round} group {group} (rows {rows:?})")]
    LotteryCollision {
        session: u32,
        round: u32,
        group: u32,
        rows: Vec<usize>,
    },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
