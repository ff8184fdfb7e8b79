use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("communication function violation: {0}")]
    Comm(String),

    #[error("term is open: free variable `{0}`")]
    OpenTerm(String),

    #[error("operation not defined on this fragment: {0}")]
    Fragment(String),

    #[error("unguarded recursion: {0}")]
    Unguarded(String),

    #[error("{what} cap of {limit} exceeded")]
    CapExceeded { what: &'static str, limit: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("nondeterministic choice between {0} steps")]
    Nondeterminism(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line, col, msg: msg.into() }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
