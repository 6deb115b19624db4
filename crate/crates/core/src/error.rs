use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid Dyck word: {0}")]
    InvalidDyck(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("n = {n} exceeds the exhaustive enumeration bound of {max}")]
    TooLarge { n: u64, max: u64 },

    #[error("no tree with {n} edges exists under offspring law {law}")]
    Infeasible { n: u64, law: String },

    #[error("series arithmetic: {0}")]
    Series(String),

    #[error("root is not bracketed on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
