use thiserror::Error;

/// Which oracle a budget or scoping error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    G,
    H,
    Decaps,
    Decrypt,
    Fco,
}

impl std::fmt::Display for OracleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OracleKind::G => "G",
            OracleKind::H => "H",
            OracleKind::Decaps => "decapsulation",
            OracleKind::Decrypt => "decryption",
            OracleKind::Fco => "failure-checking",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the declared space of an oracle or scheme.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{oracle} query budget of {limit} exceeded")]
    BudgetExceeded { oracle: OracleKind, limit: u64 },

    /// The challenge ciphertext was submitted to a challenge-excluding oracle.
    #[error("forbidden query: the challenge ciphertext cannot be submitted")]
    ForbiddenQuery,

    #[error("oracle violation: {0}")]
    OracleViolation(String),

    /// Exhaustive enumeration refused because the space is too large.
    #[error("enumeration refused: {pairs} pairs exceeds the limit of {limit}")]
    TooLarge { pairs: u128, limit: u128 },

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("unknown adversary `{name}` for {game}")]
    UnknownAdversary { name: String, game: String },

    /// A reduction stopped the adversary it wraps. Adversaries must propagate
    /// oracle errors unchanged so the wrapper can observe this.
    #[error("adversary halted by a wrapping reduction")]
    Halted,

    #[error("config error: {0}")]
    Config(String),

    #[error("internal invariant failed: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
