use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown subsystem label: {0}")]
    UnknownLabel(String),
    #[error("non-finite entry")]
    NonFinite,
    #[error("vector not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("matrix not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("invalid correlation table: {0}")]
    InvalidTable(String),
    #[error("value out of range for {field}: {message}")]
    OutOfRange { field: String, message: String },
    #[error("full-rank assumption violated: Bob's local state has eigenvalue {min_eigenvalue:e}")]
    RankDeficient { min_eigenvalue: f64 },
    #[error("self-test premise unmet: W = {witness} < 1 - {tol:e}")]
    PremiseUnmet { witness: f64, tol: f64 },
    #[error("source {source_index} term {term} has Schmidt rank below 2; extraction undefined")]
    SchmidtRankDeficient { source_index: usize, term: usize },
    #[error("Bob's local supports of source {source_index} are not orthogonal (overlap {overlap:e})")]
    NonOrthogonalSupports { source_index: usize, overlap: f64 },
    #[error("Eve strategy is not consistent with the observed table (max deviation {deviation:e})")]
    ConsistencyFailure { deviation: f64 },
    #[error("no constrained strategy reproduces the target table (residual weight {residual:e})")]
    Infeasible { residual: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("config line {line}: field `{field}`: {message}")]
    Config { line: usize, field: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidConfig(_) | Error::Io(_) => 2,
            Error::RankDeficient { .. }
            | Error::PremiseUnmet { .. }
            | Error::SchmidtRankDeficient { .. }
            | Error::NonOrthogonalSupports { .. }
            | Error::Infeasible { .. } => 3,
            Error::OutOfRange { .. } => 2,
            _ => 4,
        }
    }
}
