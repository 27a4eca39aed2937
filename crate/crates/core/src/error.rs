use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("column `{0}` is constant and cannot be standardized")]
    DegenerateColumn(String),

    #[error("design matrix is rank deficient (normal equations are singular)")]
    RankDeficient,

    #[error("need at least as many observations as coefficients (n = {n}, p = {p})")]
    TooFewObservations { n: usize, p: usize },

    #[error("malformed data: {0}")]
    MalformedData(String),

    #[error("posterior variance undefined: {0}")]
    UndefinedVariance(String),

    #[error("improper posterior: {0}")]
    ImproperPosterior(String),

    #[error("integrability failure: {0}")]
    Integrability(String),

    #[error("sampler diverged on {fraction:.1}% of trajectories; last divergent state {state:?}", fraction = .divergent_fraction * 100.0)]
    Divergence { divergent_fraction: f64, state: Vec<f64> },

    #[error("no draws to summarize: {0}")]
    EmptyChains(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
