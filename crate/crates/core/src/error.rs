use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("orbit hits the partition boundary at step {0}")]
    BoundaryHit(usize),

    #[error("cell budget of {0} exceeded")]
    CellBudgetExceeded(usize),

    #[error("element budget of {0} exceeded")]
    ElementBudgetExceeded(usize),

    #[error("word budget of {0} exceeded")]
    WordBudgetExceeded(usize),

    #[error("tower not built far enough: no transition from element {element} on branch {branch}")]
    Unsaturated { element: usize, branch: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("precondition unverified: {reason}")]
    PreconditionUnverified {
        reason: String,
        witness: Vec<(String, String)>,
    },

    #[error("map is not Markov: {0}")]
    NotMarkov(String),

    #[error("no unique stationary density: {0}")]
    NoStationaryDensity(String),

    #[error("measure gives zero mass to the base")]
    ZeroBaseMass,

    #[error("operation requires affine branches")]
    NonAffine,

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Budget exhaustion, which callers report as inconclusive rather than failed.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::CellBudgetExceeded(_)
                | Error::ElementBudgetExceeded(_)
                | Error::WordBudgetExceeded(_)
        )
    }
}
