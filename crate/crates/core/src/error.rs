use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("sample vector length {0} is not of the form 2^L + 1")]
    BadSampleCount(usize),

    #[error("paths must start at 0, got {0}")]
    NonzeroStart(f64),

    #[error("delta {0} is not a positive multiple of the grid step")]
    BadDelta(f64),

    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("eta must be positive, got {0}")]
    EtaOutOfRange(f64),

    #[error("basis index must be >= 1")]
    BadBasisIndex,

    #[error("t = {0} is outside [0, 1]")]
    TOutOfRange(f64),

    #[error("level {level} too shallow for basis index {index} (need level >= {need})")]
    LevelTooShallow { index: usize, level: u32, need: u32 },

    #[error("block index {k} out of range (schedule has {blocks} blocks)")]
    BlockOutOfRange { k: usize, blocks: usize },

    #[error("coefficients extend beyond the schedule's last cut ({last_cut})")]
    CoeffsBeyondSchedule { last_cut: usize },

    #[error(
        "tail threshold {threshold:.3e} for block {k} unreachable within j_max = {j_max}; \
         deepen the truncation or reduce the block count"
    )]
    ScheduleExhausted { k: usize, threshold: f64, j_max: usize },

    #[error("truncation window is empty: j_max = {j_max} <= cut n = {n}")]
    EmptyTailWindow { n: usize, j_max: usize },

    #[error("no rho in the grid passed the stability diagnostic")]
    NoStableRho,

    #[error("every probability in the eps grid fell below the Monte Carlo resolution")]
    AllBelowResolution,

    #[error("body is not centrally symmetric: {0}")]
    BadBody(String),

    #[error("solver failed to reach tolerance {tol} within {budget} iterations")]
    SolverBudget { tol: f64, budget: usize },

    #[error("unsupported model: {0}")]
    BadModel(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
