use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("eigenphase {phase:.3e} lies within {tol:e} of the branch cut at {cut:.6}; shift branch_center")]
    BranchCut { phase: f64, cut: f64, tol: f64 },

    #[error("realification left an imaginary residual of {0:.3e}")]
    Gauge(f64),

    #[error("ambiguous band continuation at grid point (k index {i}, alpha index {j})")]
    Continuity { i: usize, j: usize },

    #[error("bands of gap {gap} are degenerate along a line ({points} grid points); no isolated nodes")]
    DegenerateLine { gap: usize, points: usize },

    #[error("exact degeneracy of gap {gap} at grid point ({i}, {j}); regrid with grid.k_shift = {suggested_offset:.3}")]
    Regrid { gap: usize, i: usize, j: usize, suggested_offset: f64 },

    #[error("under-resolved loop: overlap {overlap:.3e} at step {step}; use a finer grid")]
    UnderResolved { step: usize, overlap: f64 },

    #[error("invalid patch: {0}")]
    InvalidPatch(String),

    #[error("chi_raw = {chi_raw:.6} is not integer within 1e-2; suggested grid {suggested_n_k}x{suggested_n_alpha}")]
    Resolution { chi_raw: f64, suggested_n_k: usize, suggested_n_alpha: usize },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("not topological: {0}")]
    NotTopological(String),

    #[error("truncation: tail mass {tail:.3e} at l_max exceeds {threshold:.1e}")]
    Truncation { tail: f64, threshold: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
            Error::InvalidPatch(_) => 3,
            Error::NotTopological(_) | Error::Truncation { .. } => 4,
            _ => 2,
        }
    }
}
