use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("quadrature did not converge: worst subinterval [{a}, {b}] with error estimate {err:e}")]
    Quadrature { a: f64, b: f64, err: f64 },

    #[error("integrator step size collapsed at x = {reached} (target {target})")]
    StepCollapse { reached: f64, target: f64 },

    #[error("integrator exceeded {steps} steps at x = {reached}")]
    TooManySteps { steps: usize, reached: f64 },

    #[error("right-hand side incompatible with leading order {leading}: Taylor coefficient a^{index} = {value:e} must vanish")]
    IndicialMismatch { leading: usize, index: usize, value: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("evaluation outside the self-similar domain: r = {r}, t = {t} (a = {a} > {limit})")]
    OutsideCone { t: f64, r: f64, a: f64, limit: f64 },

    #[error("profile not concentrated: no pi/2 crossing on the grid")]
    NoCrossing,

    #[error("degenerate Weyl solution at xi = {xi}: |W(psi+, conj psi+)| = {wronskian:e}")]
    BadWeylSolution { xi: f64, wronskian: f64 },

    #[error("function does not decay: |f| at the last grid point is {tail:e} of its maximum")]
    NonDecaying { tail: f64 },

    #[error("tail beyond tau_max = {tau_max} estimated at {estimate:e} > {tolerance:e}; raise tau_max or the decay order")]
    TailTooLarge { tau_max: f64, estimate: f64, tolerance: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Contract(_) => "contract",
            Error::Quadrature { .. } => "quadrature",
            Error::StepCollapse { .. } => "step_collapse",
            Error::TooManySteps { .. } => "too_many_steps",
            Error::IndicialMismatch { .. } => "indicial_mismatch",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::OutsideCone { .. } => "outside_cone",
            Error::NoCrossing => "no_crossing",
            Error::BadWeylSolution { .. } => "bad_weyl_solution",
            Error::NonDecaying { .. } => "non_decaying",
            Error::TailTooLarge { .. } => "tail_too_large",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
