use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grids, domains or truncation orders of two operands disagree.
    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("y = {y} lies outside the coefficient domain [{lo}, {hi}]")]
    Domain { y: f64, lo: f64, hi: f64 },

    #[error("point ({x}, {y}) lies above the free surface")]
    AboveSurface { x: f64, y: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// `u >= c` somewhere: the flow has a stagnation point.
    #[error("stagnation at y = {y}: c - u = {margin}")]
    Stagnation { y: f64, margin: f64 },

    #[error("height field loses ellipticity: h_p = {h_p} at (q = {q}, p = {p})")]
    StagnationHeight { q: f64, p: f64, h_p: f64 },

    #[error("density is not positive at p = {p} (rho = {rho})")]
    ProfileRange { p: f64, rho: f64 },

    #[error("coefficient recursion diverged at order {order}")]
    Divergence { order: usize },

    #[error("integration diverged: {0}")]
    IntegrationDivergence(String),

    #[error("no sign change of psi along x = {x}; x is outside the recovered region")]
    SurfaceEscape { x: f64 },

    #[error("no laminar flow: {0}")]
    NoLaminarFlow(String),

    #[error("amplitude too large: psi_y = {psi_y} >= 0 at y = {y}")]
    AmplitudeTooLarge { y: f64, psi_y: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton iteration did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence { iterations: usize, best_residual: f64 },

    #[error("singular linear system at pivot {0}")]
    Singular(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command line pipelines.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 2,
            Error::Stagnation { .. }
            | Error::StagnationHeight { .. }
            | Error::ProfileRange { .. }
            | Error::AmplitudeTooLarge { .. }
            | Error::NoLaminarFlow(_)
            | Error::InvalidParameter(_) => 3,
            Error::Divergence { .. }
            | Error::IntegrationDivergence(_)
            | Error::NonFinite(_)
            | Error::NonConvergence { .. }
            | Error::Singular(_) => 4,
            Error::Structure(_)
            | Error::Domain { .. }
            | Error::AboveSurface { .. }
            | Error::InsufficientData(_)
            | Error::SurfaceEscape { .. } => 4,
        }
    }
}
