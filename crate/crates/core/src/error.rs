use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change bracketed in ({lo:e}, {hi:e}] for the width quartic (g={g}, n={n})")]
    NoRoot { lo: f64, hi: f64, g: f64, n: f64 },

    #[error("width trajectory collapsed: a = {width} at t = {t} (ansatz breakdown)")]
    AnsatzCollapse { t: f64, width: f64 },

    #[error("soliton breakdown: |g n| = {gn} at t = {t} is at or below the sech-ansatz validity threshold 1")]
    SolitonBreakdown { t: f64, gn: f64 },

    #[error("ground state did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("box too small: relative edge amplitude {edge:e} exceeds {threshold:e}")]
    BoxTooSmall { edge: f64, threshold: f64 },

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("norm drifted by {drift:e} (relative) at t = {t}")]
    NormDrift { t: f64, drift: f64 },

    #[error("quantum speed limit undefined: shortcut energy {shortcut_energy} is not positive")]
    UndefinedBound { shortcut_energy: f64 },

    #[error("singular linear system while designing the quintic trajectory")]
    SingularSystem,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code: 2 for validation/input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Parse(_) | Error::GridMismatch | Error::Io(_) => 2,
            _ => 3,
        }
    }

    /// Short machine-parsable category used as an error-line prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) | Error::Parse(_) | Error::GridMismatch | Error::Io(_) => "validation",
            _ => "numerical",
        }
    }
}
