use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),

    #[error("invalid operation point: {0}")]
    InvalidOperationPoint(String),

    /// The joint angle is too close to zero; the closed-form model is
    /// singular as phi0 approaches beta0.
    #[error("degenerate geometry: alpha0 = {alpha0_deg:.4} deg is below the {tol_deg} deg tolerance")]
    DegenerateGeometry { alpha0_deg: f64, tol_deg: f64 },

    /// The predicted inner-pair thrust went negative, which the pairwise
    /// model cannot realize. Reported, never clamped.
    #[error("negative inner-pair thrust {t_in:.4} N: predicted equilibrium is outside the model's validity")]
    NegativeThrust { t_in: f64 },

    #[error("invalid actuation limits: {0}")]
    InvalidLimits(String),

    #[error(
        "thrust threshold {threshold_n:.4} N is not reached below the degeneracy \
         tolerance at beta0 = {beta0_deg} deg"
    )]
    NotBracketed { beta0_deg: f64, threshold_n: f64 },

    #[error("outer-pair thrust is not monotone in phi0 at beta0 = {beta0_deg} deg")]
    NonMonotone { beta0_deg: f64 },

    #[error("risk ratio undefined: phi0 = {phi0_deg} deg exceeds the critical upper boundary {phi_u_deg} deg")]
    RiskOutOfRange { phi0_deg: f64, phi_u_deg: f64 },

    #[error("simulation state diverged at t = {t:.3} s")]
    NumericalBlowup { t: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    LogParse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
