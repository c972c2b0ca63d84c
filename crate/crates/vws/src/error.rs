use thiserror::Error;

/// Every failure mode of the library.
///
/// Configuration problems and numerical failures are kept apart so that a
/// driver can map them to different exit statuses (see [`VwsError::is_config`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VwsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("field shape does not match the grid: {0}")]
    ShapeMismatch(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("{what} has a nonzero mean {mean:e} (tolerance {tol:e})")]
    MeanNotZero { what: String, mean: f64, tol: f64 },
    #[error("Fourier symbol is not finite at k = {k}")]
    NonFiniteSymbol { k: f64 },
    #[error("water depth vanishes: min(1 + eps*zeta) = {min_depth} < h_min = {h_min}")]
    DepthVanishes { min_depth: f64, h_min: f64 },
    #[error("Krylov solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    KrylovNoConvergence { iterations: usize, residual: f64 },
    #[error("vorticity is not divergence free: residual {residual:e} (tolerance {tol:e})")]
    NotDivergenceFree { residual: f64, tol: f64 },
    #[error("bottom normal flux is not zero: {flux:e} (tolerance {tol:e})")]
    BottomFluxNotZero { flux: f64, tol: f64 },
    #[error("Rayleigh-Taylor coefficient fell to {min_a} < a_min = {a_min} at t = {t}")]
    RayleighTaylorViolated { min_a: f64, a_min: f64, t: f64 },
    #[error("inadmissible direction: {0}")]
    InadmissibleDirection(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("snapshot format error: {0}")]
    Format(String),
}

impl VwsError {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            VwsError::InvalidGrid(_) | VwsError::InvalidParams(_) | VwsError::Config(_)
        )
    }
}

impl From<std::io::Error> for VwsError {
    fn from(e: std::io::Error) -> Self {
        VwsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VwsError>;
