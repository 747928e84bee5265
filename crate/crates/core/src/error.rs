use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} must be a positive frequency, got {value}")]
    NonPositiveFrequency { what: &'static str, value: f64 },
    #[error("linewidth must be positive, got {0}")]
    NonPositiveLinewidth(f64),
    #[error("coupling magnitude must be non-negative, got {0}")]
    NegativeCoupling(f64),
    #[error("mode is overdamped: Q = {q} (need Q > 1/2)")]
    OverdampedMode { q: f64 },
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative spectral density at omega = {omega} (chi_c = {chi})")]
    NegativeSpectralDensity { omega: f64, chi: f64 },
    #[error("tan(2 phi) diverges at phi = {phi}")]
    PhaseSingular { phi: f64 },
    #[error("single-excitation manifold is degenerate (eta = {eta})")]
    DegenerateManifold { eta: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("dressed transition maps to non-positive bath frequency {omega}")]
    NegativeBathFrequency { omega: f64 },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("steady state is not unique: kernel dimension {kernel_dim}")]
    DegenerateSteadyState { kernel_dim: usize },
    #[error("decay eigenvalue ambiguous: spectral {spectral}, fitted {fitted}")]
    EigenvalueAmbiguous { spectral: f64, fitted: f64 },
    #[error("spectrum is negative beyond numerical noise ({value})")]
    NegativeSpectrum { value: f64 },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
