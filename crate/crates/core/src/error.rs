use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("cutoff n_cut = {n_cut} is below the model's largest harmonic {max_harmonic}")]
    CutoffTooSmall { n_cut: usize, max_harmonic: usize },

    #[error("Fourier set is not Hermitian: ‖H(-{harmonic}) - H({harmonic})†‖ = {defect:e}")]
    NonHermitianFourier { harmonic: usize, defect: f64 },

    #[error("{quad_points} quadrature points cannot resolve harmonic {max_harmonic} (need at least {required})")]
    QuadratureTooCoarse { quad_points: usize, max_harmonic: usize, required: usize },

    #[error("eigensolver failed on a {dim}x{dim} matrix ({detail})")]
    Eigensolver { dim: usize, detail: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("probe state is not normalized (norm = {norm})")]
    UnnormalizedProbe { norm: f64 },

    #[error("eigenmode pairing failed across x±δ for `{param}`: overlap {overlap:.3} for modes {first}..{last} (near-degenerate subspace)")]
    PairingFailure { param: String, overlap: f64, first: usize, last: usize },

    #[error("t = {t} is not a multiple of the clock period {period}")]
    NotStroboscopic { t: f64, period: f64 },

    #[error("B0 = B1 = {0} lies on the topological transition; the closed-form winding number is undefined there")]
    TransitionBoundary(f64),

    #[error("integrand singular at t = {t} (field and curvature both vanish)")]
    SingularIntegrand { t: f64 },

    #[error("total field vanishes at t = {t}; the driving angle is undefined")]
    VanishingField { t: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = FloquetError> = std::result::Result<T, E>;
