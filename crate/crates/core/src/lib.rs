//! Floquet-engineered quantum metrology for periodically driven few-level
//! systems.
//!
//! The engine builds the truncated Sambe-space Floquet matrix, diagonalizes
//! it, maps eigenvectors back to the time-domain propagator and evaluates
//! quantum and classical Fisher information by central finite differences.
//! All numerics are generic over the real scalar (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod error;
pub mod metrology;
pub mod models;
pub mod propagator;
pub mod reference;
pub mod sambe;
pub mod scalar;
pub mod spectral;

pub use error::{FloquetError, Result};
pub use metrology::{
    estimation_report, EstimationReport, GeneratorSet, ParameterEstimate, ReportConfig, ReportContext, ShiftedSpectra,
};
pub use models::{RashbaModel, RotatingFieldModel, ToyModel};
pub use propagator::{evolve, PropagatorSample};
pub use reference::{OracleConfig, OracleScheme};
pub use sambe::{
    build_floquet_matrix, build_floquet_matrix_at, fourier_components_from_timedomain, truncation_ladder,
    FloquetMatrix, FourierModel, FourierSet, Params, PeriodicModel, SambeIndex,
};
pub use scalar::{CMatrix, CVector, Real, C};
pub use spectral::{diagonalize, fold_to_fbz, FloquetSpectrum};

pub type Params64 = Params<f64>;
pub type FloquetMatrix64 = FloquetMatrix<f64>;
pub type FloquetSpectrum64 = FloquetSpectrum<f64>;
pub type FourierModel64 = FourierModel<f64>;
pub type RashbaModel64 = RashbaModel<f64>;
pub type RotatingFieldModel64 = RotatingFieldModel<f64>;
pub type EstimationReport64 = EstimationReport<f64>;
pub type ReportConfig64 = ReportConfig<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type CVector64 = CVector<f64>;

/// Version tag written into every output row.
pub const MODEL_VERSION: &str = env!("CARGO_PKG_VERSION");
