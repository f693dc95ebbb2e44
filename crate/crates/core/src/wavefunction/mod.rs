//! Free multi-time Dirac wave functions built from exact plane-wave
//! solutions, and their tensor current.

mod clifford;
mod current;
pub mod presets;
mod psi;

pub use clifford::{CMatrix, DiracRepresentation, StandardRepresentation};
pub use current::{
    check_divergence, current_from_spinor, current_tensor, CurrentTensor, IMAG_DISCARD, IMAG_REJECT,
};
pub use psi::{
    EnergySign, ModeSpec, MultiTimeWaveFunction, Packet, PlaneWaveMode, ProductTerm, SpinorField,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WavefunctionError {
    #[error("unknown Dirac representation `{0}`")]
    UnknownRepresentation(String),
    #[error("similarity transform is not unitary")]
    NotUnitary,
    #[error("mass must be nonnegative and finite, got {0}")]
    InvalidMass(f64),
    #[error("massless mode with k = 0 has no energy branch")]
    ZeroEnergyMode,
    #[error("plane-wave spinor residual {0:e} exceeds tolerance")]
    SpinorResidual(f64),
    #[error("wave function has no {0}")]
    Empty(&'static str),
    #[error("expected {expected} particles, found {found}")]
    ParticleCountMismatch { expected: usize, found: usize },
    #[error("wave functions differ in masses or representation")]
    Incompatible,
    #[error("current has imaginary residue {imaginary:e} at scale {scale:e}")]
    NonRealComponent { imaginary: f64, scale: f64 },
    #[error("finite-difference step {0} outside [1e-5, 1e-2]")]
    InvalidStep(f64),
}
