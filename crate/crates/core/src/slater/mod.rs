//! Guidance of a single photon by the stress-energy tensor of a classical
//! Maxwell field, `dX^μ/ds ∝ T^{μν} n_ν`, and its behaviour at kinks.

mod field;
mod law;

pub use field::{MaxwellField, MaxwellMode, StressTensor, ETA};
pub use law::{
    paired_kink_check, slater_divergence_check, slater_kink_violation, slater_velocity, wedge_kink_geometry,
    DivergenceReport, KinkGeometry, PairedKinkReport, SlaterKinkReport,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::wavefunction::WavefunctionError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlaterError {
    #[error("invalid plane wave: {0}")]
    InvalidMode(String),
    #[error("T^{{μν}} n_ν vanishes")]
    NullCurrent,
    #[error("one-sided currents agree to {difference:e} of {scale:e}")]
    DegenerateField { difference: f64, scale: f64 },
    #[error("the point is not on the kink plane (offset {0:e})")]
    OffKink(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Wavefunction(#[from] WavefunctionError),
}
