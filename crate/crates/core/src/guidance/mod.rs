//! Guidance law on the leaves, the chart current, the current form and the
//! flux balance across the kink set.

mod chart;
mod form;
mod kink;

pub use chart::{chart_current, guidance_velocity, rho_sigma, ChartCurrent, ConfigurationChart, LocalLeaf};
pub use form::{
    current_form, current_form_interleaved, levi_civita, pushforward_form, pushforward_identity_check,
    pushforward_side_gap, DifferentialForm, PushforwardReport, SideGap,
};
pub use kink::{current_condition_check, CurrentConditionRecord, KinkChartSet, KinkPiece, ScalarProduct, CORNER_TOL};

use crate::geometry::GeometryError;
use crate::wavefunction::WavefunctionError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GuidanceError {
    #[error("current vanishes (node){}", slot.map(|j| format!(" for particle {}", j + 1)).unwrap_or_default())]
    NullCurrent { slot: Option<usize> },
    #[error("negative density {0:e}")]
    NegativeDensity(f64),
    #[error("point (s = {s}, x = {x}) lies on the kink set and needs a side")]
    OnKinkSet { s: f64, x: f64 },
    #[error("several particles sit on kinks at s = {s}")]
    CornerPoint { s: f64 },
    #[error("kink curve {curve} does not exist at s = {s}")]
    NoKinkCurve { curve: usize, s: f64 },
    #[error("auxiliary scalar product is not positive definite")]
    NotPositiveDefinite,
    #[error("expected {expected} particle positions, found {found}")]
    ParticleCount { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Wavefunction(#[from] WavefunctionError),
}
