//! Adaptive integration of chart trajectories with continuation across the
//! kink set.

pub mod dopri;
mod trajectory;

pub use trajectory::{
    integrate, IntegratorOptions, KinkCrossing, Termination, TrajectoryRecord, TrajectorySample,
};

use crate::guidance::GuidanceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegratorError {
    #[error("initial density vanishes at s = {s}")]
    ZeroDensity { s: f64 },
    #[error("particle {} starts on a kink at s = {s}", slot + 1)]
    StartsOnKink { slot: usize, s: f64 },
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
}
