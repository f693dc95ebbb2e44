//! Ensemble transport and the statistical comparison with the leaf density.

mod ensemble;
mod quadrature;
mod sampling;
mod stats;

pub use ensemble::{
    run_equivariance, CellRecord, Dynamics, EnsembleRun, EquivarianceConfig, KinkKind, LeafReport, NonLeafReport,
    TubeReport,
};
pub use quadrature::{LeafQuadrature, QUADRATURE_ORDER};
pub use sampling::{sample_initial, InitialEnsemble, SamplingOptions};
pub use stats::{chi_square, kolmogorov_statistic, total_variation, ChiSquare};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guidance::GuidanceError;
use crate::integrator::IntegratorError;

#[derive(Debug, Error)]
pub enum EquivarianceError {
    #[error("density {value:e} exceeds the sampling envelope {envelope:e}")]
    EnvelopeViolation { value: f64, envelope: f64 },
    #[error("window holds {fraction:.6} of the reference mass, below the required {required:.6}")]
    WindowMassTooSmall { fraction: f64, required: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("target leaf {target} does not lie after the source leaf {source_leaf}")]
    TargetBeforeSource { target: f64, source_leaf: f64 },
    #[error("bins per axis must be positive")]
    NoBins,
    #[error("density vanishes on the sampling domain")]
    ZeroMass,
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

/// Configuration space on which the ensemble lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// Box with one interval per particle.
    Window { lower: Vec<f64>, upper: Vec<f64> },
    /// Every coordinate taken modulo `period` into `[origin, origin + period)`.
    Torus { origin: f64, period: f64 },
}

impl Domain {
    pub fn window(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Domain::Window { lower, upper }
    }

    pub fn torus(origin: f64, period: f64) -> Self {
        Domain::Torus { origin, period }
    }

    pub fn validate(&self, particles: usize) -> Result<(), EquivarianceError> {
        match self {
            Domain::Window { lower, upper } => {
                if lower.len() != particles || upper.len() != particles {
                    return Err(EquivarianceError::InvalidDomain(format!(
                        "window needs {particles} intervals, got {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                if lower.iter().zip(upper).any(|(a, b)| !(a < b)) {
                    return Err(EquivarianceError::InvalidDomain("window interval is empty".into()));
                }
            }
            Domain::Torus { period, .. } => {
                if !(*period > 0.0) {
                    return Err(EquivarianceError::InvalidDomain("torus period must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Interval of each particle coordinate.
    pub fn axes(&self, particles: usize) -> Vec<(f64, f64)> {
        match self {
            Domain::Window { lower, upper } => lower.iter().copied().zip(upper.iter().copied()).collect(),
            Domain::Torus { origin, period } => vec![(*origin, origin + period); particles],
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Torus { .. })
    }

    /// Representative of `q` in the fundamental domain.
    pub fn wrap(&self, q: &[f64]) -> Vec<f64> {
        match self {
            Domain::Window { .. } => q.to_vec(),
            Domain::Torus { origin, period } => {
                q.iter().map(|x| origin + (x - origin).rem_euclid(*period)).collect()
            }
        }
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        match self {
            Domain::Window { lower, upper } => {
                q.iter().zip(lower.iter().zip(upper)).all(|(x, (a, b))| *a <= *x && *x < *b)
            }
            Domain::Torus { .. } => true,
        }
    }

    /// Window with every interval shrunk by `margin` on both ends.
    pub fn shrink(&self, margin: f64) -> Result<Domain, EquivarianceError> {
        match self {
            Domain::Window { lower, upper } => {
                let lower: Vec<f64> = lower.iter().map(|a| a + margin).collect();
                let upper: Vec<f64> = upper.iter().map(|b| b - margin).collect();
                if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
                    return Err(EquivarianceError::InvalidDomain(format!(
                        "window is narrower than twice the reach {margin}"
                    )));
                }
                Ok(Domain::Window { lower, upper })
            }
            Domain::Torus { .. } => Ok(self.clone()),
        }
    }
}
