//! Minkowski space, spacelike leaves with kinks and foliations built from them.

mod dn0;
mod export;
mod foliation;
mod leaf;
mod point;
mod wedge;
mod zigzag;

pub use dn0::{
    build_dn0_foliation, lorentzian_distance_to_surface, surface_distance, Dn0Foliation, Dn0Options,
    KinkSample, KinkTrack, LeafPoint, SurfaceDistance,
};
pub use export::{kink_rapidities, kink_rows, leaf_rows, KinkRow, LeafRow};
pub use foliation::{Branch, Foliation, Side, UnitNormal, KINK_CAPTURE, KINK_TOL};
pub use leaf::{LeafShape, LeafWithKinks, DEFAULT_MARGIN};
pub use point::{minkowski_dot, MinkowskiPoint};
pub use wedge::WedgeFoliation;
pub use zigzag::ZigzagFoliation;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("leaf tangent is (nearly) lightlike at s={s}, x={x}: slope {slope}")]
    LightlikeTangent { s: f64, x: f64, slope: f64 },
    #[error("x={x} is a kink locus of leaf s={s}; a one-sided tag is required")]
    KinkWithoutSide { s: f64, x: f64 },
    #[error("point (t={t}, x={x}) is not in the causal future of the surface")]
    NotInFuture { t: f64, x: f64 },
    #[error("bisection for {what} does not bracket a root on [{lo}, {hi}]")]
    BisectionFailure { what: &'static str, lo: f64, hi: f64 },
    #[error("leaf slope {slope} violates the spacelike margin {margin}")]
    SpacelikeViolation { slope: f64, margin: f64 },
    #[error("invalid foliation family: {0}")]
    InvalidFamily(String),
    #[error("invalid leaf: {0}")]
    InvalidLeaf(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
