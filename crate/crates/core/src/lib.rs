//! Numerical Bohm–Dirac dynamics on time foliations whose leaves have kinks.
//!
//! The crate builds kinked foliations (analytic wedges and constant-lapse
//! foliations grown from an initial surface), evaluates exact multi-time
//! Dirac plane-wave superpositions, integrates the guidance law in
//! foliation-adapted coordinates with continuation across the kink set, and
//! checks the flux balance and equivariance properties that make the
//! continuation consistent.

pub mod geometry;
pub mod wavefunction;
pub mod guidance;
pub mod integrator;
pub mod equivariance;
pub mod slater;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
