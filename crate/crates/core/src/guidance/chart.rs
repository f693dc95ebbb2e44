use serde::Serialize;

use super::GuidanceError;
use crate::geometry::{Foliation, MinkowskiPoint, Side, UnitNormal};
use crate::wavefunction::{current_tensor, CurrentTensor, SpinorField};

/// Coordinates `(s, q_1, …, q_N)` on the simultaneous configuration space of
/// a foliation in 1+1 dimensions: particle `j` sits at `(f_s(q_j), q_j)`.
#[derive(Clone, Copy)]
pub struct ConfigurationChart<'f> {
    foliation: &'f dyn Foliation,
    particles: usize,
}

/// Leaf data at one particle position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalLeaf {
    pub t: f64,
    pub slope: f64,
    pub lapse: f64,
}

impl LocalLeaf {
    pub fn normal(&self, side: Side) -> UnitNormal<1> {
        UnitNormal::from_gradient([self.slope], side)
    }

    /// `√(1 − f′²) n_μ = (1, −f′)`, the conormal weighted by the induced line element.
    pub fn weighted_conormal(&self) -> [f64; 2] {
        [1.0, -self.slope]
    }

    /// Chart velocity `dq/ds` of a world line with spacetime velocity `dx/dt = v`.
    pub fn chart_velocity(&self, v: f64) -> f64 {
        v * self.lapse / (1.0 - v * self.slope)
    }

    /// Spacetime velocity `dx/dt` of a chart trajectory with `dq/ds = w`.
    pub fn spacetime_velocity(&self, w: f64) -> f64 {
        w / (self.lapse + self.slope * w)
    }
}

impl<'f> ConfigurationChart<'f> {
    pub fn new(foliation: &'f dyn Foliation, particles: usize) -> Self {
        assert!(particles > 0, "chart needs at least one particle");
        Self { foliation, particles }
    }

    pub fn foliation(&self) -> &'f dyn Foliation {
        self.foliation
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    fn check_len(&self, q: &[f64], sides: &[Side]) -> Result<(), GuidanceError> {
        if q.len() != self.particles || sides.len() != self.particles {
            return Err(GuidanceError::ParticleCount {
                expected: self.particles,
                found: q.len().min(sides.len()),
            });
        }
        Ok(())
    }

    pub fn local(&self, s: f64, q: f64, side: Side) -> Result<LocalLeaf, GuidanceError> {
        let f = self.foliation;
        let branch = f.resolve_branch(s, q, side)?;
        let slope = f.slope_on(s, q, branch)?;
        if slope.abs() >= 1.0 - f.spacelike_margin() {
            return Err(crate::geometry::GeometryError::LightlikeTangent { s, x: q, slope }.into());
        }
        Ok(LocalLeaf {
            t: f.height_on(s, q, branch)?,
            slope,
            lapse: f.lapse_on(s, q, branch)?,
        })
    }

    pub fn locals(&self, s: f64, q: &[f64], sides: &[Side]) -> Result<Vec<LocalLeaf>, GuidanceError> {
        self.check_len(q, sides)?;
        q.iter().zip(sides).map(|(&x, &side)| self.local(s, x, side)).collect()
    }

    /// The inverse chart `φ⁻¹(s, q)`.
    pub fn spacetime(&self, s: f64, q: &[f64], sides: &[Side]) -> Result<Vec<MinkowskiPoint<1>>, GuidanceError> {
        Ok(self
            .locals(s, q, sides)?
            .iter()
            .zip(q)
            .map(|(l, &x)| MinkowskiPoint::new(l.t, [x]))
            .collect())
    }
}

/// The chart current `(j⁰, ĵ)` at one chart point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartCurrent {
    pub s: f64,
    pub q: Vec<f64>,
    pub j0: f64,
    pub jvec: Vec<f64>,
    pub sides: Vec<Side>,
}

impl ChartCurrent {
    /// `(j⁰, ĵ)` as a single vector in chart coordinates.
    pub fn components(&self) -> Vec<f64> {
        std::iter::once(self.j0).chain(self.jvec.iter().copied()).collect()
    }

    /// Chart velocity `dq/ds = ĵ / j⁰`.
    pub fn velocity(&self) -> Result<Vec<f64>, GuidanceError> {
        let scale = self.jvec.iter().fold(self.j0.abs(), |m, v| m.max(v.abs()));
        if !(self.j0 > 1e-14 * scale) {
            return Err(GuidanceError::NullCurrent { slot: None });
        }
        Ok(self.jvec.iter().map(|v| v / self.j0).collect())
    }
}

/// `T` with every slot except `free` contracted against `covectors`.
fn partial_contraction(t: &CurrentTensor<1>, covectors: &[[f64; 2]], free: usize) -> [f64; 2] {
    let slots: Vec<Option<&[f64]>> = covectors
        .iter()
        .enumerate()
        .map(|(k, c)| (k != free).then_some(&c[..]))
        .collect();
    let v = t.contract(&slots);
    [v[0], v[1]]
}

fn full_contraction(t: &CurrentTensor<1>, covectors: &[[f64; 2]]) -> f64 {
    let slots: Vec<Option<&[f64]>> = covectors.iter().map(|c| Some(&c[..])).collect();
    t.contract(&slots)[0]
}

/// Spacetime velocity directions `(1, dx_j/dt)` of all particles on leaf `s`.
pub fn guidance_velocity<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    sides: &[Side],
) -> Result<Vec<[f64; 2]>, GuidanceError> {
    let locals = chart.locals(s, q, sides)?;
    let points: Vec<_> = locals.iter().zip(q).map(|(l, &x)| MinkowskiPoint::new(l.t, [x])).collect();
    let t = current_tensor(psi, &points)?;
    let normals: Vec<[f64; 2]> = locals
        .iter()
        .zip(sides)
        .map(|(l, &side)| {
            let n = l.normal(side);
            [n.time, n.space[0]]
        })
        .collect();
    (0..q.len())
        .map(|j| {
            let v = partial_contraction(&t, &normals, j);
            if !(v[0] > 1e-14 * t.scale()) {
                return Err(GuidanceError::NullCurrent { slot: Some(j) });
            }
            Ok([1.0, v[1] / v[0]])
        })
        .collect()
}

/// Density of the `|ψ|²` distribution on `Σ_s^N` relative to the invariant measure.
pub fn rho_sigma<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    sides: &[Side],
) -> Result<f64, GuidanceError> {
    let locals = chart.locals(s, q, sides)?;
    let points: Vec<_> = locals.iter().zip(q).map(|(l, &x)| MinkowskiPoint::new(l.t, [x])).collect();
    let t = current_tensor(psi, &points)?;
    let normals: Vec<[f64; 2]> = locals
        .iter()
        .zip(sides)
        .map(|(l, &side)| {
            let n = l.normal(side);
            [n.time, n.space[0]]
        })
        .collect();
    clamp_density(full_contraction(&t, &normals), t.scale())
}

fn clamp_density(rho: f64, scale: f64) -> Result<f64, GuidanceError> {
    if rho < -1e-10 * scale.max(1.0) {
        return Err(GuidanceError::NegativeDensity(rho));
    }
    Ok(rho.max(0.0))
}

/// Chart current at `(s, q)`.
///
/// `j⁰ = Π_j √(1 − f′(q_j)²) ρ_Σ` and `ĵ_j = j⁰ dq_j/ds`. Both are obtained by
/// contracting the tensor current against the weighted conormals `(1, −f′)`,
/// which keeps the expression free of divisions.
pub fn chart_current<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    sides: &[Side],
) -> Result<ChartCurrent, GuidanceError> {
    let locals = chart.locals(s, q, sides)?;
    let points: Vec<_> = locals.iter().zip(q).map(|(l, &x)| MinkowskiPoint::new(l.t, [x])).collect();
    let t = current_tensor(psi, &points)?;
    let m: Vec<[f64; 2]> = locals.iter().map(LocalLeaf::weighted_conormal).collect();
    let j0 = clamp_density(full_contraction(&t, &m), t.scale())?;
    let jvec = locals
        .iter()
        .enumerate()
        .map(|(j, l)| l.lapse * partial_contraction(&t, &m, j)[1])
        .collect();
    Ok(ChartCurrent {
        s,
        q: q.to_vec(),
        j0,
        jvec,
        sides: sides.to_vec(),
    })
}
