use serde::Serialize;

use super::field::shift;
use super::{MaxwellField, SlaterError};
use crate::geometry::{MinkowskiPoint, Side, UnitNormal, WedgeFoliation};
use crate::wavefunction::{current_tensor, SpinorField, WavefunctionError};

fn lower(n: &UnitNormal<3>) -> [f64; 4] {
    [n.time, n.space[0], n.space[1], n.space[2]]
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Direction `(1, v)` of `j^μ = T^{μν} n_ν`, normalized to unit time component.
pub fn slater_velocity(field: &MaxwellField, x: &MinkowskiPoint<3>, n: &UnitNormal<3>) -> Result<[f64; 4], SlaterError> {
    let t = field.stress_tensor(x);
    let j = t.contract(&lower(n));
    let scale = t.max_abs();
    if scale == 0.0 || !(j[0] > 1e-14 * scale) {
        return Err(SlaterError::NullCurrent);
    }
    Ok([1.0, j[1] / j[0], j[2] / j[0], j[3] / j[0]])
}

/// Side normals and kink conormal of a 3+1 wedge leaf at a point of its kink plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkGeometry {
    pub s: f64,
    pub point: MinkowskiPoint<3>,
    pub n_left: UnitNormal<3>,
    pub n_right: UnitNormal<3>,
    /// Covariant conormal of the spacetime kink set.
    pub n_kink: [f64; 4],
}

pub fn wedge_kink_geometry(wedge: &WedgeFoliation<3>, s: f64, x: [f64; 3]) -> Result<KinkGeometry, SlaterError> {
    let u = wedge.offset(s, &x);
    if u.abs() > 1e-9 * (1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))) {
        return Err(SlaterError::OffKink(u));
    }
    let (n0, e) = wedge.kink_conormal();
    Ok(KinkGeometry {
        s,
        point: MinkowskiPoint::new(wedge.height_nd(s, &x), x),
        n_left: wedge.normal_nd(s, &x, Side::Left)?,
        n_right: wedge.normal_nd(s, &x, Side::Right)?,
        n_kink: [n0, e[0], e[1], e[2]],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlaterKinkReport {
    pub x: [f64; 4],
    #[serde(rename = "j_L")]
    pub j_left: [f64; 4],
    #[serde(rename = "j_R")]
    pub j_right: [f64; 4],
    /// `n_K·j_L − n_K·j_R` for the conormal of the kink set.
    pub mismatch_geometric: f64,
    /// Conormal separating the one-sided currents, absent when they are parallel.
    #[serde(rename = "n_K_star")]
    pub n_k_star: Option<[f64; 4]>,
    pub sign_left: Option<i32>,
    pub sign_right: Option<i32>,
}

impl SlaterKinkReport {
    /// Whether the constructed conormal sees the two sides with strictly opposite signs.
    pub fn violation(&self) -> bool {
        matches!((self.sign_left, self.sign_right), (Some(l), Some(r)) if l * r < 0)
    }
}

fn sign(v: f64) -> i32 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// One-sided Slater currents at a kink, their flux mismatch through the kink
/// set, and a conormal `n*` with `n*·j_L > 0 > n*·j_R`.
///
/// `n*` is the component of `j_L − j_R` orthogonal to `j_L + j_R` in the
/// Euclidean product of the frame, so `n*·j_L = −n*·j_R = |n*|²/2`.
pub fn slater_kink_violation(field: &MaxwellField, geom: &KinkGeometry) -> Result<SlaterKinkReport, SlaterError> {
    let t = field.stress_tensor(&geom.point);
    let jl = t.contract(&lower(&geom.n_left));
    let jr = t.contract(&lower(&geom.n_right));
    let scale = max_abs(&jl).max(max_abs(&jr));
    let delta: [f64; 4] = [0, 1, 2, 3].map(|i| jl[i] - jr[i]);
    let difference = max_abs(&delta);
    if scale == 0.0 || difference <= 1e-12 * scale {
        return Err(SlaterError::DegenerateField { difference, scale });
    }
    let sum: [f64; 4] = [0, 1, 2, 3].map(|i| jl[i] + jr[i]);
    let along = dot4(&delta, &sum) / dot4(&sum, &sum);
    let perp: [f64; 4] = [0, 1, 2, 3].map(|i| delta[i] - along * sum[i]);
    let norm = dot4(&perp, &perp).sqrt();
    let n_star = (norm > 1e-12 * dot4(&delta, &delta).sqrt()).then(|| perp.map(|p| p / norm));
    Ok(SlaterKinkReport {
        x: [geom.point.t, geom.point.x[0], geom.point.x[1], geom.point.x[2]],
        j_left: jl,
        j_right: jr,
        mismatch_geometric: dot4(&geom.n_kink, &jl) - dot4(&geom.n_kink, &jr),
        n_k_star: n_star,
        sign_left: n_star.map(|n| sign(dot4(&n, &jl))),
        sign_right: n_star.map(|n| sign(dot4(&n, &jr))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceReport {
    /// `∂_μ (T^{μν} n_ν)` by centered differences.
    pub divergence: f64,
    /// `max|T| · max|n|` at the point.
    pub scale: f64,
    pub relative: f64,
}

/// Divergence of the Slater current for a normal field `n_field` (covariant components).
pub fn slater_divergence_check(
    field: &MaxwellField,
    n_field: impl Fn(&MinkowskiPoint<3>) -> [f64; 4],
    x: &MinkowskiPoint<3>,
    h: f64,
) -> DivergenceReport {
    let current = |p: &MinkowskiPoint<3>| field.stress_tensor(p).contract(&n_field(p));
    let divergence: f64 = (0..4)
        .map(|mu| (current(&shift(x, mu, h))[mu] - current(&shift(x, mu, -h))[mu]) / (2.0 * h))
        .sum();
    let scale = field.stress_tensor(x).max_abs() * max_abs(&n_field(x));
    DivergenceReport {
        divergence,
        scale,
        relative: if scale > 0.0 { divergence.abs() / scale } else { 0.0 },
    }
}

/// Slater and single-particle Dirac fluxes through the same kink.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedKinkReport {
    pub slater: SlaterKinkReport,
    /// `|n_K·j_L − n_K·j_R| / max(|n_K·j_L|, |n_K·j_R|)` for the Slater current.
    pub slater_mismatch: f64,
    pub hbdm_flux_left: f64,
    pub hbdm_flux_right: f64,
    pub hbdm_mismatch: f64,
}

/// Compares the Slater current of `field` with the chart current of the
/// one-particle Dirac state `psi` at the kink point `(s, x)` of `wedge`.
///
/// The Dirac flux from each side is `ĵ·e − v j⁰` with `j⁰ = T^μ m_μ`,
/// `m = (1, −∇f)` and `ĵ = L T^i`, using the slope and lapse of that side.
pub fn paired_kink_check<P: SpinorField<3> + ?Sized>(
    field: &MaxwellField,
    psi: &P,
    wedge: &WedgeFoliation<3>,
    s: f64,
    x: [f64; 3],
) -> Result<PairedKinkReport, SlaterError> {
    if psi.particles() != 1 {
        return Err(WavefunctionError::ParticleCountMismatch {
            expected: 1,
            found: psi.particles(),
        }
        .into());
    }
    let geom = wedge_kink_geometry(wedge, s, x)?;
    let slater = slater_kink_violation(field, &geom)?;
    let fl = dot4(&geom.n_kink, &slater.j_left);
    let fr = dot4(&geom.n_kink, &slater.j_right);
    let slater_mismatch = (fl - fr).abs() / fl.abs().max(fr.abs());

    let t = current_tensor(psi, &[geom.point])?;
    let tc = [0, 1, 2, 3].map(|mu| t.get(&[mu]));
    let e = wedge.axis();
    let v = wedge.kink_speed();
    let flux = |side: Side| -> Result<f64, SlaterError> {
        let n = wedge.normal_nd(s, &x, side)?;
        let grad = n.space.map(|c| -c / n.time);
        let j0 = tc[0] - (0..3).map(|i| grad[i] * tc[i + 1]).sum::<f64>();
        let lapse = wedge.lapse_nd(s, &x, side)?;
        let jhat_e: f64 = (0..3).map(|i| e[i] * lapse * tc[i + 1]).sum();
        Ok(jhat_e - v * j0)
    };
    let (hl, hr) = (flux(Side::Left)?, flux(Side::Right)?);
    Ok(PairedKinkReport {
        slater,
        slater_mismatch,
        hbdm_flux_left: hl,
        hbdm_flux_right: hr,
        hbdm_mismatch: (hl - hr).abs() / hl.abs().max(hr.abs()),
    })
}
