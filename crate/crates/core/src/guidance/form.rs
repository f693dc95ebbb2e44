use nalgebra::DMatrix;

use super::{ConfigurationChart, GuidanceError};
use crate::geometry::{GeometryError, MinkowskiPoint, Side};
use crate::wavefunction::{current_tensor, SpinorField};

/// Sign of the permutation `idx` of `0..idx.len()`, or 0 if an index repeats.
pub fn levi_civita(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn unflatten(mut flat: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % base;
        flat /= base;
    }
}

/// Dense components `ω_{A_1…A_k}` of a `k`-form on `ℝ^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    dim: usize,
    degree: usize,
    components: Vec<f64>,
}

impl DifferentialForm {
    pub fn zeros(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            components: vec![0.0; dim.pow(degree as u32)],
        }
    }

    /// Builds a form from a component function over all index tuples.
    pub fn from_fn(dim: usize, degree: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut out = Self::zeros(dim, degree);
        let mut idx = vec![0; degree];
        for flat in 0..out.components.len() {
            unflatten(flat, dim, &mut idx);
            out.components[flat] = f(&idx);
        }
        out
    }

    /// The `n−1`-form `j^{A_0} ε_{A_0 A_1…A_{n−1}}` of a vector field on `ℝ^n`.
    pub fn from_vector(j: &[f64]) -> Self {
        let n = j.len();
        let mut full = vec![0; n];
        Self::from_fn(n, n - 1, |idx| {
            full[1..].copy_from_slice(idx);
            (0..n)
                .map(|a0| {
                    full[0] = a0;
                    f64::from(levi_civita(&full)) * j[a0]
                })
                .sum()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[idx.iter().fold(0, |acc, &i| acc * self.dim + i)]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Pullback along a map with Jacobian `jac` (`dim × m`), giving a form on `ℝ^m`.
    pub fn pullback(&self, jac: &DMatrix<f64>) -> Self {
        assert_eq!(jac.nrows(), self.dim);
        let m = jac.ncols();
        let k = self.degree;
        let mut delta = vec![0; k];
        Self::from_fn(m, k, |a| {
            let mut sum = 0.0;
            for (flat, &w) in self.components.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                unflatten(flat, self.dim, &mut delta);
                let mut prod = w;
                for (d, ai) in delta.iter().zip(a) {
                    prod *= jac[(*d, *ai)];
                    if prod == 0.0 {
                        break;
                    }
                }
                sum += prod;
            }
            sum
        })
    }
}

/// Index of coordinate `x_j^μ` on `M^N` with coordinates ordered particle by particle.
fn coordinate(particle: usize, mu: usize, d: usize) -> usize {
    particle * (d + 1) + mu
}

/// The current form with the Levi-Civita indices interleaved as
/// `ε_{1μ_1, Δ_1…Δ_d, 2μ_2, …, Nμ_N, Δ_{dN−d+1}…Δ_{dN}}`.
pub fn current_form_interleaved<const D: usize, P: SpinorField<D> + ?Sized>(
    psi: &P,
    config: &[MinkowskiPoint<D>],
) -> Result<DifferentialForm, GuidanceError> {
    let t = current_tensor(psi, config)?;
    let n = psi.particles();
    let dim = (D + 1) * n;
    let mut mu = vec![0; n];
    let mut full = vec![0; dim];
    Ok(DifferentialForm::from_fn(dim, D * n, |delta| {
        let mut sum = 0.0;
        for (flat, &value) in t.components().iter().enumerate() {
            unflatten(flat, D + 1, &mut mu);
            for j in 0..n {
                full[j * (D + 1)] = coordinate(j, mu[j], D);
                full[j * (D + 1) + 1..(j + 1) * (D + 1)].copy_from_slice(&delta[j * D..(j + 1) * D]);
            }
            sum += value * f64::from(levi_civita(&full));
        }
        sum
    }))
}

/// The current form `J_{Δ_1…Δ_{dN}} = (−1)^{dN(N−1)/2} T^{μ_1…μ_N} ε_{1μ_1,…,Nμ_N,Δ_1,…,Δ_{dN}}`
/// on `M^N`. It involves no foliation data.
pub fn current_form<const D: usize, P: SpinorField<D> + ?Sized>(
    psi: &P,
    config: &[MinkowskiPoint<D>],
) -> Result<DifferentialForm, GuidanceError> {
    let t = current_tensor(psi, config)?;
    let n = psi.particles();
    let dim = (D + 1) * n;
    let sign = if (D * n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let mut mu = vec![0; n];
    let mut full = vec![0; dim];
    Ok(DifferentialForm::from_fn(dim, D * n, |delta| {
        full[n..].copy_from_slice(delta);
        let mut sum = 0.0;
        for (flat, &value) in t.components().iter().enumerate() {
            unflatten(flat, D + 1, &mut mu);
            for j in 0..n {
                full[j] = coordinate(j, mu[j], D);
            }
            sum += value * f64::from(levi_civita(&full));
        }
        sign * sum
    }))
}

impl ConfigurationChart<'_> {
    /// Jacobian of `φ⁻¹: (s, q) ↦ (f_s(q_j), q_j)_j`, rows ordered as the coordinates of `M^N`.
    pub fn jacobian(&self, s: f64, q: &[f64], sides: &[Side]) -> Result<DMatrix<f64>, GuidanceError> {
        let locals = self.locals(s, q, sides)?;
        let n = q.len();
        let mut jac = DMatrix::zeros(2 * n, n + 1);
        for (j, l) in locals.iter().enumerate() {
            jac[(2 * j, 0)] = l.lapse;
            jac[(2 * j, j + 1)] = l.slope;
            jac[(2 * j + 1, j + 1)] = 1.0;
        }
        Ok(jac)
    }
}

/// Outcome of comparing `φ_*J` with `j^{A_0} ε_{A_0 A_1…A_N}` at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardReport {
    pub pushforward: DifferentialForm,
    pub from_current: DifferentialForm,
    /// Largest component difference relative to the largest component of `j ε`.
    pub residual: f64,
}

fn on_kink(e: GuidanceError) -> GuidanceError {
    match e {
        GuidanceError::Geometry(GeometryError::KinkWithoutSide { s, x }) => GuidanceError::OnKinkSet { s, x },
        other => other,
    }
}

/// The coordinate expression of `J` restricted to the configuration space at
/// `(s, q)`, checked against the chart current.
pub fn pushforward_identity_check<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    sides: &[Side],
) -> Result<PushforwardReport, GuidanceError> {
    let pushforward = pushforward_form(psi, chart, s, q, sides)?;
    let j = super::chart_current(psi, chart, s, q, sides).map_err(on_kink)?;
    let from_current = DifferentialForm::from_vector(&j.components());
    let residual = pushforward.max_abs_difference(&from_current) / from_current.max_abs().max(f64::MIN_POSITIVE);
    Ok(PushforwardReport {
        pushforward,
        from_current,
        residual,
    })
}

/// `φ_*(J|_C)` at `(s, q)` using the tangent space selected by `sides`.
pub fn pushforward_form<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    sides: &[Side],
) -> Result<DifferentialForm, GuidanceError> {
    let points = chart.spacetime(s, q, sides).map_err(on_kink)?;
    let jac = chart.jacobian(s, q, sides).map_err(on_kink)?;
    Ok(current_form(psi, &points)?.pullback(&jac))
}

/// One-sided limits at a kink point of slot `slot`.
#[derive(Debug, Clone, PartialEq)]
pub struct SideGap {
    /// Largest difference between the left and right limits of `J`.
    pub form_gap: f64,
    /// Largest difference between the left and right limits of `φ_*J`.
    pub pushforward_gap: f64,
    /// Scale of `φ_*J` used to judge the gaps.
    pub scale: f64,
}

/// Compares `J` and `φ_*J` from both sides of the kink hypersurface through `(s, q)`.
pub fn pushforward_side_gap<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    slot: usize,
) -> Result<SideGap, GuidanceError> {
    let sides_for = |side| {
        let mut v = vec![Side::Smooth; q.len()];
        v[slot] = side;
        v
    };
    let (left, right) = (sides_for(Side::Left), sides_for(Side::Right));
    let jl = current_form(psi, &chart.spacetime(s, q, &left)?)?;
    let jr = current_form(psi, &chart.spacetime(s, q, &right)?)?;
    let pl = pushforward_form(psi, chart, s, q, &left)?;
    let pr = pushforward_form(psi, chart, s, q, &right)?;
    Ok(SideGap {
        form_gap: jl.max_abs_difference(&jr),
        pushforward_gap: pl.max_abs_difference(&pr),
        scale: pl.max_abs().max(pr.max_abs()),
    })
}
