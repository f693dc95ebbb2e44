use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::{chart_current, ConfigurationChart, GuidanceError};
use crate::geometry::Side;
use crate::wavefunction::SpinorField;

/// Distance below which a second slot counts as sitting on a kink as well.
pub const CORNER_TOL: f64 = 1e-9;

/// Auxiliary scalar product on chart coordinates used to define `n_K`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarProduct {
    Euclidean,
    /// `⟨a, b⟩ = aᵀ G b` for a symmetric positive-definite `G`.
    Matrix(DMatrix<f64>),
}

impl ScalarProduct {
    /// `B Bᵀ + 0.1 I` with `B` drawn uniformly from `[−1, 1]`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        Self::Matrix(&b * b.transpose() + DMatrix::identity(dim, dim) * 0.1)
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Self::Euclidean => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Self::Matrix(g) => {
                let (a, b) = (DVector::from_column_slice(a), DVector::from_column_slice(b));
                a.dot(&(g * b))
            }
        }
    }

    /// The vector normal to the level set of a function with differential `grad`.
    pub fn normal(&self, grad: &[f64]) -> Result<Vec<f64>, GuidanceError> {
        match self {
            Self::Euclidean => Ok(grad.to_vec()),
            Self::Matrix(g) => {
                let chol = g.clone().cholesky().ok_or(GuidanceError::NotPositiveDefinite)?;
                Ok(chol.solve(&DVector::from_column_slice(grad)).iter().copied().collect())
            }
        }
    }
}

/// One piece `{(s, q) : q_slot = x_curve(s)}` of the chart image of the kink set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KinkPiece {
    pub slot: usize,
    pub curve: usize,
}

/// The chart image of the kink set of the configuration space.
#[derive(Clone, Copy)]
pub struct KinkChartSet<'c, 'f> {
    chart: &'c ConfigurationChart<'f>,
}

impl<'c, 'f> KinkChartSet<'c, 'f> {
    pub fn new(chart: &'c ConfigurationChart<'f>) -> Self {
        Self { chart }
    }

    pub fn pieces(&self) -> Vec<KinkPiece> {
        let curves = self.chart.foliation().kink_curve_count();
        (0..self.chart.particles())
            .flat_map(|slot| (0..curves).map(move |curve| KinkPiece { slot, curve }))
            .collect()
    }

    /// Signed offset `q_slot − x_curve(s)`.
    pub fn offset(&self, piece: KinkPiece, s: f64, q: &[f64]) -> Option<f64> {
        self.chart
            .foliation()
            .kink_position(piece.curve, s)
            .map(|xk| q[piece.slot] - xk)
    }

    /// Pieces passing within `tol` of `(s, q)`.
    pub fn containing(&self, s: f64, q: &[f64], tol: f64) -> Vec<KinkPiece> {
        self.pieces()
            .into_iter()
            .filter(|&p| self.offset(p, s, q).is_some_and(|g| g.abs() <= tol))
            .collect()
    }

    /// Differential of `q_slot − x_curve(s)` in chart coordinates.
    pub fn gradient(&self, piece: KinkPiece, s: f64) -> Option<Vec<f64>> {
        let v = self.chart.foliation().kink_velocity(piece.curve, s)?;
        let mut g = vec![0.0; self.chart.particles() + 1];
        g[0] = -v;
        g[piece.slot + 1] = 1.0;
        Some(g)
    }
}

/// Flux balance at one kink point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentConditionRecord {
    pub s: f64,
    pub q: Vec<f64>,
    pub slot: usize,
    pub flux_left: f64,
    pub flux_right: f64,
    pub mismatch: f64,
    pub same_sign: bool,
    pub null_flux: bool,
}

/// Evaluates `n_K·j_L` and `n_K·j_R` on the kink piece of `slot` through `(s, q)`.
///
/// `q[slot]` is replaced by the kink locus so the point lies exactly on K.
pub fn current_condition_check<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s: f64,
    q: &[f64],
    slot: usize,
    curve: usize,
    product: &ScalarProduct,
) -> Result<CurrentConditionRecord, GuidanceError> {
    let set = KinkChartSet::new(chart);
    let piece = KinkPiece { slot, curve };
    let xk = chart
        .foliation()
        .kink_position(curve, s)
        .ok_or(GuidanceError::NoKinkCurve { curve, s })?;
    let mut q = q.to_vec();
    q[slot] = xk;
    if set.containing(s, &q, CORNER_TOL).iter().any(|p| p.slot != slot) {
        return Err(GuidanceError::CornerPoint { s });
    }
    let grad = set.gradient(piece, s).ok_or(GuidanceError::NoKinkCurve { curve, s })?;
    let n_k = product.normal(&grad)?;
    let flux = |side| -> Result<f64, GuidanceError> {
        let mut sides = vec![Side::Smooth; q.len()];
        sides[slot] = side;
        let j = chart_current(psi, chart, s, &q, &sides)?;
        Ok(product.dot(&n_k, &j.components()))
    };
    let (flux_left, flux_right) = (flux(Side::Left)?, flux(Side::Right)?);
    let big = flux_left.abs().max(flux_right.abs());
    let null_flux = big <= 1e-14;
    let mismatch = if null_flux { 0.0 } else { (flux_left - flux_right).abs() / big };
    Ok(CurrentConditionRecord {
        s,
        q,
        slot,
        flux_left,
        flux_right,
        mismatch,
        same_sign: flux_left * flux_right > 0.0,
        null_flux,
    })
}
