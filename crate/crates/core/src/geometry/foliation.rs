use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Distance from a kink locus inside which a one-sided tag selects the branch
/// on that side of the kink (the smooth continuation of the adjacent piece).
pub const KINK_CAPTURE: f64 = 1e-7;

/// Distance from a kink locus inside which an untagged evaluation is refused.
pub const KINK_TOL: f64 = 1e-12;

/// Which one-sided limit to use at a kink locus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Smooth,
    #[serde(rename = "left-limit")]
    Left,
    #[serde(rename = "right-limit")]
    Right,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Smooth => Side::Smooth,
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// The smooth piece of a leaf that an evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `x` is away from every kink; evaluate the graph as is.
    Interior,
    /// Use the piece to the left of the kink at this locus.
    LeftOf(f64),
    /// Use the piece to the right of the kink at this locus.
    RightOf(f64),
}

/// Future-pointing unit conormal of a leaf, stored with lower indices `n_μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitNormal<const D: usize = 1> {
    pub time: f64,
    pub space: [f64; D],
    pub side: Side,
}

impl<const D: usize> UnitNormal<D> {
    /// Conormal of the graph `t = f(x)` with spatial gradient `grad`.
    pub fn from_gradient(grad: [f64; D], side: Side) -> Self {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let gamma = 1.0 / (1.0 - g2).sqrt();
        let mut space = [0.0; D];
        for (s, g) in space.iter_mut().zip(grad) {
            *s = -g * gamma;
        }
        Self { time: gamma, space, side }
    }

    /// Covariant components `(n_0, n_1, …)`.
    pub fn lower(&self) -> Vec<f64> {
        std::iter::once(self.time).chain(self.space).collect()
    }

    /// Contravariant components `(n^0, n^1, …)`.
    pub fn upper(&self) -> Vec<f64> {
        std::iter::once(self.time).chain(self.space.iter().map(|s| -s)).collect()
    }

    /// `n_μ n^μ`, which is 1 for a valid normal.
    pub fn norm_squared(&self) -> f64 {
        self.time * self.time - self.space.iter().map(|s| s * s).sum::<f64>()
    }

    /// Rapidity of the normal relative to the frame time axis.
    pub fn rapidity(&self) -> f64 {
        self.time.acosh()
    }
}

/// A one-parameter family of spacelike graphs `t = f_s(x)` in 1+1 dimensions
/// whose leaves may have kinks along finitely many kink curves `s ↦ x_k(s)`.
pub trait Foliation: Send + Sync {
    /// Lower bound on `1 − |∂_x f|` guaranteed for every leaf.
    fn spacelike_margin(&self) -> f64;

    /// Range of admissible leaf labels.
    fn label_range(&self) -> (f64, f64);

    fn kink_curve_count(&self) -> usize;

    /// Spatial period of the family, if every leaf is periodic in `x`.
    fn spatial_period(&self) -> Option<f64> {
        None
    }

    /// Position of kink curve `curve` on leaf `s`, if that curve exists there.
    fn kink_position(&self, curve: usize, s: f64) -> Option<f64>;

    /// `d x_k / ds` along kink curve `curve`.
    fn kink_velocity(&self, curve: usize, s: f64) -> Option<f64>;

    /// `f_s(x)` evaluated on the given branch.
    fn height_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError>;

    /// `∂_x f_s(x)` evaluated on the given branch.
    fn slope_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError>;

    /// Lapse `∂_s f_s(x)` evaluated on the given branch.
    fn lapse_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError>;

    /// Kink loci of leaf `s`, sorted increasingly.
    fn kinks_at(&self, s: f64) -> Vec<f64> {
        let mut k: Vec<f64> = (0..self.kink_curve_count())
            .filter_map(|i| self.kink_position(i, s))
            .collect();
        k.sort_by(f64::total_cmp);
        k
    }

    /// Nearest kink curve to `x` on leaf `s` as `(curve, position)`.
    fn nearest_kink(&self, s: f64, x: f64) -> Option<(usize, f64)> {
        (0..self.kink_curve_count())
            .filter_map(|i| self.kink_position(i, s).map(|p| (i, p)))
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
    }

    /// Translates a side tag into the branch used for evaluation.
    fn resolve_branch(&self, s: f64, x: f64, side: Side) -> Result<Branch, GeometryError> {
        let Some((_, xk)) = self.nearest_kink(s, x) else {
            return Ok(Branch::Interior);
        };
        let gap = (x - xk).abs();
        match side {
            Side::Smooth if gap <= KINK_TOL * xk.abs().max(1.0) => {
                Err(GeometryError::KinkWithoutSide { s, x })
            }
            Side::Left if gap <= KINK_CAPTURE => Ok(Branch::LeftOf(xk)),
            Side::Right if gap <= KINK_CAPTURE => Ok(Branch::RightOf(xk)),
            _ => Ok(Branch::Interior),
        }
    }

    fn height(&self, s: f64, x: f64, side: Side) -> Result<f64, GeometryError> {
        let b = self.resolve_branch(s, x, side)?;
        self.height_on(s, x, b)
    }

    fn slope(&self, s: f64, x: f64, side: Side) -> Result<f64, GeometryError> {
        let b = self.resolve_branch(s, x, side)?;
        self.slope_on(s, x, b)
    }

    fn lapse(&self, s: f64, x: f64, side: Side) -> Result<f64, GeometryError> {
        let b = self.resolve_branch(s, x, side)?;
        self.lapse_on(s, x, b)
    }

    /// Future unit conormal of leaf `s` at `x`.
    fn leaf_normal(&self, s: f64, x: f64, side: Side) -> Result<UnitNormal<1>, GeometryError> {
        let slope = self.slope(s, x, side)?;
        if slope.abs() >= 1.0 - self.spacelike_margin() {
            return Err(GeometryError::LightlikeTangent { s, x, slope });
        }
        Ok(UnitNormal::from_gradient([slope], side))
    }

    /// Leaf label `s` of the spacetime point `(t, x)`, by bisection on `s`.
    fn label_of(&self, t: f64, x: f64) -> Result<f64, GeometryError> {
        let (lo, hi) = self.label_range();
        let h = |s: f64| self.height_on(s, x, Branch::Interior).map(|f| f - t);
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (h(a)?, h(b)?);
        if fa > 0.0 || fb < 0.0 {
            return Err(GeometryError::BisectionFailure {
                what: "leaf label",
                lo: a,
                hi: b,
            });
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if h(m)? > 0.0 {
                b = m;
            } else {
                a = m;
            }
            if b - a <= 1e-15 * (1.0 + a.abs()) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}
