use super::{Branch, Foliation, GeometryError, Side, UnitNormal, DEFAULT_MARGIN};

/// Analytic family `f_s(x) = c·s + a·|e·x − v·s|` with a single planar kink
/// moving at speed `v` along the unit axis `e`. Negative `a` gives ∧-shaped
/// leaves, positive `a` ∨-shaped ones.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeFoliation<const D: usize = 1> {
    slope: f64,
    kink_speed: f64,
    lapse_constant: f64,
    axis: [f64; D],
    margin: f64,
    labels: (f64, f64),
}

impl WedgeFoliation<1> {
    pub fn new(slope: f64, kink_speed: f64, lapse_constant: f64) -> Result<Self, GeometryError> {
        Self::with_axis(slope, kink_speed, lapse_constant, [1.0], DEFAULT_MARGIN)
    }

    /// The flat foliation `f_s(x) = s`.
    pub fn flat() -> Self {
        Self::new(0.0, 0.0, 1.0).expect("flat family is valid")
    }
}

impl<const D: usize> WedgeFoliation<D> {
    pub fn with_axis(
        slope: f64,
        kink_speed: f64,
        lapse_constant: f64,
        axis: [f64; D],
        margin: f64,
    ) -> Result<Self, GeometryError> {
        let min_lapse = lapse_constant - slope.abs() * kink_speed.abs();
        if !(min_lapse > 0.0) {
            return Err(GeometryError::InvalidFamily(format!(
                "leaf ordering needs c - |a·v| > 0, got {min_lapse}"
            )));
        }
        if slope.abs() > 1.0 - margin {
            return Err(GeometryError::InvalidFamily(format!(
                "|a| = {} exceeds spacelike bound 1 - {margin}",
                slope.abs()
            )));
        }
        let norm = axis.iter().map(|e| e * e).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(GeometryError::InvalidFamily("kink axis must be nonzero".into()));
        }
        Ok(Self {
            slope,
            kink_speed,
            lapse_constant,
            axis: axis.map(|e| e / norm),
            margin,
            labels: (-1e6, 1e6),
        })
    }

    pub fn slope_parameter(&self) -> f64 {
        self.slope
    }

    pub fn kink_speed(&self) -> f64 {
        self.kink_speed
    }

    pub fn lapse_constant(&self) -> f64 {
        self.lapse_constant
    }

    pub fn axis(&self) -> [f64; D] {
        self.axis
    }

    pub fn has_kink(&self) -> bool {
        self.slope != 0.0
    }

    /// Signed distance of `x` from the kink plane on leaf `s`.
    pub fn offset(&self, s: f64, x: &[f64; D]) -> f64 {
        self.axis.iter().zip(x).map(|(e, xi)| e * xi).sum::<f64>() - self.kink_speed * s
    }

    pub fn height_nd(&self, s: f64, x: &[f64; D]) -> f64 {
        self.lapse_constant * s + self.slope * self.offset(s, x).abs()
    }

    fn sign_for(&self, s: f64, x: &[f64; D], side: Side) -> Result<f64, GeometryError> {
        let u = self.offset(s, x);
        match side {
            Side::Left => Ok(-1.0),
            Side::Right => Ok(1.0),
            Side::Smooth if self.has_kink() && u == 0.0 => Err(GeometryError::KinkWithoutSide { s, x: x[0] }),
            Side::Smooth => Ok(if u < 0.0 { -1.0 } else { 1.0 }),
        }
    }

    /// Unit conormal in d+1 dimensions; the tag selects the piece `e·x ≶ v·s`.
    pub fn normal_nd(&self, s: f64, x: &[f64; D], side: Side) -> Result<UnitNormal<D>, GeometryError> {
        let sigma = self.sign_for(s, x, side)?;
        Ok(UnitNormal::from_gradient(self.axis.map(|e| self.slope * sigma * e), side))
    }

    /// Lapse `∂_s f_s(x) = c − a·σ·v` on the piece selected by `side`.
    pub fn lapse_nd(&self, s: f64, x: &[f64; D], side: Side) -> Result<f64, GeometryError> {
        let sigma = self.sign_for(s, x, side)?;
        Ok(self.lapse_constant - self.slope * sigma * self.kink_speed)
    }

    /// Conormal `(−v/c, e)` of the spacetime kink set `e·x = v·t/c`.
    pub fn kink_conormal(&self) -> (f64, [f64; D]) {
        (-self.kink_speed / self.lapse_constant, self.axis)
    }
}

impl WedgeFoliation<1> {
    fn sigma(&self, s: f64, x: f64, branch: Branch) -> f64 {
        match branch {
            Branch::LeftOf(_) => -1.0,
            Branch::RightOf(_) => 1.0,
            Branch::Interior => {
                if x - self.kink_speed * s < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

impl Foliation for WedgeFoliation<1> {
    fn spacelike_margin(&self) -> f64 {
        self.margin
    }

    fn label_range(&self) -> (f64, f64) {
        self.labels
    }

    fn kink_curve_count(&self) -> usize {
        usize::from(self.has_kink())
    }

    fn kink_position(&self, curve: usize, s: f64) -> Option<f64> {
        (curve == 0 && self.has_kink()).then(|| self.kink_speed * s)
    }

    fn kink_velocity(&self, curve: usize, _s: f64) -> Option<f64> {
        (curve == 0 && self.has_kink()).then_some(self.kink_speed)
    }

    fn height_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        let sigma = self.sigma(s, x, branch);
        Ok(self.lapse_constant * s + self.slope * sigma * (x - self.kink_speed * s))
    }

    fn slope_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        Ok(self.slope * self.sigma(s, x, branch))
    }

    fn lapse_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        Ok(self.lapse_constant - self.slope * self.kink_speed * self.sigma(s, x, branch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::KINK_CAPTURE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_leaf_normal_is_time_axis() {
        let f = WedgeFoliation::flat();
        let n = f.leaf_normal(0.3, 1.7, Side::Smooth).unwrap();
        assert_eq!((n.time, n.space[0]), (1.0, 0.0));
        assert_eq!(f.kink_curve_count(), 0);
    }

    #[test]
    fn wedge_flank_normal_matches_graph_formula() {
        let f = WedgeFoliation::new(-0.5, 0.0, 0.75_f64.sqrt()).unwrap();
        let n = f.leaf_normal(1.0, 2.0, Side::Smooth).unwrap();
        let up = n.upper();
        let g = 1.0 / 0.75_f64.sqrt();
        assert!((up[0] - g).abs() < 1e-15 && (up[1] - (-0.5 * g)).abs() < 1e-15);
        assert!((n.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn side_limits_at_the_kink_are_mirror_images() {
        let f = WedgeFoliation::new(-0.5, 0.0, 0.75_f64.sqrt()).unwrap();
        assert!(matches!(
            f.leaf_normal(1.0, 0.0, Side::Smooth),
            Err(GeometryError::KinkWithoutSide { .. })
        ));
        let l = f.leaf_normal(1.0, 0.0, Side::Left).unwrap();
        let r = f.leaf_normal(1.0, 0.0, Side::Right).unwrap();
        assert!(l.space[0] * r.space[0] < 0.0);
        assert!((l.space[0] + r.space[0]).abs() < 1e-15);
        assert!((l.rapidity() - r.rapidity()).abs() < 1e-15);
        for n in [l, r] {
            assert!((n.norm_squared() - 1.0).abs() < 1e-12);
            assert!(n.time >= 1.0);
        }
    }

    #[test]
    fn side_tag_selects_continuation_near_the_kink() {
        let f = WedgeFoliation::new(0.3, 0.5, 1.0).unwrap();
        let xk = 0.5 * 2.0;
        let x = xk + 0.1 * KINK_CAPTURE;
        assert_eq!(f.slope(2.0, x, Side::Left).unwrap(), -0.3);
        assert_eq!(f.slope(2.0, x, Side::Smooth).unwrap(), 0.3);
        assert_eq!(f.slope(2.0, xk + 10.0 * KINK_CAPTURE, Side::Left).unwrap(), 0.3);
    }

    #[test]
    fn parameter_validation() {
        assert!(WedgeFoliation::new(0.9, 0.0, 0.1).is_ok());
        assert!(matches!(
            WedgeFoliation::new(0.5, 2.0, 0.5),
            Err(GeometryError::InvalidFamily(_))
        ));
        assert!(matches!(
            WedgeFoliation::new(0.99, 0.0, 1.0),
            Err(GeometryError::InvalidFamily(_))
        ));
        let flat = WedgeFoliation::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(flat.height(3.0, -2.0, Side::Smooth).unwrap(), 3.0);
    }

    #[test]
    fn leaves_are_ordered_with_positive_lapse() {
        let f = WedgeFoliation::new(0.5, 0.9, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let s = rng.random_range(-5.0..5.0);
            let x = rng.random_range(-10.0..10.0);
            let eps = 1e-3;
            assert!(f.height(s + eps, x, Side::Smooth).unwrap() > f.height(s, x, Side::Smooth).unwrap());
            if (x - 0.9 * s).abs() > 1e-9 {
                assert!(f.lapse(s, x, Side::Smooth).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn label_inverts_height() {
        let f = WedgeFoliation::new(-0.4, 0.2, 1.0).unwrap();
        let t = f.height(1.3, 0.7, Side::Smooth).unwrap();
        assert!((f.label_of(t, 0.7).unwrap() - 1.3).abs() < 1e-12);
    }
}
