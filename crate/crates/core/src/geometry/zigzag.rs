use super::{Branch, Foliation, GeometryError, DEFAULT_MARGIN};

/// Periodic wedge family `f_s(x) = c·s + a·h(x − v·s − x₀)` where `h` is the
/// triangle wave of period `P` with unit slopes, `h(u) = |u mod P − P/2| − P/4`.
///
/// Every leaf is a chain of ∧ and ∨ wedges. Kinks sit at `u ≡ 0` and
/// `u ≡ P/2 (mod P)`; the family lists the kink curves within `periods`
/// periods on either side of `x₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagFoliation {
    slope: f64,
    kink_speed: f64,
    lapse_constant: f64,
    period: f64,
    offset: f64,
    periods: usize,
    margin: f64,
}

impl ZigzagFoliation {
    pub fn new(
        slope: f64,
        kink_speed: f64,
        lapse_constant: f64,
        period: f64,
        offset: f64,
        periods: usize,
    ) -> Result<Self, GeometryError> {
        let min_lapse = lapse_constant - slope.abs() * kink_speed.abs();
        if !(min_lapse > 0.0) {
            return Err(GeometryError::InvalidFamily(format!(
                "leaf ordering needs c - |a·v| > 0, got {min_lapse}"
            )));
        }
        if slope.abs() > 1.0 - DEFAULT_MARGIN {
            return Err(GeometryError::InvalidFamily(format!("|a| = {} is not spacelike", slope.abs())));
        }
        if !(period > 0.0) || periods == 0 {
            return Err(GeometryError::InvalidFamily("period and span must be positive".into()));
        }
        Ok(Self {
            slope,
            kink_speed,
            lapse_constant,
            period,
            offset,
            periods,
            margin: DEFAULT_MARGIN,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
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

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Whether kink curve `curve` is a peak (∧ for positive slope) of the triangle wave.
    pub fn is_peak(&self, curve: usize) -> bool {
        curve % 2 == 0
    }

    fn phase(&self, s: f64, x: f64) -> f64 {
        (x - self.kink_speed * s - self.offset).rem_euclid(self.period)
    }

    fn wave(&self, s: f64, x: f64) -> f64 {
        (self.phase(s, x) - 0.5 * self.period).abs() - 0.25 * self.period
    }

    fn wave_slope(&self, s: f64, x: f64) -> f64 {
        if self.phase(s, x) < 0.5 * self.period {
            -1.0
        } else {
            1.0
        }
    }

    /// Slope sign of `h` and a reference point on the piece selected by `branch`.
    fn piece(&self, s: f64, x: f64, branch: Branch) -> (f64, f64) {
        let eighth = 0.125 * self.period;
        match branch {
            Branch::Interior => (self.wave_slope(s, x), x),
            Branch::LeftOf(xk) => (self.wave_slope(s, xk - eighth), xk),
            Branch::RightOf(xk) => (self.wave_slope(s, xk + eighth), xk),
        }
    }
}

impl Foliation for ZigzagFoliation {
    fn spacelike_margin(&self) -> f64 {
        self.margin
    }

    fn label_range(&self) -> (f64, f64) {
        (-1e6, 1e6)
    }

    fn spatial_period(&self) -> Option<f64> {
        Some(self.period)
    }

    fn kink_curve_count(&self) -> usize {
        4 * self.periods
    }

    fn kink_position(&self, curve: usize, s: f64) -> Option<f64> {
        (curve < 4 * self.periods).then(|| {
            let k = curve as f64 - 2.0 * self.periods as f64;
            self.offset + self.kink_speed * s + 0.5 * self.period * k
        })
    }

    fn kink_velocity(&self, curve: usize, _s: f64) -> Option<f64> {
        (curve < 4 * self.periods).then_some(self.kink_speed)
    }

    fn height_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        let (sigma, x_ref) = self.piece(s, x, branch);
        let base = self.lapse_constant * s + self.slope * self.wave(s, x_ref);
        Ok(base + self.slope * sigma * (x - x_ref))
    }

    fn slope_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        Ok(self.slope * self.piece(s, x, branch).0)
    }

    fn lapse_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        Ok(self.lapse_constant - self.slope * self.kink_speed * self.piece(s, x, branch).0)
    }
}
