/// An event in (d+1)-dimensional Minkowski space, units with c = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiPoint<const D: usize = 1> {
    pub t: f64,
    pub x: [f64; D],
}

impl<const D: usize> MinkowskiPoint<D> {
    pub fn new(t: f64, x: [f64; D]) -> Self {
        Self { t, x }
    }

    /// Minkowski square (Δt)² − |Δx|² in signature (+, −, …, −).
    pub fn interval_squared(&self, other: &Self) -> f64 {
        let dt = other.t - self.t;
        let dx2: f64 = self
            .x
            .iter()
            .zip(other.x.iter())
            .map(|(a, b)| (b - a) * (b - a))
            .sum();
        dt * dt - dx2
    }

    /// Proper time from `self` to `other`, if `other` lies in the causal future.
    pub fn proper_time_to(&self, other: &Self) -> Option<f64> {
        let s2 = self.interval_squared(other);
        (other.t >= self.t && s2 >= 0.0).then(|| s2.sqrt())
    }

    /// Active boost with rapidity `eta` along spatial axis `axis`.
    pub fn boosted(&self, axis: usize, eta: f64) -> Self {
        let (ch, sh) = (eta.cosh(), eta.sinh());
        let mut x = self.x;
        let t = ch * self.t + sh * self.x[axis];
        x[axis] = sh * self.t + ch * self.x[axis];
        Self { t, x }
    }
}

/// Minkowski inner product of two vectors given by their contravariant components.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a[0] * b[0] - a[1..].iter().zip(&b[1..]).map(|(p, q)| p * q).sum::<f64>()
}
