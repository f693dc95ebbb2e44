use serde::{Deserialize, Serialize};

use super::SlaterError;
use crate::geometry::MinkowskiPoint;

/// Minkowski metric `diag(1, −1, −1, −1)`.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Real vacuum plane wave `E = A ε cos(k·x − ωt + φ)`, `B = k̂ × E`, `ω = |k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellMode {
    pub wave_vector: [f64; 3],
    pub polarization: [f64; 3],
    pub amplitude: f64,
    pub phase: f64,
}

impl MaxwellMode {
    /// Projects `polarization` onto the plane orthogonal to `k` and normalizes it.
    pub fn new(wave_vector: [f64; 3], polarization: [f64; 3], amplitude: f64, phase: f64) -> Result<Self, SlaterError> {
        let k2 = dot3(&wave_vector, &wave_vector);
        if !(k2 > 0.0) || !k2.is_finite() {
            return Err(SlaterError::InvalidMode("wave vector must be nonzero".into()));
        }
        let along = dot3(&polarization, &wave_vector) / k2;
        let eps = [0, 1, 2].map(|i| polarization[i] - along * wave_vector[i]);
        let norm = dot3(&eps, &eps).sqrt();
        if !(norm > 1e-12 * dot3(&polarization, &polarization).sqrt()) {
            return Err(SlaterError::InvalidMode("polarization is parallel to the wave vector".into()));
        }
        Ok(Self {
            wave_vector,
            polarization: eps.map(|e| e / norm),
            amplitude,
            phase,
        })
    }

    pub fn frequency(&self) -> f64 {
        dot3(&self.wave_vector, &self.wave_vector).sqrt()
    }

    /// Null wave four-vector `k^μ = (ω, k)`.
    pub fn four_vector(&self) -> [f64; 4] {
        let k = self.wave_vector;
        [self.frequency(), k[0], k[1], k[2]]
    }

    /// `(E, B)` at `x`.
    pub fn fields(&self, x: &MinkowskiPoint<3>) -> ([f64; 3], [f64; 3]) {
        let w = self.frequency();
        let c = self.amplitude * (dot3(&self.wave_vector, &x.x) - w * x.t + self.phase).cos();
        let e = self.polarization.map(|p| c * p);
        let khat = self.wave_vector.map(|k| k / w);
        (e, cross(&khat, &e))
    }
}

/// Superposition of vacuum plane waves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MaxwellField {
    pub modes: Vec<MaxwellMode>,
}

impl MaxwellField {
    pub fn new(modes: Vec<MaxwellMode>) -> Self {
        Self { modes }
    }

    pub fn fields(&self, x: &MinkowskiPoint<3>) -> ([f64; 3], [f64; 3]) {
        self.modes.iter().fold(([0.0; 3], [0.0; 3]), |(e, b), m| {
            let (em, bm) = m.fields(x);
            ([0, 1, 2].map(|i| e[i] + em[i]), [0, 1, 2].map(|i| b[i] + bm[i]))
        })
    }

    /// Contravariant field tensor `F^{μν}` with `F^{i0} = E^i`, `F^{ij} = −ε^{ijk} B^k`.
    pub fn tensor_upper(&self, x: &MinkowskiPoint<3>) -> [[f64; 4]; 4] {
        let (e, b) = self.fields(x);
        [
            [0.0, -e[0], -e[1], -e[2]],
            [e[0], 0.0, -b[2], b[1]],
            [e[1], b[2], 0.0, -b[0]],
            [e[2], -b[1], b[0], 0.0],
        ]
    }

    /// Covariant field tensor `F_{μν}`.
    pub fn tensor(&self, x: &MinkowskiPoint<3>) -> [[f64; 4]; 4] {
        let up = self.tensor_upper(x);
        let mut low = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                low[mu][nu] = ETA[mu] * ETA[nu] * up[mu][nu];
            }
        }
        low
    }

    /// `T^{μν} = F^{μα} η_{αβ} F^{βν} + ¼ η^{μν} F_{αβ} F^{αβ}`.
    pub fn stress_tensor(&self, x: &MinkowskiPoint<3>) -> StressTensor {
        let f = self.tensor_upper(x);
        let mut invariant = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                invariant += ETA[a] * ETA[b] * f[a][b] * f[a][b];
            }
        }
        let mut t = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                let mut v: f64 = (0..4).map(|a| f[mu][a] * ETA[a] * f[a][nu]).sum();
                if mu == nu {
                    v += 0.25 * ETA[mu] * invariant;
                }
                t[mu][nu] = v;
            }
        }
        StressTensor { components: t }
    }

    /// Largest relative centered-difference divergence `max_ν |∂_μ T^{μν}| / max|T|`.
    pub fn stress_divergence(&self, x: &MinkowskiPoint<3>, h: f64) -> f64 {
        let scale = self.stress_tensor(x).max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut div = [0.0; 4];
        for mu in 0..4 {
            let plus = self.stress_tensor(&shift(x, mu, h));
            let minus = self.stress_tensor(&shift(x, mu, -h));
            for (nu, d) in div.iter_mut().enumerate() {
                *d += (plus.components[mu][nu] - minus.components[mu][nu]) / (2.0 * h);
            }
        }
        div.iter().fold(0.0_f64, |m, d| m.max(d.abs())) / scale
    }
}

pub(crate) fn shift(x: &MinkowskiPoint<3>, mu: usize, h: f64) -> MinkowskiPoint<3> {
    let mut y = *x;
    if mu == 0 {
        y.t += h;
    } else {
        y.x[mu - 1] += h;
    }
    y
}

/// Symmetric electromagnetic stress-energy tensor `T^{μν}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StressTensor {
    pub components: [[f64; 4]; 4],
}

impl StressTensor {
    pub fn energy_density(&self) -> f64 {
        self.components[0][0]
    }

    /// `T^μ_μ = η_{μν} T^{μν}`.
    pub fn trace(&self) -> f64 {
        (0..4).map(|mu| ETA[mu] * self.components[mu][mu]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn symmetry_error(&self) -> f64 {
        let mut e = 0.0_f64;
        for mu in 0..4 {
            for nu in 0..4 {
                e = e.max((self.components[mu][nu] - self.components[nu][mu]).abs());
            }
        }
        e
    }

    /// `T^{μν} n_ν` for a covector `n`.
    pub fn contract(&self, n: &[f64; 4]) -> [f64; 4] {
        [0, 1, 2, 3].map(|mu| (0..4).map(|nu| self.components[mu][nu] * n[nu]).sum())
    }
}
