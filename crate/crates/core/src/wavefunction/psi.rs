use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, DiracRepresentation, WavefunctionError};
use crate::geometry::MinkowskiPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergySign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl EnergySign {
    pub fn factor(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }
}

/// A free Dirac plane wave `a · u(k) · exp(−i(E t − k·x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveMode<const D: usize> {
    pub k: [f64; D],
    pub sign: EnergySign,
    pub amplitude: Complex64,
    energy: f64,
    spinor: Vec<Complex64>,
}

impl<const D: usize> PlaneWaveMode<D> {
    /// Solves `(γ^μ p_μ − m) u = 0` for mass `mass`, normalized to `u†u = 1`.
    ///
    /// The spinor is the largest column of `γ^μ p_μ + m` in the standard
    /// representation, mapped into `rep`.
    pub fn new(
        rep: &DiracRepresentation<D>,
        mass: f64,
        k: [f64; D],
        sign: EnergySign,
        amplitude: Complex64,
    ) -> Result<Self, WavefunctionError> {
        if !(mass >= 0.0) {
            return Err(WavefunctionError::InvalidMass(mass));
        }
        let k2: f64 = k.iter().map(|c| c * c).sum();
        let energy = sign.factor() * (k2 + mass * mass).sqrt();
        if energy == 0.0 {
            return Err(WavefunctionError::ZeroEnergyMode);
        }
        let n = rep.spinor_dim();
        let u = rep.from_standard();
        // standard-representation gammas γ_std = U† γ U
        let std_gamma = |mu: usize| u.adjoint() * rep.gamma(mu) * u;
        let mut pslash = std_gamma(0) * Complex64::new(energy, 0.0);
        for (i, ki) in k.iter().enumerate() {
            pslash -= std_gamma(i + 1) * Complex64::new(*ki, 0.0);
        }
        let proj = pslash + CMatrix::identity(n, n) * Complex64::new(mass, 0.0);
        let col = (0..n)
            .map(|c| (c, proj.column(c).norm()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 + 1e-12 { cur } else { best })
            .0;
        let v = proj.column(col).into_owned();
        let v = &v / Complex64::new(v.norm(), 0.0);
        let spinor = (u * v).iter().copied().collect();
        let mode = Self {
            k,
            sign,
            amplitude,
            energy,
            spinor,
        };
        let residual = mode.dirac_residual(rep, mass);
        if residual > 1e-12 * (1.0 + energy.abs()) {
            return Err(WavefunctionError::SpinorResidual(residual));
        }
        Ok(mode)
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Unit-norm spinor `u(k)` in the representation the mode was built for.
    pub fn spinor(&self) -> &[Complex64] {
        &self.spinor
    }

    /// `max |(γ^0 E − γ·k − m) u|`.
    pub fn dirac_residual(&self, rep: &DiracRepresentation<D>, mass: f64) -> f64 {
        let n = rep.spinor_dim();
        let mut op = rep.gamma(0) * Complex64::new(self.energy, 0.0);
        for (i, ki) in self.k.iter().enumerate() {
            op -= rep.gamma(i + 1) * Complex64::new(*ki, 0.0);
        }
        op -= CMatrix::identity(n, n) * Complex64::new(mass, 0.0);
        let u = nalgebra::DVector::from_column_slice(&self.spinor);
        (op * u).camax()
    }

    /// Phase factor `a · exp(−i(E t − k·x))`.
    pub fn phase(&self, p: &MinkowskiPoint<D>) -> Complex64 {
        let kx: f64 = self.k.iter().zip(p.x.iter()).map(|(k, x)| k * x).sum();
        self.amplitude * Complex64::from_polar(1.0, kx - self.energy * p.t)
    }
}

/// A finite superposition of plane waves for one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet<const D: usize> {
    pub modes: Vec<PlaneWaveMode<D>>,
}

impl<const D: usize> Packet<D> {
    pub fn evaluate_into(&self, p: &MinkowskiPoint<D>, out: &mut [Complex64]) {
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for m in &self.modes {
            let ph = m.phase(p);
            for (o, u) in out.iter_mut().zip(&m.spinor) {
                *o += ph * u;
            }
        }
    }
}

/// `coefficient · φ_1 ⊗ … ⊗ φ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm<const D: usize> {
    pub coefficient: Complex64,
    pub factors: Vec<Packet<D>>,
}

/// Anything that yields an N-particle spinor tensor at each configuration.
///
/// Tensor components are laid out with particle 1's spinor index most
/// significant.
pub trait SpinorField<const D: usize>: Send + Sync {
    fn particles(&self) -> usize;
    fn representation(&self) -> &DiracRepresentation<D>;
    fn evaluate(&self, config: &[MinkowskiPoint<D>]) -> Vec<Complex64>;
}

/// Multi-time wave function on `M^N` built from products of exact
/// single-particle Dirac solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTimeWaveFunction<const D: usize> {
    rep: DiracRepresentation<D>,
    masses: Vec<f64>,
    terms: Vec<ProductTerm<D>>,
}

/// Mode description used to assemble wave functions: `(k, sign, amplitude)`.
pub type ModeSpec<const D: usize> = ([f64; D], EnergySign, Complex64);

impl<const D: usize> MultiTimeWaveFunction<D> {
    pub fn new(
        rep: DiracRepresentation<D>,
        masses: Vec<f64>,
        terms: Vec<ProductTerm<D>>,
    ) -> Result<Self, WavefunctionError> {
        if masses.is_empty() {
            return Err(WavefunctionError::Empty("masses"));
        }
        if terms.is_empty() {
            return Err(WavefunctionError::Empty("terms"));
        }
        for t in &terms {
            if t.factors.len() != masses.len() {
                return Err(WavefunctionError::ParticleCountMismatch {
                    expected: masses.len(),
                    found: t.factors.len(),
                });
            }
            if t.factors.iter().any(|f| f.modes.is_empty()) {
                return Err(WavefunctionError::Empty("modes"));
            }
        }
        Ok(Self { rep, masses, terms })
    }

    /// Builds a wave function from per-term, per-particle mode lists; every
    /// term coefficient is 1.
    pub fn from_modes(
        rep: DiracRepresentation<D>,
        masses: Vec<f64>,
        terms: &[Vec<Vec<ModeSpec<D>>>],
    ) -> Result<Self, WavefunctionError> {
        let mut built = Vec::with_capacity(terms.len());
        for term in terms {
            if term.len() != masses.len() {
                return Err(WavefunctionError::ParticleCountMismatch {
                    expected: masses.len(),
                    found: term.len(),
                });
            }
            let factors = term
                .iter()
                .zip(&masses)
                .map(|(modes, &m)| {
                    modes
                        .iter()
                        .map(|&(k, sign, a)| PlaneWaveMode::new(&rep, m, k, sign, a))
                        .collect::<Result<Vec<_>, _>>()
                        .map(|modes| Packet { modes })
                })
                .collect::<Result<Vec<_>, _>>()?;
            built.push(ProductTerm {
                coefficient: Complex64::new(1.0, 0.0),
                factors,
            });
        }
        Self::new(rep, masses, built)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn terms(&self) -> &[ProductTerm<D>] {
        &self.terms
    }

    /// The same physical state expressed in the representation `U γ U†`.
    pub fn transformed(&self, name: &str, u: &CMatrix) -> Result<Self, WavefunctionError> {
        let rep = self.rep.transformed(name, u)?;
        let terms = self
            .terms
            .iter()
            .map(|t| ProductTerm {
                coefficient: t.coefficient,
                factors: t
                    .factors
                    .iter()
                    .map(|p| Packet {
                        modes: p
                            .modes
                            .iter()
                            .map(|m| {
                                let v = u * nalgebra::DVector::from_column_slice(&m.spinor);
                                PlaneWaveMode {
                                    spinor: v.iter().copied().collect(),
                                    ..m.clone()
                                }
                            })
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Ok(Self {
            rep,
            masses: self.masses.clone(),
            terms,
        })
    }

    /// Multiplies every term coefficient by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coefficient *= factor);
        out
    }

    /// `ψ + other`, both in the same representation with equal masses.
    pub fn superpose(&self, other: &Self) -> Result<Self, WavefunctionError> {
        if self.masses != other.masses || self.rep != other.rep {
            return Err(WavefunctionError::Incompatible);
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }
}

impl<const D: usize> SpinorField<D> for MultiTimeWaveFunction<D> {
    fn particles(&self) -> usize {
        self.masses.len()
    }

    fn representation(&self) -> &DiracRepresentation<D> {
        &self.rep
    }

    fn evaluate(&self, config: &[MinkowskiPoint<D>]) -> Vec<Complex64> {
        let n = self.masses.len();
        assert_eq!(config.len(), n, "configuration size must equal particle count");
        let sdim = self.rep.spinor_dim();
        let total = sdim.pow(n as u32);
        let mut psi = vec![Complex64::new(0.0, 0.0); total];
        let mut factor = vec![Complex64::new(0.0, 0.0); sdim];
        let mut acc = Vec::with_capacity(total);
        let mut next = Vec::with_capacity(total);
        for term in &self.terms {
            acc.clear();
            acc.push(term.coefficient);
            for (packet, p) in term.factors.iter().zip(config) {
                packet.evaluate_into(p, &mut factor);
                next.clear();
                for a in &acc {
                    next.extend(factor.iter().map(|f| a * f));
                }
                std::mem::swap(&mut acc, &mut next);
            }
            for (o, a) in psi.iter_mut().zip(&acc) {
                *o += a;
            }
        }
        psi
    }
}
