use num_complex::Complex64;

use super::{DiracRepresentation, SpinorField, WavefunctionError};
use crate::geometry::MinkowskiPoint;

/// Imaginary residues below this (relative to the tensor scale) are rounding.
pub const IMAG_DISCARD: f64 = 1e-12;
/// Imaginary residues above this (relative) are reported as errors.
pub const IMAG_REJECT: f64 = 1e-10;

/// Real tensor `T^{μ_1…μ_N} = ψ̄ [γ^{μ_1} ⊗ … ⊗ γ^{μ_N}] ψ` at one configuration.
///
/// Components are stored with `μ_1` most significant, base `d + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTensor<const D: usize> {
    particles: usize,
    components: Vec<f64>,
    max_imaginary: f64,
}

impl<const D: usize> CurrentTensor<D> {
    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Largest discarded imaginary part.
    pub fn max_imaginary(&self) -> f64 {
        self.max_imaginary
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &mu| acc * (D + 1) + mu)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.flat_index(idx)]
    }

    /// `T^{0…0}`, equal to `ψ†ψ`.
    pub fn density(&self) -> f64 {
        self.components[0]
    }

    pub fn scale(&self) -> f64 {
        self.components.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Contracts slot `k` with the covector `n_k` for every `k` where
    /// `covectors[k]` is `Some`, leaving the remaining slots free. The result
    /// has one index per `None`, in slot order.
    pub fn contract(&self, covectors: &[Option<&[f64]>]) -> Vec<f64> {
        assert_eq!(covectors.len(), self.particles);
        let free = covectors.iter().filter(|c| c.is_none()).count();
        let mut out = vec![0.0; (D + 1).pow(free as u32)];
        let mut idx = vec![0usize; self.particles];
        for (flat, &value) in self.components.iter().enumerate() {
            let mut rest = flat;
            for slot in (0..self.particles).rev() {
                idx[slot] = rest % (D + 1);
                rest /= D + 1;
            }
            let mut w = value;
            let mut o = 0;
            for (slot, c) in covectors.iter().enumerate() {
                match c {
                    Some(n) => w *= n[idx[slot]],
                    None => o = o * (D + 1) + idx[slot],
                }
            }
            out[o] += w;
        }
        out
    }
}

/// Applies `γ^μ` on tensor slot `slot` of `input`.
fn apply_slot<const D: usize>(
    rep: &DiracRepresentation<D>,
    mu: usize,
    slot: usize,
    particles: usize,
    input: &[Complex64],
    out: &mut [Complex64],
) {
    let sdim = rep.spinor_dim();
    let stride = sdim.pow((particles - 1 - slot) as u32);
    let block = stride * sdim;
    out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
    for base in (0..input.len()).step_by(block) {
        for &(r, c, v) in rep.gamma_entries(mu) {
            for inner in 0..stride {
                out[base + r * stride + inner] += v * input[base + c * stride + inner];
            }
        }
    }
}

/// `ψ̄ Γ ψ` for every product `Γ = γ^{μ_1} ⊗ … ⊗ γ^{μ_N}`, from a given tensor `ψ`.
pub fn current_from_spinor<const D: usize>(
    rep: &DiracRepresentation<D>,
    particles: usize,
    psi: &[Complex64],
) -> Result<CurrentTensor<D>, WavefunctionError> {
    let len = psi.len();
    // χ = (γ^0 ⊗ … ⊗ γ^0) ψ so that ψ̄ = χ†
    let mut chi = psi.to_vec();
    let mut tmp = vec![Complex64::new(0.0, 0.0); len];
    for slot in 0..particles {
        apply_slot(rep, 0, slot, particles, &chi, &mut tmp);
        std::mem::swap(&mut chi, &mut tmp);
    }

    // breadth-first over slots: level k holds Γ_{μ_1..μ_k} ψ for all prefixes
    let mut level: Vec<Vec<Complex64>> = vec![psi.to_vec()];
    for slot in 0..particles {
        let mut next = Vec::with_capacity(level.len() * (D + 1));
        for v in &level {
            for mu in 0..=D {
                let mut out = vec![Complex64::new(0.0, 0.0); len];
                apply_slot(rep, mu, slot, particles, v, &mut out);
                next.push(out);
            }
        }
        level = next;
    }

    let raw: Vec<Complex64> = level
        .iter()
        .map(|v| chi.iter().zip(v).map(|(a, b)| a.conj() * b).sum())
        .collect();
    let scale = raw.iter().fold(0.0_f64, |m, c| m.max(c.re.abs())).max(f64::MIN_POSITIVE);
    let max_imaginary = raw.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
    if max_imaginary > IMAG_REJECT * scale.max(1e-300) && max_imaginary > 1e-300 {
        return Err(WavefunctionError::NonRealComponent {
            imaginary: max_imaginary,
            scale,
        });
    }
    debug_assert!(max_imaginary <= IMAG_DISCARD * scale.max(1.0) * 1e2);
    Ok(CurrentTensor {
        particles,
        components: raw.iter().map(|c| c.re).collect(),
        max_imaginary,
    })
}

/// `T^{μ_1…μ_N} = ψ̄ [γ^{μ_1} ⊗ … ⊗ γ^{μ_N}] ψ` at `config`.
pub fn current_tensor<const D: usize, F: SpinorField<D> + ?Sized>(
    psi: &F,
    config: &[MinkowskiPoint<D>],
) -> Result<CurrentTensor<D>, WavefunctionError> {
    let values = psi.evaluate(config);
    current_from_spinor(psi.representation(), psi.particles(), &values)
}

/// Centered finite-difference divergence `∂_{jμ} T^{…μ…}` in each slot `j`,
/// maximized over the free indices and reported relative to the largest
/// tensor component at `config`.
pub fn check_divergence<const D: usize, F: SpinorField<D> + ?Sized>(
    psi: &F,
    config: &[MinkowskiPoint<D>],
    h: f64,
) -> Result<Vec<f64>, WavefunctionError> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(WavefunctionError::InvalidStep(h));
    }
    let n = psi.particles();
    let center = current_tensor(psi, config)?;
    let scale = center.scale().max(f64::MIN_POSITIVE);
    let mut residuals = Vec::with_capacity(n);
    for slot in 0..n {
        let mut div = vec![0.0; (D + 1).pow(n as u32 - 1)];
        for mu in 0..=D {
            let shifted = |delta: f64| {
                let mut c = config.to_vec();
                if mu == 0 {
                    c[slot].t += delta;
                } else {
                    c[slot].x[mu - 1] += delta;
                }
                current_tensor(psi, &c)
            };
            let (plus, minus) = (shifted(h)?, shifted(-h)?);
            for (flat, (p, m)) in plus.components().iter().zip(minus.components()).enumerate() {
                let mut rest = flat;
                let mut idx = vec![0; n];
                for s in (0..n).rev() {
                    idx[s] = rest % (D + 1);
                    rest /= D + 1;
                }
                if idx[slot] != mu {
                    continue;
                }
                let o = idx
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| *s != slot)
                    .fold(0, |acc, (_, &v)| acc * (D + 1) + v);
                div[o] += (p - m) / (2.0 * h);
            }
        }
        residuals.push(div.iter().fold(0.0_f64, |m, d| m.max(d.abs())) / scale);
    }
    Ok(residuals)
}
