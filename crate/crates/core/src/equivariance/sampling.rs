use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::LeafQuadrature;
use super::{Domain, EquivarianceError};
use crate::guidance::ConfigurationChart;
use crate::wavefunction::SpinorField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingOptions {
    /// Grid points per axis for the envelope maximum.
    pub envelope_grid: usize,
    /// Mass fraction the window may miss relative to `reference`.
    pub epsilon: f64,
    /// Box whose mass stands in for the full mass of a window.
    pub reference: Option<Domain>,
    /// Quadrature panels per axis for mass integrals.
    pub panels: usize,
    pub max_rebuilds: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            envelope_grid: 64,
            epsilon: 1e-3,
            reference: None,
            panels: 16,
            max_rebuilds: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialEnsemble {
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
    pub envelope: f64,
    pub rebuilds: usize,
    /// `∫_domain j⁰` on the source leaf.
    pub mass: f64,
    /// Domain mass over reference mass, when a reference box is given.
    pub window_fraction: Option<f64>,
}

/// Generator for draw `index`: stream `index` of the generator seeded by `seed`.
pub(crate) fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn grid_max<P: SpinorField<1> + ?Sized>(
    quad: &LeafQuadrature<'_, '_, P>,
    s0: f64,
    axes: &[(f64, f64)],
    grid: usize,
) -> Result<f64, EquivarianceError> {
    let n = axes.len();
    let g = grid.max(2);
    let total = g.pow(n as u32);
    let mut best = 0.0_f64;
    for flat in 0..total {
        let mut rest = flat;
        let q: Vec<f64> = axes
            .iter()
            .map(|&(lo, hi)| {
                let i = rest % g;
                rest /= g;
                lo + (hi - lo) * (i as f64 + 0.5) / g as f64
            })
            .collect();
        best = best.max(quad.density(s0, &q)?);
    }
    Ok(best)
}

/// Draws `m` configurations from `j⁰(s0, ·)` restricted to `domain` by
/// rejection against a uniform envelope. Draw `i` uses its own stream, so
/// results do not depend on the thread count.
pub fn sample_initial<P: SpinorField<1> + Sync + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    s0: f64,
    domain: &Domain,
    m: usize,
    seed: u64,
    opts: &SamplingOptions,
) -> Result<InitialEnsemble, EquivarianceError> {
    let n = chart.particles();
    domain.validate(n)?;
    let quad = LeafQuadrature::new(psi, chart);
    let axes = domain.axes(n);
    let mass = quad.box_mass(s0, domain, &axes, opts.panels)?;
    if !(mass > 0.0) {
        return Err(EquivarianceError::ZeroMass);
    }
    let window_fraction = match &opts.reference {
        Some(reference) => {
            reference.validate(n)?;
            let full = quad.box_mass(s0, reference, &reference.axes(n), opts.panels)?;
            let fraction = mass / full;
            if fraction < 1.0 - opts.epsilon {
                return Err(EquivarianceError::WindowMassTooSmall {
                    fraction,
                    required: 1.0 - opts.epsilon,
                });
            }
            Some(fraction)
        }
        None => None,
    };
    if m == 0 {
        return Ok(InitialEnsemble {
            points: Vec::new(),
            envelope: 0.0,
            rebuilds: 0,
            mass,
            window_fraction,
        });
    }

    let mut envelope = 1.1 * grid_max(&quad, s0, &axes, opts.envelope_grid)?;
    let mut rebuilds = 0;
    loop {
        let drawn: Result<Vec<Vec<f64>>, EquivarianceError> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, i);
                loop {
                    let q: Vec<f64> = axes.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
                    let u = rng.random::<f64>() * envelope;
                    let d = quad.density(s0, &q)?;
                    if d > envelope {
                        return Err(EquivarianceError::EnvelopeViolation { value: d, envelope });
                    }
                    if u < d {
                        return Ok(q);
                    }
                }
            })
            .collect();
        match drawn {
            Ok(points) => {
                return Ok(InitialEnsemble {
                    points,
                    envelope,
                    rebuilds,
                    mass,
                    window_fraction,
                })
            }
            Err(EquivarianceError::EnvelopeViolation { value, envelope: old }) if rebuilds < opts.max_rebuilds => {
                envelope = (1.1 * value).max(1.1 * old);
                rebuilds += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
