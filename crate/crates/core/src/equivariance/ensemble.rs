use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{tensor_sum, LeafQuadrature};
use super::sampling::{sample_initial, SamplingOptions};
use super::stats::{chi_square, total_variation};
use super::{Domain, EquivarianceError};
use crate::geometry::{Branch, MinkowskiPoint, Side};
use crate::guidance::{ConfigurationChart, GuidanceError};
use crate::integrator::{integrate, IntegratorOptions, Termination, TrajectorySample};
use crate::wavefunction::{current_tensor, SpinorField};

/// Transport rule applied to the ensemble.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    /// Guidance law with continuation across kinks.
    #[default]
    Guided,
    /// Guidance law up to the first kink crossing, zero chart velocity after it.
    FrozenAfterKink,
}

fn default_samples() -> usize {
    20_000
}

fn default_bins() -> usize {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceConfig {
    pub s0: f64,
    pub targets: Vec<f64>,
    pub domain: Domain,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Histogram cells per particle coordinate.
    #[serde(default = "default_bins")]
    pub bins_per_axis: usize,
    #[serde(default)]
    pub dynamics: Dynamics,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    /// Bound on `|dq/ds|` used to shrink windows; estimated from the foliation if absent.
    #[serde(default)]
    pub chart_speed_bound: Option<f64>,
    /// Time of a flat comparison surface outside the foliation.
    #[serde(default)]
    pub non_leaf_time: Option<f64>,
    /// Compare crossing counts at kink curves with the flux integrals.
    #[serde(default)]
    pub tube_check: bool,
}

impl EquivarianceConfig {
    pub fn new(s0: f64, targets: Vec<f64>, domain: Domain) -> Self {
        Self {
            s0,
            targets,
            domain,
            samples: default_samples(),
            seed: 0,
            bins_per_axis: default_bins(),
            dynamics: Dynamics::Guided,
            sampling: SamplingOptions::default(),
            integrator: IntegratorOptions {
                record_samples: false,
                ..IntegratorOptions::default()
            },
            chart_speed_bound: None,
            non_leaf_time: None,
            tube_check: false,
        }
    }
}

/// One histogram cell on a target surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub empirical: f64,
    pub theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafReport {
    pub s: f64,
    pub tv: f64,
    pub bound: f64,
    pub chi2: f64,
    pub dof: usize,
    pub p: f64,
    pub aborted_fraction: f64,
    /// Fraction of the ensemble with at least one kink crossing before this leaf.
    pub crossed_fraction: f64,
    pub outside_empirical: f64,
    pub outside_theory: f64,
    /// Sum of the theory cells.
    pub theory_mass: f64,
    /// Histogram window on this leaf.
    pub window: Domain,
    #[serde(skip)]
    pub cells: Vec<CellRecord>,
}

impl LeafReport {
    pub fn within_bound(&self) -> bool {
        self.tv <= self.bound
    }
}

/// Shape of the leaf at a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KinkKind {
    /// Slope decreases across the kink.
    Ridge,
    /// Slope increases across the kink.
    Valley,
}

/// Signed crossings of one particle through kinks of one kind, per trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeReport {
    pub slot: usize,
    pub kind: KinkKind,
    /// Mean signed crossing count, left to right counted positive.
    pub observed: f64,
    /// Standard error of `observed`.
    pub sigma: f64,
    /// Flux integral with the current evaluated on the left of the kink.
    pub expected_left: f64,
    /// Flux integral with the current evaluated on the right of the kink.
    pub expected_right: f64,
    pub crossings: usize,
}

impl TubeReport {
    pub fn within_three_sigma(&self) -> bool {
        let tol = 3.0 * self.sigma + 1e-9;
        (self.observed - self.expected_left).abs() <= tol && (self.observed - self.expected_right).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonLeafReport {
    pub time: f64,
    pub tv: f64,
    pub bound: f64,
    pub chi2: f64,
    pub dof: usize,
    pub p: f64,
    /// Fraction of trajectories whose crossing with the surface was not found.
    pub missed_fraction: f64,
    /// Mass of the flat-surface density over the source mass.
    pub mass_ratio: f64,
    #[serde(skip)]
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRun {
    pub seed: u64,
    #[serde(rename = "M")]
    pub samples: usize,
    pub s0: f64,
    pub targets: Vec<f64>,
    pub domain: Domain,
    pub bins_per_axis: usize,
    pub dynamics: Dynamics,
    pub envelope: f64,
    pub envelope_rebuilds: usize,
    pub source_mass: f64,
    pub window_fraction: Option<f64>,
    pub crossing_fraction: f64,
    pub events: usize,
    pub terminations: BTreeMap<String, usize>,
    pub leaves: Vec<LeafReport>,
    pub tube: Option<Vec<TubeReport>>,
    pub non_leaf: Option<NonLeafReport>,
}

struct Histogram {
    axes: Vec<(f64, f64)>,
    bins: usize,
}

impl Histogram {
    fn cells(&self) -> usize {
        self.bins.pow(self.axes.len() as u32)
    }

    fn cell_of(&self, q: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for (&x, &(lo, hi)) in q.iter().zip(&self.axes) {
            if !(lo <= x && x < hi) {
                return None;
            }
            let i = (((x - lo) / (hi - lo)) * self.bins as f64) as usize;
            idx = idx * self.bins + i.min(self.bins - 1);
        }
        Some(idx)
    }

    fn bounds(&self, cell: usize) -> Vec<(f64, f64)> {
        let mut rest = cell;
        let mut out = vec![(0.0, 0.0); self.axes.len()];
        for (k, &(lo, hi)) in self.axes.iter().enumerate().rev() {
            let i = rest % self.bins;
            rest /= self.bins;
            let w = (hi - lo) / self.bins as f64;
            out[k] = (lo + w * i as f64, lo + w * (i + 1) as f64);
        }
        out
    }
}

struct Outcome {
    positions: Vec<Option<Vec<f64>>>,
    events_before: Vec<usize>,
    crossings: Vec<(usize, KinkKind, i32)>,
    termination: Option<Termination>,
    surface: Option<Vec<f64>>,
}

fn kink_kind(chart: &ConfigurationChart<'_>, curve: usize, s: f64) -> Option<KinkKind> {
    let f = chart.foliation();
    let xk = f.kink_position(curve, s)?;
    let left = f.slope_on(s, xk, Branch::LeftOf(xk)).ok()?;
    let right = f.slope_on(s, xk, Branch::RightOf(xk)).ok()?;
    Some(if left > right { KinkKind::Ridge } else { KinkKind::Valley })
}

fn transport<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    cfg: &EquivarianceConfig,
    q0: &[f64],
) -> Outcome {
    let mut opts = cfg.integrator;
    opts.record_samples = cfg.non_leaf_time.is_some();
    if cfg.dynamics == Dynamics::FrozenAfterKink {
        opts.max_events = Some(1);
    }
    let mut s = cfg.s0;
    let mut q = q0.to_vec();
    let mut alive = true;
    let mut frozen = false;
    let mut termination = None;
    let mut total_events = 0;
    let mut out = Outcome {
        positions: Vec::with_capacity(cfg.targets.len()),
        events_before: Vec::with_capacity(cfg.targets.len()),
        crossings: Vec::new(),
        termination: None,
        surface: None,
    };
    let mut samples: Vec<TrajectorySample> = Vec::new();
    for &target in &cfg.targets {
        if alive && !frozen {
            match integrate(psi, chart, &q, s, target, &opts) {
                Ok(rec) => {
                    total_events += rec.events.len();
                    for e in &rec.events {
                        if let Some(kind) = kink_kind(chart, e.curve, e.s) {
                            let sign = if e.side_from == Side::Left { 1 } else { -1 };
                            out.crossings.push((e.slot, kind, sign));
                        }
                    }
                    samples.extend(rec.samples);
                    termination = Some(rec.termination);
                    match rec.termination {
                        Termination::ReachedEnd => {}
                        Termination::EventLimit if cfg.dynamics == Dynamics::FrozenAfterKink => frozen = true,
                        _ => alive = false,
                    }
                    q = rec.q_end;
                    s = target;
                }
                Err(_) => {
                    termination = Some(Termination::StepFailure);
                    alive = false;
                }
            }
        }
        out.positions.push(alive.then(|| q.clone()));
        out.events_before.push(total_events);
    }
    out.termination = termination;
    if let (Some(time), true) = (cfg.non_leaf_time, alive) {
        out.surface = surface_crossing(chart, &samples, time);
    }
    out
}

fn height(chart: &ConfigurationChart<'_>, s: f64, x: f64) -> Option<f64> {
    let f = chart.foliation();
    f.height(s, x, Side::Smooth).or_else(|_| f.height(s, x, Side::Left)).ok()
}

/// Positions where the particle world lines meet the flat surface `t = time`.
fn surface_crossing(chart: &ConfigurationChart<'_>, samples: &[TrajectorySample], time: f64) -> Option<Vec<f64>> {
    let n = chart.particles();
    (0..n)
        .map(|j| {
            let k = samples
                .iter()
                .position(|p| height(chart, p.s, p.q[j]).is_some_and(|t| t >= time))?;
            if k == 0 {
                return None;
            }
            let (a, b) = (&samples[k - 1], &samples[k]);
            let hs = b.s - a.s;
            let at = |s: f64| -> f64 {
                let u = (s - a.s) / hs;
                if b.event {
                    return a.q[j] + u * (b.q[j] - a.q[j]);
                }
                let (h00, h10) = (2.0 * u.powi(3) - 3.0 * u * u + 1.0, u.powi(3) - 2.0 * u * u + u);
                let (h01, h11) = (-2.0 * u.powi(3) + 3.0 * u * u, u.powi(3) - u * u);
                h00 * a.q[j] + h10 * hs * a.velocity[j] + h01 * b.q[j] + h11 * hs * b.velocity[j]
            };
            let (mut lo, mut hi) = (a.s, b.s);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if height(chart, mid, at(mid))? >= time {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(at(0.5 * (lo + hi)))
        })
        .collect()
}

/// Largest `|dq/ds|` allowed by the leaves over the box, with a 5% margin.
fn estimate_chart_speed(chart: &ConfigurationChart<'_>, s0: f64, s1: f64, axes: &[(f64, f64)]) -> f64 {
    let f = chart.foliation();
    let mut best = 0.0_f64;
    for i in 0..=32 {
        let s = s0 + (s1 - s0) * i as f64 / 32.0;
        for &(lo, hi) in axes {
            for k in 0..=64 {
                let x = lo + (hi - lo) * k as f64 / 64.0;
                for side in [Side::Left, Side::Right] {
                    if let (Ok(l), Ok(a)) = (f.lapse(s, x, side), f.slope(s, x, side)) {
                        best = best.max(l.abs() / (1.0 - a.abs()));
                    }
                }
            }
        }
    }
    1.05 * best
}

fn theory_cells<P: SpinorField<1> + Sync + ?Sized>(
    quad: &LeafQuadrature<'_, '_, P>,
    s: f64,
    domain: &Domain,
    hist: &Histogram,
    norm: f64,
) -> Result<Vec<f64>, GuidanceError> {
    (0..hist.cells())
        .into_par_iter()
        .map(|c| {
            let axes = hist.bounds(c);
            quad.box_mass(s, domain, &axes, 1).map(|m| m / norm)
        })
        .collect()
}

/// Mean signed crossing count predicted by the flux of the chart current through
/// the kink curves of each kind, for each particle and side.
fn tube_expectations<P: SpinorField<1> + Sync + ?Sized>(
    quad: &LeafQuadrature<'_, '_, P>,
    cfg: &EquivarianceConfig,
    norm: f64,
) -> Result<BTreeMap<(usize, KinkKind), [f64; 2]>, GuidanceError> {
    let chart = quad.chart();
    let f = chart.foliation();
    let n = chart.particles();
    let s1 = cfg.targets.iter().copied().fold(cfg.s0, f64::max);
    let s_nodes = quad.axis_nodes(cfg.s0, s1, &[], 12);
    let axes = cfg.domain.axes(n);
    let per_node: Vec<BTreeMap<(usize, KinkKind), [f64; 2]>> = s_nodes
        .par_iter()
        .map(|&(s, ws)| {
            let mut acc: BTreeMap<(usize, KinkKind), [f64; 2]> = BTreeMap::new();
            let mut kinks: Vec<(f64, usize)> = (0..f.kink_curve_count())
                .filter_map(|c| f.kink_position(c, s).map(|x| (cfg.domain.wrap(&[x])[0], c)))
                .collect();
            kinks.sort_by(|a, b| a.0.total_cmp(&b.0));
            kinks.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-9);
            let breaks: Vec<Vec<(f64, f64)>> = axes
                .iter()
                .map(|&(lo, hi)| quad.axis_nodes(lo, hi, &quad.kink_breaks(s, &cfg.domain, lo, hi), 16))
                .collect();
            for slot in 0..n {
                for &(xk, curve) in &kinks {
                    let Some(kind) = kink_kind(chart, curve, s) else { continue };
                    let vk = f.kink_velocity(curve, s).unwrap_or(0.0);
                    let others: Vec<Vec<(f64, f64)>> =
                        (0..n).map(|k| if k == slot { vec![(xk, 1.0)] } else { breaks[k].clone() }).collect();
                    let entry = acc.entry((slot, kind)).or_insert([0.0; 2]);
                    for (i, side) in [Side::Left, Side::Right].into_iter().enumerate() {
                        let mut sides = vec![Side::Smooth; n];
                        sides[slot] = side;
                        let flux = tensor_sum(&others, |q| {
                            let j = quad.current(s, q, Some(&sides))?;
                            Ok::<f64, GuidanceError>(j.jvec[slot] - vk * j.j0)
                        })?;
                        entry[i] += ws * flux / norm;
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, GuidanceError>>()?;
    let mut total: BTreeMap<(usize, KinkKind), [f64; 2]> = BTreeMap::new();
    for m in per_node {
        for (k, v) in m {
            let e = total.entry(k).or_insert([0.0; 2]);
            e[0] += v[0];
            e[1] += v[1];
        }
    }
    Ok(total)
}

fn flat_density<P: SpinorField<1> + ?Sized>(psi: &P, time: f64, q: &[f64]) -> Result<f64, GuidanceError> {
    let points: Vec<MinkowskiPoint<1>> = q.iter().map(|&x| MinkowskiPoint::new(time, [x])).collect();
    Ok(current_tensor(psi, &points)?.density())
}

fn compare(
    counts: &[usize],
    outside: usize,
    aborted: usize,
    m: usize,
    theory: &[f64],
) -> (f64, f64, f64, super::ChiSquare) {
    let mf = m as f64;
    let theory_mass: f64 = theory.iter().sum();
    let outside_theory = (1.0 - theory_mass).max(0.0);
    let mut p: Vec<f64> = counts.iter().map(|&c| c as f64 / mf).collect();
    p.push(outside as f64 / mf);
    p.push(aborted as f64 / mf);
    let mut t = theory.to_vec();
    t.push(outside_theory);
    t.push(0.0);
    let tv = total_variation(&p, &t);
    let mut observed = counts.to_vec();
    observed.push(outside);
    let chi = chi_square(&observed, &t[..t.len() - 1], m - aborted);
    (tv, outside_theory, theory_mass, chi)
}

/// Samples the source leaf, transports the ensemble to every target leaf and
/// compares the arrival histograms with the quadrature of `j⁰` on each leaf.
pub fn run_equivariance<P: SpinorField<1> + Sync + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    cfg: &EquivarianceConfig,
) -> Result<EnsembleRun, EquivarianceError> {
    let n = chart.particles();
    cfg.domain.validate(n)?;
    if cfg.bins_per_axis == 0 {
        return Err(EquivarianceError::NoBins);
    }
    for &t in &cfg.targets {
        if !(t > cfg.s0) {
            return Err(EquivarianceError::TargetBeforeSource {
                target: t,
                source_leaf: cfg.s0,
            });
        }
    }
    let initial = sample_initial(psi, chart, cfg.s0, &cfg.domain, cfg.samples, cfg.seed, &cfg.sampling)?;
    let m = initial.points.len();
    let outcomes: Vec<Outcome> = initial.points.par_iter().map(|q0| transport(psi, chart, cfg, q0)).collect();

    let quad = LeafQuadrature::new(psi, chart);
    let norm = initial.mass;
    let s_last = cfg.targets.iter().copied().fold(cfg.s0, f64::max);
    let speed = match (&cfg.domain, cfg.chart_speed_bound) {
        (Domain::Torus { .. }, _) => 0.0,
        (_, Some(v)) => v,
        (d, None) => estimate_chart_speed(chart, cfg.s0, s_last, &d.axes(n)),
    };

    let mut leaves = Vec::with_capacity(cfg.targets.len());
    for (i, &s) in cfg.targets.iter().enumerate() {
        let window = cfg.domain.shrink(speed * (s - cfg.s0))?;
        let hist = Histogram {
            axes: window.axes(n),
            bins: cfg.bins_per_axis,
        };
        let mut counts = vec![0usize; hist.cells()];
        let (mut outside, mut aborted, mut crossed) = (0, 0, 0);
        for o in &outcomes {
            if o.events_before[i] > 0 {
                crossed += 1;
            }
            match &o.positions[i] {
                None => aborted += 1,
                Some(q) => match hist.cell_of(&cfg.domain.wrap(q)) {
                    Some(c) => counts[c] += 1,
                    None => outside += 1,
                },
            }
        }
        let theory = theory_cells(&quad, s, &cfg.domain, &hist, norm)?;
        let mf = m.max(1) as f64;
        let (tv, outside_theory, theory_mass, chi) = if m == 0 {
            (0.0, 0.0, theory.iter().sum(), chi_square(&[], &[], 0))
        } else {
            compare(&counts, outside, aborted, m, &theory)
        };
        let cells = (0..hist.cells())
            .map(|c| {
                let b = hist.bounds(c);
                CellRecord {
                    lower: b.iter().map(|x| x.0).collect(),
                    upper: b.iter().map(|x| x.1).collect(),
                    empirical: counts[c] as f64 / mf,
                    theory: theory[c],
                }
            })
            .collect();
        leaves.push(LeafReport {
            s,
            tv,
            bound: 3.0 * ((hist.cells() + 1) as f64 / mf).sqrt(),
            chi2: chi.statistic,
            dof: chi.dof,
            p: chi.p_value,
            aborted_fraction: aborted as f64 / mf,
            crossed_fraction: crossed as f64 / mf,
            outside_empirical: outside as f64 / mf,
            outside_theory,
            theory_mass,
            window,
            cells,
        });
    }

    let tube = if cfg.tube_check && cfg.domain.is_periodic() && cfg.dynamics == Dynamics::Guided && m > 0 {
        let expected = tube_expectations(&quad, cfg, norm)?;
        let reports = expected
            .into_iter()
            .map(|((slot, kind), [left, right])| {
                let per: Vec<f64> = outcomes
                    .iter()
                    .map(|o| {
                        o.crossings
                            .iter()
                            .filter(|c| c.0 == slot && c.1 == kind)
                            .map(|c| c.2 as f64)
                            .sum()
                    })
                    .collect();
                let crossings = outcomes
                    .iter()
                    .map(|o| o.crossings.iter().filter(|c| c.0 == slot && c.1 == kind).count())
                    .sum();
                let mean = per.iter().sum::<f64>() / m as f64;
                let var = per.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m.max(2) - 1) as f64;
                TubeReport {
                    slot,
                    kind,
                    observed: mean,
                    sigma: (var / m as f64).sqrt(),
                    expected_left: left,
                    expected_right: right,
                    crossings,
                }
            })
            .collect();
        Some(reports)
    } else {
        None
    };

    let non_leaf = match (cfg.non_leaf_time, &cfg.domain) {
        (Some(time), Domain::Torus { .. }) if m > 0 => {
            let hist = Histogram {
                axes: cfg.domain.axes(n),
                bins: cfg.bins_per_axis,
            };
            let mut counts = vec![0usize; hist.cells()];
            let mut missed = 0;
            for o in &outcomes {
                match o.surface.as_ref().and_then(|q| hist.cell_of(&cfg.domain.wrap(q))) {
                    Some(c) => counts[c] += 1,
                    None => missed += 1,
                }
            }
            let total = tensor_sum(
                &hist.axes.iter().map(|&(lo, hi)| quad.axis_nodes(lo, hi, &[], 16)).collect::<Vec<_>>(),
                |q| flat_density(psi, time, q),
            )?;
            let theory: Vec<f64> = (0..hist.cells())
                .into_par_iter()
                .map(|c| {
                    let axes: Vec<Vec<(f64, f64)>> =
                        hist.bounds(c).iter().map(|&(lo, hi)| quad.axis_nodes(lo, hi, &[], 2)).collect();
                    tensor_sum(&axes, |q| flat_density(psi, time, q)).map(|v| v / total)
                })
                .collect::<Result<_, GuidanceError>>()?;
            let (tv, _, _, chi) = compare(&counts, 0, missed, m, &theory);
            let mf = m as f64;
            Some(NonLeafReport {
                time,
                tv,
                bound: 3.0 * ((hist.cells() + 1) as f64 / mf).sqrt(),
                chi2: chi.statistic,
                dof: chi.dof,
                p: chi.p_value,
                missed_fraction: missed as f64 / mf,
                mass_ratio: total / norm,
                cells: (0..hist.cells())
                    .map(|c| {
                        let b = hist.bounds(c);
                        CellRecord {
                            lower: b.iter().map(|x| x.0).collect(),
                            upper: b.iter().map(|x| x.1).collect(),
                            empirical: counts[c] as f64 / mf,
                            theory: theory[c],
                        }
                    })
                    .collect(),
            })
        }
        _ => None,
    };

    let mut terminations = BTreeMap::new();
    for o in &outcomes {
        if let Some(t) = o.termination {
            *terminations.entry(t.as_str().to_string()).or_insert(0) += 1;
        }
    }
    let crossing_fraction = if m == 0 {
        0.0
    } else {
        outcomes.iter().filter(|o| o.events_before.last().is_some_and(|&e| e > 0)).count() as f64 / m as f64
    };
    Ok(EnsembleRun {
        seed: cfg.seed,
        samples: m,
        s0: cfg.s0,
        targets: cfg.targets.clone(),
        domain: cfg.domain.clone(),
        bins_per_axis: cfg.bins_per_axis,
        dynamics: cfg.dynamics,
        envelope: initial.envelope,
        envelope_rebuilds: initial.rebuilds,
        source_mass: initial.mass,
        window_fraction: initial.window_fraction,
        crossing_fraction,
        events: outcomes.iter().map(|o| o.events_before.last().copied().unwrap_or(0)).sum(),
        terminations,
        leaves,
        tube,
        non_leaf,
    })
}
