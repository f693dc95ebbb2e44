//! Foliations whose leaves are level sets of the Lorentzian time separation
//! from an initial surface (constant lapse, the "dn = 0" law).
//!
//! The time separation of `p` from `Σ0` is the supremum of the proper time
//! `√((t − f0(u))² − (x − u)²)` over causally related surface points `u`.
//! The supremum is found by seeding a grid over the causal window and
//! refining every seeded local maximum, because at kinks two maxima tie.

use rayon::prelude::*;

use super::{Branch, Foliation, GeometryError, LeafWithKinks, MinkowskiPoint, KINK_CAPTURE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dn0Options {
    /// Seeds for the global distance maximization.
    pub seeds: usize,
    /// Bisection tolerance in `t` (and in distance) for leaf heights.
    pub tol: f64,
    /// A maximizer jump larger than this many grid cells flags a kink.
    pub kink_jump_cells: f64,
}

impl Default for Dn0Options {
    fn default() -> Self {
        Self {
            seeds: 2048,
            tol: 1e-10,
            kink_jump_cells: 4.0,
        }
    }
}

/// Time separation of a point from the initial surface with the maximizing
/// surface abscissa ("foot").
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceDistance {
    pub tau: f64,
    pub foot: f64,
}

/// Time separation from `surface` to `p` with the default seeding.
pub fn lorentzian_distance_to_surface(
    surface: &LeafWithKinks,
    p: &MinkowskiPoint<1>,
) -> Result<f64, GeometryError> {
    Ok(surface_distance(surface, p, Dn0Options::default().seeds)?.tau)
}

pub fn surface_distance(
    surface: &LeafWithKinks,
    p: &MinkowskiPoint<1>,
    seeds: usize,
) -> Result<SurfaceDistance, GeometryError> {
    let (t, x) = (p.t, p.x[0]);
    let rise = t - surface.height(x);
    if !(rise > 0.0) {
        return Err(GeometryError::NotInFuture { t, x });
    }
    // causal past of p meets the surface within |u - x| <= rise / (1 - max|f0'|)
    let radius = rise / (1.0 - surface.max_abs_slope());
    let tau2 = |u: f64| {
        let dt = t - surface.height(u);
        if dt <= 0.0 {
            f64::NEG_INFINITY
        } else {
            dt * dt - (x - u) * (x - u)
        }
    };

    let n = seeds.max(3);
    let mut nodes: Vec<f64> = (0..n)
        .map(|i| x - radius + 2.0 * radius * i as f64 / (n - 1) as f64)
        .collect();
    nodes.push(x);
    nodes.extend(surface.kink_loci().iter().filter(|k| (*k - x).abs() < radius));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let vals: Vec<f64> = nodes.iter().map(|&u| tau2(u)).collect();

    let mut best = SurfaceDistance {
        tau: f64::NEG_INFINITY,
        foot: x,
    };
    let mut consider = |u: f64, v: f64| {
        if v > best.tau {
            best = SurfaceDistance { tau: v, foot: u };
        }
    };
    for i in 0..nodes.len() {
        let v = vals[i];
        let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
        let right = vals.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if !(v.is_finite() && v >= left && v >= right) {
            continue;
        }
        consider(nodes[i], v);
        let lo = nodes[i.saturating_sub(1)];
        let hi = nodes[(i + 1).min(nodes.len() - 1)];
        let u = golden_section_max(&tau2, lo, hi);
        consider(u, tau2(u));
    }
    if !(best.tau >= 0.0) {
        return Err(GeometryError::NotInFuture { t, x });
    }
    best.tau = best.tau.sqrt();
    Ok(best)
}

fn golden_section_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// A point of a dn = 0 leaf with its maximizing foot on the initial surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafPoint {
    pub t: f64,
    pub tau: f64,
    pub foot: f64,
}

/// One sample of a kink curve, with the feet that realize the two one-sided
/// limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkSample {
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub foot_left: f64,
    pub foot_right: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KinkTrack {
    pub samples: Vec<KinkSample>,
}

impl KinkTrack {
    fn interpolate(&self, s: f64) -> Option<f64> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if self.samples.len() == 1 {
            return (s == first.s).then_some(first.x);
        }
        if s < first.s || s > last.s {
            return None;
        }
        let i = self
            .samples
            .windows(2)
            .position(|w| s <= w[1].s)
            .unwrap_or(self.samples.len() - 2);
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        Some(a.x + (b.x - a.x) * (s - a.s) / (b.s - a.s))
    }

    fn velocity(&self, s: f64) -> Option<f64> {
        if self.samples.len() < 2 {
            return None;
        }
        let (first, last) = (self.samples[0], self.samples[self.samples.len() - 1]);
        if s < first.s || s > last.s {
            return None;
        }
        let i = self
            .samples
            .windows(2)
            .position(|w| s <= w[1].s)
            .unwrap_or(self.samples.len() - 2);
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        Some((b.x - a.x) / (b.s - a.s))
    }
}

/// A dn = 0 foliation built from an initial surface. Leaves are evaluated on
/// demand by solving `τ(t, x) = s`; the tabulated grid and detected kink
/// curves are kept for export and for locating kinks at arbitrary labels.
#[derive(Debug, Clone)]
pub struct Dn0Foliation {
    initial: LeafWithKinks,
    options: Dn0Options,
    s_grid: Vec<f64>,
    x_grid: Vec<f64>,
    table: Vec<Vec<LeafPoint>>,
    tracks: Vec<KinkTrack>,
}

/// Builds the dn = 0 foliation of `initial` on the given grids.
pub fn build_dn0_foliation(
    initial: &LeafWithKinks,
    s_grid: &[f64],
    x_grid: &[f64],
    tol: f64,
) -> Result<Dn0Foliation, GeometryError> {
    Dn0Foliation::build(
        initial,
        s_grid,
        x_grid,
        Dn0Options {
            tol,
            ..Dn0Options::default()
        },
    )
}

impl Dn0Foliation {
    pub fn build(
        initial: &LeafWithKinks,
        s_grid: &[f64],
        x_grid: &[f64],
        options: Dn0Options,
    ) -> Result<Self, GeometryError> {
        if s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 0.0)) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::InvalidGrid("leaf labels must be positive and increasing".into()));
        }
        if x_grid.len() < 2 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::InvalidGrid("x grid must be increasing".into()));
        }
        let mut fol = Self {
            initial: initial.clone(),
            options,
            s_grid: s_grid.to_vec(),
            x_grid: x_grid.to_vec(),
            table: Vec::with_capacity(s_grid.len()),
            tracks: Vec::new(),
        };
        let margin = initial.margin();
        let mut kinks_per_leaf = Vec::with_capacity(s_grid.len());
        for &s in s_grid {
            let row: Vec<LeafPoint> = x_grid
                .par_iter()
                .map(|&x| fol.solve(s, x))
                .collect::<Result<_, _>>()?;
            for (p, &x) in row.iter().zip(x_grid) {
                let slope = (x - p.foot) / (p.t - initial.height(p.foot));
                if slope.abs() > 1.0 - margin {
                    return Err(GeometryError::SpacelikeViolation { slope, margin });
                }
            }
            let flagged: Vec<usize> = (0..x_grid.len() - 1)
                .filter(|&i| {
                    let cell = x_grid[i + 1] - x_grid[i];
                    (row[i + 1].foot - row[i].foot).abs() > options.kink_jump_cells * cell
                })
                .collect();
            let kinks = flagged
                .par_iter()
                .map(|&i| fol.refine_kink(s, (x_grid[i], row[i]), (x_grid[i + 1], row[i + 1])))
                .collect::<Result<Vec<_>, _>>()?;
            kinks_per_leaf.push(kinks);
            fol.table.push(row);
        }
        fol.tracks = link_tracks(&kinks_per_leaf, &fol.s_grid, &fol.x_grid);
        Ok(fol)
    }

    pub fn initial(&self) -> &LeafWithKinks {
        &self.initial
    }

    pub fn options(&self) -> Dn0Options {
        self.options
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    /// Tabulated leaf points, indexed `[s][x]`.
    pub fn table(&self) -> &[Vec<LeafPoint>] {
        &self.table
    }

    pub fn kink_tracks(&self) -> &[KinkTrack] {
        &self.tracks
    }

    /// Solves `τ(t, x) = s` for `t` by bisection.
    pub fn solve(&self, s: f64, x: f64) -> Result<LeafPoint, GeometryError> {
        let f0 = self.initial.height(x);
        let tol = self.options.tol;
        let dist = |t: f64| surface_distance(&self.initial, &MinkowskiPoint::new(t, [x]), self.options.seeds);
        // τ(f0 + s, x) >= s along the vertical geodesic, and τ -> 0 as t -> f0
        let (mut lo, mut hi) = (f0, f0 + s);
        let top = dist(hi)?;
        if top.tau < s - tol {
            return Err(GeometryError::BisectionFailure {
                what: "leaf height",
                lo,
                hi,
            });
        }
        let mut best = LeafPoint {
            t: hi,
            tau: top.tau,
            foot: top.foot,
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let d = if mid > f0 {
                dist(mid)?
            } else {
                SurfaceDistance { tau: 0.0, foot: x }
            };
            best = LeafPoint {
                t: mid,
                tau: d.tau,
                foot: d.foot,
            };
            if d.tau < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= tol && (d.tau - s).abs() <= 0.5 * tol {
                break;
            }
            if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok(best)
    }

    fn refine_kink(
        &self,
        s: f64,
        (mut xl, mut pl): (f64, LeafPoint),
        (mut xr, mut pr): (f64, LeafPoint),
    ) -> Result<KinkSample, GeometryError> {
        while xr - xl > self.options.tol {
            let xm = 0.5 * (xl + xr);
            let pm = self.solve(s, xm)?;
            if (pm.foot - pl.foot).abs() <= (pm.foot - pr.foot).abs() {
                xl = xm;
                pl = pm;
            } else {
                xr = xm;
                pr = pm;
            }
        }
        let x = 0.5 * (xl + xr);
        Ok(KinkSample {
            s,
            x,
            t: 0.5 * (pl.t + pr.t),
            foot_left: pl.foot,
            foot_right: pr.foot,
        })
    }

    fn slope_from(&self, x: f64, p: &LeafPoint) -> f64 {
        (x - p.foot) / (p.t - self.initial.height(p.foot))
    }

    fn lapse_from(&self, p: &LeafPoint) -> f64 {
        p.tau / (p.t - self.initial.height(p.foot))
    }

    /// Evaluation abscissa for a branch: one-sided branches are sampled just
    /// outside the capture band on their own side.
    fn probe(&self, x: f64, branch: Branch) -> f64 {
        match branch {
            Branch::Interior => x,
            Branch::LeftOf(k) => x.min(k - 2.0 * KINK_CAPTURE),
            Branch::RightOf(k) => x.max(k + 2.0 * KINK_CAPTURE),
        }
    }
}

fn link_tracks(kinks_per_leaf: &[Vec<KinkSample>], s_grid: &[f64], x_grid: &[f64]) -> Vec<KinkTrack> {
    let span = x_grid[x_grid.len() - 1] - x_grid[0];
    let cell = span / (x_grid.len() - 1) as f64;
    let mut tracks: Vec<KinkTrack> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for (si, kinks) in kinks_per_leaf.iter().enumerate() {
        let ds = if si > 0 { s_grid[si] - s_grid[si - 1] } else { 0.0 };
        let reach = 10.0 * cell + 2.0 * ds;
        let mut next_open = Vec::new();
        let mut taken = vec![false; open.len()];
        for k in kinks {
            let matched = open
                .iter()
                .enumerate()
                .filter(|(j, _)| !taken[*j])
                .map(|(j, &ti)| (j, ti, (tracks[ti].samples.last().unwrap().x - k.x).abs()))
                .filter(|(_, _, d)| *d <= reach)
                .min_by(|a, b| a.2.total_cmp(&b.2));
            let ti = match matched {
                Some((j, ti, _)) => {
                    taken[j] = true;
                    ti
                }
                None => {
                    tracks.push(KinkTrack::default());
                    tracks.len() - 1
                }
            };
            tracks[ti].samples.push(*k);
            next_open.push(ti);
        }
        open = next_open;
    }
    tracks
}

impl Foliation for Dn0Foliation {
    fn spacelike_margin(&self) -> f64 {
        self.initial.margin()
    }

    fn label_range(&self) -> (f64, f64) {
        (self.s_grid[0], self.s_grid[self.s_grid.len() - 1])
    }

    fn kink_curve_count(&self) -> usize {
        self.tracks.len()
    }

    fn kink_position(&self, curve: usize, s: f64) -> Option<f64> {
        self.tracks.get(curve)?.interpolate(s)
    }

    fn kink_velocity(&self, curve: usize, s: f64) -> Option<f64> {
        self.tracks.get(curve)?.velocity(s)
    }

    fn height_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        let xp = self.probe(x, branch);
        let p = self.solve(s, xp)?;
        Ok(p.t + self.slope_from(xp, &p) * (x - xp))
    }

    fn slope_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        let xp = self.probe(x, branch);
        let p = self.solve(s, xp)?;
        Ok(self.slope_from(xp, &p))
    }

    fn lapse_on(&self, s: f64, x: f64, branch: Branch) -> Result<f64, GeometryError> {
        let xp = self.probe(x, branch);
        let p = self.solve(s, xp)?;
        Ok(self.lapse_from(&p))
    }
}
