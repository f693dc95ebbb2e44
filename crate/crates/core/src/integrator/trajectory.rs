use serde::{Deserialize, Serialize};

use super::dopri;
use super::IntegratorError;
use crate::geometry::{Branch, MinkowskiPoint, Side, KINK_CAPTURE, KINK_TOL};
use crate::guidance::{chart_current, guidance_velocity, ConfigurationChart, GuidanceError, KinkChartSet, KinkPiece};
use crate::wavefunction::SpinorField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Width in `s` to which kink crossings are located.
    pub event_tol: f64,
    /// Distance at which a second slot on a kink makes a corner.
    pub corner_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Keep every accepted step in the record, not only the end point.
    pub record_samples: bool,
    /// Stop after this many kink crossings.
    pub max_events: Option<usize>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-9,
            event_tol: 1e-11,
            corner_tol: 1e-9,
            initial_step: 1e-2,
            max_step: 0.25,
            max_steps: 200_000,
            record_samples: true,
            max_events: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedEnd,
    NullCurrent,
    CornerPoint,
    StepFailure,
    /// Both one-sided fluxes vanish at a crossing.
    NullFlux,
    /// The one-sided fluxes at a crossing have opposite signs.
    NoContinuation,
    /// The configured number of kink crossings was reached.
    EventLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached-end",
            Termination::NullCurrent => "null-current",
            Termination::CornerPoint => "corner-point",
            Termination::StepFailure => "step-failure",
            Termination::NullFlux => "null-flux",
            Termination::NoContinuation => "no-continuation",
            Termination::EventLimit => "event-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub s: f64,
    pub q: Vec<f64>,
    /// Chart velocity `dq/ds` (after the event for event samples).
    pub velocity: Vec<f64>,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinkCrossing {
    pub s: f64,
    pub slot: usize,
    pub curve: usize,
    pub side_from: Side,
    pub side_to: Side,
    pub q: Vec<f64>,
    pub chart_velocity_before: Vec<f64>,
    pub chart_velocity_after: Vec<f64>,
    /// `dx_j/dt` of every particle with the pre-crossing side.
    pub spacetime_velocity_before: Vec<f64>,
    pub spacetime_velocity_after: Vec<f64>,
    pub flux_left: f64,
    pub flux_right: f64,
}

impl KinkCrossing {
    pub fn chart_jumps(&self) -> Vec<f64> {
        diff(&self.chart_velocity_before, &self.chart_velocity_after)
    }

    pub fn spacetime_jumps(&self) -> Vec<f64> {
        diff(&self.spacetime_velocity_before, &self.spacetime_velocity_after)
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<KinkCrossing>,
    pub termination: Termination,
    pub s_end: f64,
    pub q_end: Vec<f64>,
    pub steps: usize,
    pub diagnostic: Option<String>,
}

impl TrajectoryRecord {
    pub fn completed(&self) -> bool {
        self.termination == Termination::ReachedEnd
    }

    /// World lines of the particles, one point per sample.
    pub fn world_lines(&self, chart: &ConfigurationChart<'_>) -> Result<Vec<Vec<MinkowskiPoint<1>>>, IntegratorError> {
        let f = chart.foliation();
        let mut lines = vec![Vec::with_capacity(self.samples.len()); chart.particles()];
        for sample in &self.samples {
            for (line, &x) in lines.iter_mut().zip(&sample.q) {
                let t = f.height_on(sample.s, x, Branch::Interior).map_err(GuidanceError::from)?;
                line.push(MinkowskiPoint::new(t, [x]));
            }
        }
        Ok(lines)
    }
}

struct Tracker<'c, 'f> {
    set: KinkChartSet<'c, 'f>,
    pieces: Vec<KinkPiece>,
    /// Side of each piece the trajectory is on, once the curve exists.
    sigma: Vec<Option<f64>>,
}

impl Tracker<'_, '_> {
    fn sides(&self, s: f64, q: &[f64]) -> Vec<Side> {
        let mut sides = vec![Side::Smooth; q.len()];
        for (p, sg) in self.pieces.iter().zip(&self.sigma) {
            if let (Some(g), Some(sg)) = (self.set.offset(*p, s, q), sg) {
                if g.abs() <= KINK_CAPTURE {
                    sides[p.slot] = if *sg < 0.0 { Side::Left } else { Side::Right };
                }
            }
        }
        sides
    }

    fn refresh(&mut self, s: f64, q: &[f64]) {
        for (p, sg) in self.pieces.iter().zip(self.sigma.iter_mut()) {
            match self.set.offset(*p, s, q) {
                Some(g) if sg.is_none() && g != 0.0 => *sg = Some(g.signum()),
                None => *sg = None,
                _ => {}
            }
        }
    }

    /// Pieces whose offset at `(s, q)` has left the tracked side.
    fn crossed(&self, s: f64, q: &[f64]) -> Vec<usize> {
        (0..self.pieces.len())
            .filter(|&i| match (self.set.offset(self.pieces[i], s, q), self.sigma[i]) {
                (Some(g), Some(sg)) => g != 0.0 && g.signum() != sg,
                _ => false,
            })
            .collect()
    }
}

enum Stop {
    Terminate(Termination, String),
}

fn classify(e: GuidanceError) -> Stop {
    match e {
        GuidanceError::NullCurrent { .. } => Stop::Terminate(Termination::NullCurrent, e.to_string()),
        other => Stop::Terminate(Termination::StepFailure, other.to_string()),
    }
}

/// Integrates the chart trajectory `dq/ds = ĵ/j⁰` from `(s0, q0)` to `s1`,
/// continuing across kink hypersurfaces. `s1 < s0` integrates backwards.
pub fn integrate<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    q0: &[f64],
    s0: f64,
    s1: f64,
    opts: &IntegratorOptions,
) -> Result<TrajectoryRecord, IntegratorError> {
    if q0.len() != chart.particles() {
        return Err(GuidanceError::ParticleCount {
            expected: chart.particles(),
            found: q0.len(),
        }
        .into());
    }
    let set = KinkChartSet::new(chart);
    let pieces = set.pieces();
    for p in &pieces {
        if let Some(g) = set.offset(*p, s0, q0) {
            let xk = q0[p.slot] - g;
            if g.abs() <= KINK_TOL * xk.abs().max(1.0) {
                return Err(IntegratorError::StartsOnKink { slot: p.slot, s: s0 });
            }
        }
    }
    let mut tr = Tracker {
        set,
        sigma: vec![None; pieces.len()],
        pieces,
    };
    tr.refresh(s0, q0);
    let start = chart_current(psi, chart, s0, q0, &tr.sides(s0, q0))?;
    if !(start.j0 > 0.0) {
        return Err(IntegratorError::ZeroDensity { s: s0 });
    }

    let dir = if s1 >= s0 { 1.0 } else { -1.0 };
    let mut s = s0;
    let mut q = q0.to_vec();
    let mut samples = Vec::new();
    let mut events = Vec::new();
    if opts.record_samples {
        samples.push(TrajectorySample {
            s,
            q: q.clone(),
            velocity: start.velocity()?,
            event: false,
        });
    }
    let mut h = opts.initial_step.min(opts.max_step).min((s1 - s0).abs());
    let mut steps = 0;

    let outcome: Result<(), Stop> = (|| {
        loop {
            let remaining = (s1 - s) * dir;
            if remaining <= 1e-14 * (1.0 + s1.abs()) {
                return Ok(());
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Stop::Terminate(Termination::StepFailure, "step budget exhausted".into()));
            }
            let mut rhs = |ss: f64, y: &[f64]| -> Result<Vec<f64>, GuidanceError> {
                chart_current(psi, chart, ss, y, &tr.sides(ss, y))?.velocity()
            };
            let w = rhs(s, &q).map_err(classify)?;
            let mut h_abs = h.min(remaining).min(opts.max_step);
            for (p, sg) in tr.pieces.iter().zip(&tr.sigma) {
                let (Some(sg), Some(g), Some(vk)) = (
                    *sg,
                    tr.set.offset(*p, s, &q),
                    chart.foliation().kink_velocity(p.curve, s),
                ) else {
                    continue;
                };
                let rate = w[p.slot] - vk;
                if rate * dir * sg < 0.0 {
                    let limit = (0.5 * g.abs()).max(0.05 * KINK_CAPTURE) / rate.abs();
                    h_abs = h_abs.min(limit);
                }
            }
            if h_abs < 1e-15 * (1.0 + s.abs()) {
                return Err(Stop::Terminate(Termination::StepFailure, format!("step size underflow at s = {s}")));
            }
            let trial = dopri::step(&mut rhs, s, &q, dir * h_abs, opts.atol, opts.rtol).map_err(classify)?;
            if !trial.error.is_finite() || trial.y.iter().any(|v| !v.is_finite()) {
                h = 0.25 * h_abs;
                continue;
            }
            if trial.error > 1.0 {
                h = h_abs * dopri::growth(trial.error);
                continue;
            }
            let s_new = s + dir * h_abs;
            if tr.crossed(s_new, &trial.y).is_empty() {
                s = s_new;
                q = trial.y;
                tr.refresh(s, &q);
                if opts.record_samples {
                    samples.push(TrajectorySample {
                        s,
                        q: q.clone(),
                        velocity: rhs_velocity(psi, chart, &tr, s, &q).map_err(classify)?,
                        event: false,
                    });
                }
                h = h_abs * dopri::growth(trial.error);
                continue;
            }

            // locate the first crossing by bisection on the step length
            let (mut lo, mut hi) = (0.0, h_abs);
            let mut q_hi = trial.y;
            while hi - lo > opts.event_tol {
                let mid = 0.5 * (lo + hi);
                let probe = dopri::step(&mut rhs, s, &q, dir * mid, opts.atol, opts.rtol).map_err(classify)?;
                if tr.crossed(s + dir * mid, &probe.y).is_empty() {
                    lo = mid;
                } else {
                    hi = mid;
                    q_hi = probe.y;
                }
            }
            let s_e = s + dir * hi;
            let crossed = tr.crossed(s_e, &q_hi);
            s = s_e;
            q = q_hi;
            if crossed.len() > 1 {
                return Err(Stop::Terminate(Termination::CornerPoint, format!("simultaneous crossings at s = {s}")));
            }
            let idx = crossed[0];
            let piece = tr.pieces[idx];
            let corner = tr.pieces.iter().enumerate().any(|(i, p)| {
                i != idx && p.slot != piece.slot && tr.set.offset(*p, s, &q).is_some_and(|g| g.abs() <= opts.corner_tol)
            });
            if corner {
                return Err(Stop::Terminate(Termination::CornerPoint, format!("corner of the kink set at s = {s}")));
            }
            let event = cross(psi, chart, &mut tr, idx, s, &q, dir)?;
            if opts.record_samples {
                samples.push(TrajectorySample {
                    s,
                    q: q.clone(),
                    velocity: event.chart_velocity_after.clone(),
                    event: true,
                });
            }
            events.push(event);
            if opts.max_events.is_some_and(|m| events.len() >= m) {
                return Err(Stop::Terminate(Termination::EventLimit, format!("event limit reached at s = {s}")));
            }
        }
    })();

    let (termination, diagnostic) = match outcome {
        Ok(()) => (Termination::ReachedEnd, None),
        Err(Stop::Terminate(t, msg)) => (t, Some(msg)),
    };
    if opts.record_samples && samples.last().map(|l| l.s) != Some(s) {
        if let Ok(v) = rhs_velocity(psi, chart, &tr, s, &q) {
            samples.push(TrajectorySample {
                s,
                q: q.clone(),
                velocity: v,
                event: false,
            });
        }
    }
    Ok(TrajectoryRecord {
        samples,
        events,
        termination,
        s_end: s,
        q_end: q,
        steps,
        diagnostic,
    })
}

fn rhs_velocity<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    tr: &Tracker<'_, '_>,
    s: f64,
    q: &[f64],
) -> Result<Vec<f64>, GuidanceError> {
    chart_current(psi, chart, s, q, &tr.sides(s, q))?.velocity()
}

/// Applies the continuation rule for a crossing of piece `idx` at `(s, q)`.
fn cross<P: SpinorField<1> + ?Sized>(
    psi: &P,
    chart: &ConfigurationChart<'_>,
    tr: &mut Tracker<'_, '_>,
    idx: usize,
    s: f64,
    q: &[f64],
    dir: f64,
) -> Result<KinkCrossing, Stop> {
    let piece = tr.pieces[idx];
    let sigma_old = tr.sigma[idx].expect("crossed pieces are tracked");
    let side_of = |sg: f64| if sg < 0.0 { Side::Left } else { Side::Right };
    let mut before = tr.sides(s, q);
    before[piece.slot] = side_of(sigma_old);
    let mut after = before.clone();
    after[piece.slot] = side_of(-sigma_old);

    let vk = chart.foliation().kink_velocity(piece.curve, s).unwrap_or(0.0);
    let flux = |sides: &[Side]| -> Result<(f64, Vec<f64>), GuidanceError> {
        let j = chart_current(psi, chart, s, q, sides)?;
        let f = j.jvec[piece.slot] - vk * j.j0;
        Ok((f, j.velocity()?))
    };
    let mut left = before.clone();
    left[piece.slot] = Side::Left;
    let mut right = before.clone();
    right[piece.slot] = Side::Right;
    let (flux_left, _) = flux(&left).map_err(classify)?;
    let (flux_right, _) = flux(&right).map_err(classify)?;
    let scale = flux_left.abs().max(flux_right.abs());
    if scale <= 1e-14 {
        return Err(Stop::Terminate(Termination::NullFlux, format!("both fluxes vanish at s = {s}")));
    }
    if flux_left * flux_right <= 0.0 {
        return Err(Stop::Terminate(
            Termination::NoContinuation,
            format!("fluxes {flux_left:e} and {flux_right:e} differ in sign at s = {s}"),
        ));
    }
    // the trajectory must enter the new side moving along the integration direction
    if flux_left.signum() * dir != -sigma_old {
        return Err(Stop::Terminate(
            Termination::NoContinuation,
            format!("flux direction contradicts the crossing at s = {s}"),
        ));
    }
    let (_, chart_velocity_before) = flux(&before).map_err(classify)?;
    let (_, chart_velocity_after) = flux(&after).map_err(classify)?;
    let spacetime = |sides: &[Side]| -> Result<Vec<f64>, GuidanceError> {
        Ok(guidance_velocity(psi, chart, s, q, sides)?.iter().map(|v| v[1]).collect())
    };
    let spacetime_velocity_before = spacetime(&before).map_err(classify)?;
    let spacetime_velocity_after = spacetime(&after).map_err(classify)?;
    tr.sigma[idx] = Some(-sigma_old);
    Ok(KinkCrossing {
        s,
        slot: piece.slot,
        curve: piece.curve,
        side_from: side_of(sigma_old),
        side_to: side_of(-sigma_old),
        q: q.to_vec(),
        chart_velocity_before,
        chart_velocity_after,
        spacetime_velocity_before,
        spacetime_velocity_after,
        flux_left,
        flux_right,
    })
}
