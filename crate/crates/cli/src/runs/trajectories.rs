use hbdm_core::geometry::Foliation;
use hbdm_core::guidance::ConfigurationChart;
use hbdm_core::integrator::{integrate, TrajectoryRecord};
use hbdm_core::wavefunction::MultiTimeWaveFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{float, ArtifactWriter, Check};
use crate::scenario::SimulateRun;

#[derive(Serialize)]
struct TrajectorySummary {
    trajectory: usize,
    q0: Vec<f64>,
    termination: &'static str,
    s_end: f64,
    q_end: Vec<f64>,
    events: usize,
    steps: usize,
    diagnostic: Option<String>,
    /// `max_j |q_j(s0) − q0_j|` after integrating back, when requested.
    return_error: Option<f64>,
}

fn columns(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |j| format!("{prefix}_{j}"))
}

pub fn simulate(
    psi: &MultiTimeWaveFunction<1>,
    fol: &dyn Foliation,
    run: &SimulateRun,
    seed: u64,
    out: &mut ArtifactWriter,
) -> Result<Vec<Check>, CliError> {
    let n = psi.masses().len();
    let chart = ConfigurationChart::new(fol, n);
    let mut starts = run.starts.clone();
    if let Some(rs) = &run.random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        starts.extend((0..rs.count).map(|_| (0..n).map(|_| rng.random_range(rs.lower..rs.upper)).collect::<Vec<_>>()));
    }
    let results = starts
        .par_iter()
        .map(|q0| -> Result<(TrajectoryRecord, Option<TrajectoryRecord>), CliError> {
            let fwd = integrate(psi, &chart, q0, run.s0, run.s1, &run.integrator)?;
            let back = if run.reverse && fwd.completed() {
                Some(integrate(psi, &chart, &fwd.q_end, run.s1, run.s0, &run.integrator)?)
            } else {
                None
            };
            Ok((fwd, back))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let header: Vec<String> = ["trajectory".to_string(), "s".to_string()]
        .into_iter()
        .chain(columns("q", n))
        .chain(columns("v", n))
        .chain(["event_flag".to_string()])
        .collect();
    let rows = results.iter().enumerate().flat_map(|(i, (rec, _))| {
        rec.samples.iter().map(move |p| {
            [i.to_string(), float(p.s)]
                .into_iter()
                .chain(p.q.iter().map(|&x| float(x)))
                .chain(p.velocity.iter().map(|&x| float(x)))
                .chain([u8::from(p.event).to_string()])
                .collect::<Vec<_>>()
        })
    });
    out.csv("trajectories.csv", &header, rows)?;

    let header: Vec<String> = ["trajectory", "s", "slot"]
        .map(String::from)
        .into_iter()
        .chain(columns("dv", n))
        .collect();
    let rows = results.iter().enumerate().flat_map(|(i, (rec, _))| {
        rec.events.iter().map(move |e| {
            [i.to_string(), float(e.s), (e.slot + 1).to_string()]
                .into_iter()
                .chain(e.spacetime_jumps().into_iter().map(float))
                .collect::<Vec<_>>()
        })
    });
    out.csv("events.csv", &header, rows)?;

    let summary: Vec<TrajectorySummary> = results
        .iter()
        .zip(&starts)
        .enumerate()
        .map(|(i, ((rec, back), q0))| TrajectorySummary {
            trajectory: i,
            q0: q0.clone(),
            termination: rec.termination.as_str(),
            s_end: rec.s_end,
            q_end: rec.q_end.clone(),
            events: rec.events.len(),
            steps: rec.steps,
            diagnostic: rec.diagnostic.clone(),
            return_error: back.as_ref().map(|b| max_abs_diff(&b.q_end, q0)),
        })
        .collect();
    out.json("trajectories.json", &summary)?;

    Ok(trajectory_checks(run, &results, &starts))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn trajectory_checks(run: &SimulateRun, results: &[(TrajectoryRecord, Option<TrajectoryRecord>)], starts: &[Vec<f64>]) -> Vec<Check> {
    let total = results.len().max(1) as f64;
    let completed = results.iter().filter(|(r, _)| r.completed()).count();
    let mut checks = vec![Check::at_least(
        "completed",
        completed as f64 / total,
        1.0,
        format!("{completed} of {} trajectories reached s1", results.len()),
    )];
    let events: Vec<_> = results.iter().flat_map(|(r, _)| &r.events).collect();
    let crossed = results.iter().filter(|(r, _)| !r.events.is_empty()).count();
    checks.push(
        Check::at_least("crossing-fraction", crossed as f64 / total, 0.0, format!("{} crossings", events.len()))
            .report_only(),
    );
    if !events.is_empty() {
        let own = events.iter().map(|e| e.spacetime_jumps()[e.slot]).fold(0.0, f64::max);
        checks.push(Check::at_most(
            "crossing-particle-continuity",
            own,
            1e-9,
            "largest spacetime velocity jump of the crossing particle",
        ));
        let flux = events
            .iter()
            .map(|e| (e.flux_left - e.flux_right).abs() / e.flux_left.abs().max(e.flux_right.abs()))
            .fold(0.0, f64::max);
        checks.push(Check::at_most("crossing-flux-balance", flux, 1e-9, "relative one-sided flux mismatch"));
        let partner: Vec<f64> = events
            .iter()
            .flat_map(|e| {
                let jumps = e.spacetime_jumps();
                (0..jumps.len()).filter(move |&j| j != e.slot).map(move |j| jumps[j])
            })
            .collect();
        match run.expect_partner_jumps {
            Some(true) if !partner.is_empty() => {
                let big = partner.iter().filter(|&&j| j > 1e-3).count() as f64 / partner.len() as f64;
                checks.push(Check::at_least(
                    "partner-velocity-jumps",
                    big,
                    0.9,
                    "fraction of partner jumps above 1e-3",
                ));
            }
            Some(false) => {
                let max = partner.iter().copied().fold(0.0, f64::max);
                checks.push(Check::at_most("partner-velocity-jumps", max, 1e-9, "largest partner jump"));
            }
            _ => {}
        }
    }
    if run.reverse {
        let tol = 10.0 * run.integrator.atol.max(run.integrator.rtol);
        let worst = results
            .iter()
            .zip(starts)
            .map(|((_, back), q0)| back.as_ref().map_or(f64::INFINITY, |b| max_abs_diff(&b.q_end, q0)))
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            "reversibility",
            worst,
            tol,
            "largest start-point error after integrating back",
        ));
    }
    checks
}
