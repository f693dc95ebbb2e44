use std::collections::BTreeMap;

use hbdm_core::equivariance::{
    run_equivariance, CellRecord, Dynamics, EnsembleRun, EquivarianceConfig, NonLeafReport, TubeReport,
};
use hbdm_core::geometry::Foliation;
use hbdm_core::guidance::ConfigurationChart;
use hbdm_core::wavefunction::MultiTimeWaveFunction;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{float, ArtifactWriter, Check};
use crate::scenario::EquivarianceRun;

#[derive(Serialize)]
struct LeafSummary {
    s: f64,
    #[serde(rename = "TV")]
    tv: f64,
    bound: f64,
    chi2: f64,
    dof: usize,
    p: f64,
    aborted_fraction: f64,
    crossed_fraction: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    #[serde(rename = "M")]
    samples: usize,
    seed: u64,
    bins_per_axis: usize,
    source_mass: f64,
    crossing_fraction: f64,
    terminations: &'a BTreeMap<String, usize>,
    leaves: Vec<LeafSummary>,
    tube: Option<&'a [TubeReport]>,
    non_leaf: Option<&'a NonLeafReport>,
    control: Option<Vec<LeafSummary>>,
}

fn leaf_summaries(run: &EnsembleRun) -> Vec<LeafSummary> {
    run.leaves
        .iter()
        .map(|l| LeafSummary {
            s: l.s,
            tv: l.tv,
            bound: l.bound,
            chi2: l.chi2,
            dof: l.dof,
            p: l.p,
            aborted_fraction: l.aborted_fraction,
            crossed_fraction: l.crossed_fraction,
        })
        .collect()
}

fn histogram(out: &mut ArtifactWriter, name: &str, n: usize, cells: &[CellRecord]) -> Result<(), CliError> {
    let header: Vec<String> = std::iter::once("cell".to_string())
        .chain((1..=n).map(|j| format!("lower_{j}")))
        .chain((1..=n).map(|j| format!("upper_{j}")))
        .chain(["empirical".to_string(), "theory".to_string()])
        .collect();
    let rows = cells.iter().enumerate().map(|(i, c)| {
        std::iter::once(i.to_string())
            .chain(c.lower.iter().map(|&x| float(x)))
            .chain(c.upper.iter().map(|&x| float(x)))
            .chain([float(c.empirical), float(c.theory)])
            .collect::<Vec<_>>()
    });
    out.csv(name, &header, rows)
}

pub fn equivariance(
    scenario: &str,
    psi: &MultiTimeWaveFunction<1>,
    fol: &dyn Foliation,
    run: &EquivarianceRun,
    seed: u64,
    out: &mut ArtifactWriter,
) -> Result<Vec<Check>, CliError> {
    let n = psi.masses().len();
    let chart = ConfigurationChart::new(fol, n);
    let mut cfg = EquivarianceConfig::new(run.s0, run.targets.clone(), run.domain.clone());
    cfg.samples = run.samples;
    cfg.seed = seed;
    cfg.bins_per_axis = run.bins_per_axis;
    cfg.sampling = run.sampling.clone();
    if let Some(opts) = run.integrator {
        cfg.integrator = opts;
    }
    cfg.chart_speed_bound = run.chart_speed_bound;
    cfg.non_leaf_time = run.non_leaf_time;
    cfg.tube_check = run.tube_check;
    let guided = run_equivariance(psi, &chart, &cfg)?;
    let control = if run.negative_control {
        let cfg = EquivarianceConfig {
            dynamics: Dynamics::FrozenAfterKink,
            non_leaf_time: None,
            tube_check: false,
            ..cfg.clone()
        };
        Some(run_equivariance(psi, &chart, &cfg)?)
    } else {
        None
    };

    for (i, leaf) in guided.leaves.iter().enumerate() {
        histogram(out, &format!("histogram_leaf_{i}.csv"), n, &leaf.cells)?;
    }
    if let Some(nl) = &guided.non_leaf {
        histogram(out, "histogram_non_leaf.csv", n, &nl.cells)?;
    }
    if let Some(c) = &control {
        for (i, leaf) in c.leaves.iter().enumerate() {
            histogram(out, &format!("histogram_control_leaf_{i}.csv"), n, &leaf.cells)?;
        }
    }
    out.json(
        "equivariance_summary.json",
        &Summary {
            scenario,
            samples: guided.samples,
            seed,
            bins_per_axis: guided.bins_per_axis,
            source_mass: guided.source_mass,
            crossing_fraction: guided.crossing_fraction,
            terminations: &guided.terminations,
            leaves: leaf_summaries(&guided),
            tube: guided.tube.as_deref(),
            non_leaf: guided.non_leaf.as_ref(),
            control: control.as_ref().map(leaf_summaries),
        },
    )?;

    let mut checks = Vec::new();
    for (i, leaf) in guided.leaves.iter().enumerate() {
        checks.push(Check::at_most(
            &format!("tv-leaf-{i}"),
            leaf.tv,
            leaf.bound,
            format!("s = {}, chi2 = {:.3}, dof = {}, p = {:.3e}", leaf.s, leaf.chi2, leaf.dof, leaf.p),
        ));
        checks.push(Check::at_most(
            &format!("aborted-leaf-{i}"),
            leaf.aborted_fraction,
            run.max_aborted_fraction,
            format!("s = {}", leaf.s),
        ));
    }
    if let Some(last) = guided.leaves.last() {
        let c = Check::at_least(
            "kink-crossing-fraction",
            last.crossed_fraction,
            run.min_crossing_fraction,
            format!("trajectories with at least one crossing by s = {}", last.s),
        );
        checks.push(if run.min_crossing_fraction > 0.0 { c } else { c.report_only() });
    }
    if let Some(tube) = &guided.tube {
        let worst = tube
            .iter()
            .map(|t| {
                let dev = (t.observed - t.expected_left).abs().max((t.observed - t.expected_right).abs());
                dev / (3.0 * t.sigma + 1e-9)
            })
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            "tube-flux",
            worst,
            1.0,
            "largest crossing-count deviation in units of 3 sigma",
        ));
    }
    if let Some(nl) = &guided.non_leaf {
        checks.push(
            Check::at_most(
                "non-leaf-tv",
                nl.tv,
                nl.bound,
                format!("t = {}, chi2 = {:.3}, dof = {}, p = {:.3e}", nl.time, nl.chi2, nl.dof, nl.p),
            )
            .report_only(),
        );
    }
    if let Some(c) = &control {
        let ratio = c.leaves.iter().map(|l| l.tv / l.bound).fold(0.0, f64::max);
        checks.push(Check::at_least(
            "negative-control",
            ratio,
            1.0,
            "largest TV over bound for frozen-after-kink dynamics",
        ));
    }
    Ok(checks)
}
