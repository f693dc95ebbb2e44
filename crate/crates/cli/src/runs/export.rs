use hbdm_core::geometry::{kink_rows, leaf_rows, lorentzian_distance_to_surface, MinkowskiPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::BuiltFoliation;
use crate::error::CliError;
use crate::output::{float, ArtifactWriter, Check};
use crate::scenario::FoliationRun;

#[derive(Serialize)]
struct DistanceRecord {
    s: f64,
    x: f64,
    t: f64,
    tau: f64,
}

pub fn foliation(built: &BuiltFoliation, run: &FoliationRun, seed: u64, out: &mut ArtifactWriter) -> Result<Vec<Check>, CliError> {
    let fol = built.as_dyn();
    let (s_grid, x_grid) = (run.s_grid.values(), run.x_grid.values());
    let leaves = leaf_rows(fol, &s_grid, &x_grid)?;
    out.csv(
        "leaves.csv",
        &["s", "x", "f", "is_kink"].map(String::from),
        leaves
            .iter()
            .map(|r| [float(r.s), float(r.x), float(r.f), u8::from(r.is_kink).to_string()]),
    )?;
    let kinks = kink_rows(fol, &s_grid)?;
    out.csv(
        "kinks.csv",
        &["s", "x_kink", "rapidity_left", "rapidity_right"].map(String::from),
        kinks
            .iter()
            .map(|r| [float(r.s), float(r.x_kink), float(r.rapidity_left), float(r.rapidity_right)]),
    )?;

    let mut checks = Vec::new();
    let asymmetry = kinks
        .iter()
        .map(|r| (r.rapidity_left - r.rapidity_right).abs())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    if !kinks.is_empty() {
        checks.push(
            Check::at_most("kink-rapidity-symmetry", asymmetry, 1e-6, format!("{} kink rows", kinks.len()))
                .report_only(),
        );
    }
    if let Some(a) = run.reference_wedge {
        let c = (1.0 - a * a).sqrt();
        let worst = leaves
            .iter()
            .map(|r| (r.f - (-a * r.x.abs() + r.s * c)).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("wedge-closed-form", worst, 1e-8, format!("reference slope {a}")));
    }
    if let BuiltFoliation::Dn0 { foliation, tol } = built {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = foliation.s_grid();
        let (lo, hi) = (x_grid[0], x_grid[x_grid.len() - 1]);
        let mut records = Vec::with_capacity(run.distance_points);
        for _ in 0..run.distance_points {
            let s = labels[rng.random_range(0..labels.len())];
            let x = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let t = foliation.solve(s, x)?.t;
            let tau = lorentzian_distance_to_surface(foliation.initial(), &MinkowskiPoint::new(t, [x]))?;
            records.push(DistanceRecord { s, x, t, tau });
        }
        out.json("leaf_distances.json", &records)?;
        let worst = records.iter().map(|r| (r.tau - r.s).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most(
            "distance-on-leaf",
            worst,
            2.0 * tol,
            format!("{} random leaf points", records.len()),
        ));
    }
    Ok(checks)
}
