use hbdm_core::geometry::{MinkowskiPoint, Side, UnitNormal, WedgeFoliation, DEFAULT_MARGIN};
use hbdm_core::slater::{paired_kink_check, slater_divergence_check, MaxwellField, MaxwellMode, PairedKinkReport, SlaterError};
use hbdm_core::wavefunction::{DiracRepresentation, EnergySign, MultiTimeWaveFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{ArtifactWriter, Check};
use crate::scenario::SlaterRun;

fn unit3<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.2 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}

fn random_field<R: Rng>(rng: &mut R, modes: usize) -> MaxwellField {
    MaxwellField::new(
        (0..modes)
            .map(|_| {
                let k = unit3(rng).map(|c| c * rng.random_range(0.5..2.0));
                loop {
                    let (amp, phase) = (rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
                    if let Ok(m) = MaxwellMode::new(k, unit3(rng), amp, phase) {
                        return m;
                    }
                }
            })
            .collect(),
    )
}

fn random_wedge<R: Rng>(rng: &mut R) -> WedgeFoliation<3> {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let a = sign * rng.random_range(0.15..0.8);
    let v = rng.random_range(-0.8..0.8);
    WedgeFoliation::with_axis(a, v, 1.0, unit3(rng), DEFAULT_MARGIN).expect("sampled wedge is valid")
}

fn random_dirac_state<R: Rng>(rng: &mut R) -> MultiTimeWaveFunction<3> {
    let modes: Vec<_> = (0..2)
        .map(|_| {
            let k = unit3(rng).map(|c| c * rng.random_range(0.2..1.5));
            let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (k, EnergySign::Positive, a)
        })
        .collect();
    MultiTimeWaveFunction::from_modes(DiracRepresentation::<3>::dirac(), vec![1.0], &[vec![modes]])
        .expect("sampled state is valid")
}

fn random_point<R: Rng>(rng: &mut R) -> MinkowskiPoint<3> {
    MinkowskiPoint::new(rng.random_range(-2.0..2.0), [0, 1, 2].map(|_| rng.random_range(-2.0..2.0)))
}

#[derive(Serialize)]
struct CaseRecord {
    case: usize,
    s: f64,
    modes: usize,
    #[serde(flatten)]
    report: PairedKinkReport,
}

#[derive(Serialize)]
struct DivergenceRecord {
    normal: &'static str,
    x: [f64; 4],
    divergence: f64,
    scale: f64,
    relative: f64,
}

/// Normal field of a boost whose rapidity and direction vary in space.
fn rotating_boost(p: &MinkowskiPoint<3>) -> [f64; 4] {
    let (beta, theta) = (0.5 + 0.8 * p.x[0], 1.2 * p.x[1]);
    [beta.cosh(), -beta.sinh() * theta.cos(), -beta.sinh() * theta.sin(), 0.0]
}

pub fn demo(
    psi: Option<&MultiTimeWaveFunction<3>>,
    run: &SlaterRun,
    seed: u64,
    out: &mut ArtifactWriter,
) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(run.cases);
    let mut degenerate = 0;
    while cases.len() < run.cases && degenerate < 100 * run.cases.max(1) {
        let modes = rng.random_range(run.modes[0]..=run.modes[1]);
        let field = random_field(&mut rng, modes);
        let wedge = random_wedge(&mut rng);
        let sampled;
        let state = match psi {
            Some(p) => p,
            None => {
                sampled = random_dirac_state(&mut rng);
                &sampled
            }
        };
        let s = rng.random_range(-1.0..1.0);
        let x: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-2.0..2.0));
        let u = wedge.offset(s, &x);
        let e = wedge.axis();
        let on_kink = [0, 1, 2].map(|i| x[i] - u * e[i]);
        match paired_kink_check(&field, state, &wedge, s, on_kink) {
            Ok(report) => cases.push(CaseRecord {
                case: cases.len(),
                s,
                modes,
                report,
            }),
            Err(SlaterError::DegenerateField { .. }) => degenerate += 1,
            Err(err) => return Err(err.into()),
        }
    }
    out.json("slater_reports.json", &cases)?;

    let mut div = Vec::with_capacity(2 * run.divergence_points);
    for _ in 0..run.divergence_points {
        let field = random_field(&mut rng, 3);
        let x = random_point(&mut rng);
        let n = UnitNormal::from_gradient(unit3(&mut rng).map(|c| 0.5 * c), Side::Smooth);
        let lower = [n.time, n.space[0], n.space[1], n.space[2]];
        for (name, r) in [
            ("constant", slater_divergence_check(&field, |_| lower, &x, run.h)),
            ("rotating-boost", slater_divergence_check(&field, rotating_boost, &x, run.h)),
        ] {
            div.push(DivergenceRecord {
                normal: name,
                x: [x.t, x.x[0], x.x[1], x.x[2]],
                divergence: r.divergence,
                scale: r.scale,
                relative: r.relative,
            });
        }
    }
    out.json("slater_divergence.json", &div)?;

    let total = cases.len().max(1) as f64;
    let violations = cases.iter().filter(|c| c.report.slater.violation()).count();
    let hbdm = cases.iter().map(|c| c.report.hbdm_mismatch).fold(0.0, f64::max);
    let slater_min = cases.iter().map(|c| c.report.slater_mismatch).fold(f64::INFINITY, f64::min);
    let relative = |name: &'static str| div.iter().filter(move |d| d.normal == name).map(|d| d.relative);
    Ok(vec![
        Check::at_least("cases", cases.len() as f64, run.cases as f64, format!("{degenerate} degenerate draws skipped")),
        Check::at_least(
            "slater-sign-violation",
            violations as f64 / total,
            1.0,
            "fraction of kinks with a conormal seeing opposite flux signs",
        ),
        Check::at_most("hbdm-flux-balance", hbdm, 1e-9, "largest Dirac one-sided flux mismatch"),
        Check::at_least("slater-flux-mismatch", slater_min, 0.0, "smallest Slater one-sided flux mismatch")
            .report_only(),
        Check::at_most(
            "slater-divergence-constant-normal",
            relative("constant").fold(0.0, f64::max),
            1e-6,
            "relative divergence for constant normals",
        ),
        Check::at_least(
            "slater-divergence-varying-normal",
            relative("rotating-boost").fold(f64::INFINITY, f64::min),
            1e-3,
            "relative divergence for a rotating boost normal field",
        ),
    ])
}
