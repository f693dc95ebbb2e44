//! Acceptance run: every primary criterion at its stated tolerance, one
//! PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hbdm_core::equivariance::{run_equivariance, Domain, Dynamics, EquivarianceConfig};
use hbdm_core::geometry::{
    build_dn0_foliation, kink_rows, lorentzian_distance_to_surface, Foliation, LeafWithKinks, MinkowskiPoint, Side,
    UnitNormal, WedgeFoliation, ZigzagFoliation, DEFAULT_MARGIN,
};
use hbdm_core::guidance::{
    current_condition_check, pushforward_identity_check, pushforward_side_gap, ConfigurationChart, ScalarProduct,
};
use hbdm_core::integrator::{integrate, IntegratorOptions};
use hbdm_core::slater::{paired_kink_check, slater_divergence_check, MaxwellField, MaxwellMode, SlaterError};
use hbdm_core::wavefunction::{check_divergence, presets, DiracRepresentation, EnergySign, MultiTimeWaveFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn dirac() -> DiracRepresentation<1> {
    DiracRepresentation::<1>::dirac()
}

fn dn0_wedge() -> WedgeFoliation {
    WedgeFoliation::new(-0.5, 0.0, 0.75_f64.sqrt()).unwrap()
}

fn divergence_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let states = [
        ("single mode", presets::single_mode(dirac(), 0.7)),
        ("two mode", presets::two_mode(dirac())),
        ("entangled pair", presets::entangled_pair(dirac())),
    ];
    let mut worst = 0.0_f64;
    for (_, psi) in &states {
        for _ in 0..100 {
            let cfg: Vec<MinkowskiPoint<1>> = (0..psi.masses().len())
                .map(|_| MinkowskiPoint::new(rng.random_range(-2.0..2.0), [rng.random_range(-3.0..3.0)]))
                .collect();
            for r in check_divergence(psi, &cfg, 1e-3).unwrap() {
                worst = worst.max(r);
            }
        }
    }
    outcome(worst < 1e-6, format!("3 states x 100 configurations, max relative residual {worst:.2e} (< 1e-6)"))
}

fn current_condition() -> Outcome {
    let psi = presets::entangled_pair(dirac());
    let fol = dn0_wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let spd = ScalarProduct::random(3, &mut rng);
    let (mut euclid, mut other, mut flux_gap) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut points = 0;
    while points < 100 {
        let s = rng.random_range(0.1..3.0);
        let slot = rng.random_range(0..2);
        let q: [f64; 2] = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        if q[1 - slot].abs() < 1e-3 {
            continue;
        }
        let e = current_condition_check(&psi, &chart, s, &q, slot, 0, &ScalarProduct::Euclidean).unwrap();
        let g = current_condition_check(&psi, &chart, s, &q, slot, 0, &spd).unwrap();
        euclid = euclid.max(e.mismatch);
        other = other.max(g.mismatch);
        flux_gap = flux_gap.max((e.flux_left - g.flux_left).abs() / e.flux_left.abs().max(1e-300));
        points += 1;
    }
    outcome(
        euclid < 1e-9 && other < 1e-9,
        format!(
            "100 kink points, max mismatch Euclidean {euclid:.2e}, random SPD {other:.2e} (< 1e-9); \
             flux ratio spread across products {flux_gap:.2e}"
        ),
    )
}

fn pushforward_identity() -> Outcome {
    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::new(-0.5, 0.4, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst = 0.0_f64;
    let mut n = 0;
    while n < 100 {
        let s = rng.random_range(-2.0..2.0);
        let q: [f64; 2] = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        if q.iter().any(|x| (x - 0.4 * s).abs() < 1e-6) {
            continue;
        }
        worst = worst.max(pushforward_identity_check(&psi, &chart, s, &q, &[Side::Smooth; 2]).unwrap().residual);
        n += 1;
    }
    let kinked = dn0_wedge();
    let kchart = ConfigurationChart::new(&kinked, 2);
    let (mut form_gap, mut min_push) = (0.0_f64, f64::INFINITY);
    for _ in 0..20 {
        let s = rng.random_range(0.2..2.0);
        let slot = rng.random_range(0..2);
        let mut q: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        q[slot] = 0.0;
        if q[1 - slot].abs() < 1e-3 {
            continue;
        }
        let gap = pushforward_side_gap(&psi, &kchart, s, &q, slot).unwrap();
        form_gap = form_gap.max(gap.form_gap);
        min_push = min_push.min(gap.pushforward_gap / gap.scale);
    }
    outcome(
        worst < 1e-9 && form_gap < 1e-12 && min_push > 0.0,
        format!(
            "100 off-kink points, max residual {worst:.2e} (< 1e-9); on K: J side gap {form_gap:.2e} (< 1e-12), \
             smallest relative pushforward gap {min_push:.2e} (> 0)"
        ),
    )
}

fn equivariance() -> Outcome {
    let fol = ZigzagFoliation::new(0.3, 2.0, 1.0, 2.0 * PI, 0.0, 6).unwrap();
    let psi = presets::periodic_entangled_pair(dirac());
    let chart = ConfigurationChart::new(&fol, 2);
    let mut cfg = EquivarianceConfig::new(0.0, vec![1.5, 3.0], Domain::torus(0.0, 2.0 * PI));
    cfg.samples = 20_000;
    cfg.seed = 1004;
    cfg.bins_per_axis = 7;
    cfg.tube_check = true;
    let run = run_equivariance(&psi, &chart, &cfg).unwrap();
    let control = run_equivariance(
        &psi,
        &chart,
        &EquivarianceConfig {
            dynamics: Dynamics::FrozenAfterKink,
            tube_check: false,
            ..cfg.clone()
        },
    )
    .unwrap();
    let leaves_ok = run.leaves.iter().all(|l| l.tv <= l.bound && l.aborted_fraction < 0.01);
    let crossed = run.leaves.last().map_or(0.0, |l| l.crossed_fraction);
    let control_exceeds = control.leaves.iter().any(|l| l.tv > l.bound);
    let tube_ok = run.tube.as_ref().is_some_and(|t| t.iter().all(|r| r.within_three_sigma()));
    let leaves: Vec<String> = run
        .leaves
        .iter()
        .map(|l| format!("s={} TV {:.4}/{:.4} p {:.2}", l.s, l.tv, l.bound, l.p))
        .collect();
    let ctrl: Vec<String> = control.leaves.iter().map(|l| format!("{:.3}", l.tv)).collect();
    outcome(
        leaves_ok && crossed >= 0.3 && control_exceeds && tube_ok,
        format!(
            "M=20000, 49 cells + outside; {}; crossed {:.3} (>= 0.3); aborted {:.4}; tube within 3 sigma {tube_ok}; \
             frozen control TV [{}]",
            leaves.join(", "),
            crossed,
            run.leaves.iter().map(|l| l.aborted_fraction).fold(0.0, f64::max),
            ctrl.join(", ")
        ),
    )
}

fn kink_jumps() -> Outcome {
    let fol = dn0_wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    let opts = IntegratorOptions {
        record_samples: false,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let entangled = presets::entangled_pair(dirac());
    let (mut own, mut big, mut events) = (0.0_f64, 0usize, 0usize);
    while events < 200 {
        let q0 = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let rec = integrate(&entangled, &chart, &q0, 0.0, 6.0, &opts).unwrap();
        for e in &rec.events {
            let j = e.spacetime_jumps();
            own = own.max(j[e.slot]);
            big += usize::from(j[1 - e.slot] > 1e-3);
            events += 1;
        }
    }
    let product = presets::product_pair(dirac());
    let (mut product_max, mut product_events) = (0.0_f64, 0usize);
    while product_events < 200 {
        let q0 = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let rec = integrate(&product, &chart, &q0, 0.0, 4.0, &opts).unwrap();
        for e in &rec.events {
            product_max = e.spacetime_jumps().into_iter().fold(product_max, f64::max);
            product_events += 1;
        }
    }
    let fraction = big as f64 / events as f64;
    outcome(
        own < 1e-9 && fraction >= 0.9 && product_max < 1e-9,
        format!(
            "{events} entangled crossings: crossing-particle jump {own:.2e} (< 1e-9), partner jump > 1e-3 in \
             {:.1}% (>= 90%); {product_events} product crossings: max jump {product_max:.2e} (< 1e-9)",
            100.0 * fraction
        ),
    )
}

fn dn0_builder() -> Outcome {
    let a = 0.5;
    let tol = 1e-10;
    let sigma = LeafWithKinks::wedge(0.0, 0.0, -a, DEFAULT_MARGIN).unwrap();
    let ss: Vec<f64> = (0..8).map(|i| 0.25 * (i + 1) as f64).collect();
    let xs: Vec<f64> = (0..81).map(|i| -2.0 + 0.05 * i as f64).collect();
    let fol = build_dn0_foliation(&sigma, &ss, &xs, tol).unwrap();
    let c = (1.0 - a * a).sqrt();
    let mut closed = 0.0_f64;
    for (row, &s) in fol.table().iter().zip(&ss) {
        for (p, &x) in row.iter().zip(&xs) {
            closed = closed.max((p.t - (-a * x.abs() + s * c)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut distance = 0.0_f64;
    for _ in 0..100 {
        let s = ss[rng.random_range(0..ss.len())];
        let x = rng.random_range(-2.0..2.0);
        let t = fol.solve(s, x).unwrap().t;
        let tau = lorentzian_distance_to_surface(&sigma, &MinkowskiPoint::new(t, [x])).unwrap();
        distance = distance.max((tau - s).abs());
    }
    let rows = kink_rows(&fol, &ss[1..ss.len() - 1]).unwrap();
    let asym = rows
        .iter()
        .map(|r| (r.rapidity_left - r.rapidity_right).abs())
        .fold(0.0, f64::max);
    outcome(
        closed < 1e-8 && distance < 2.0 * tol && fol.kink_curve_count() == 1,
        format!(
            "closed-form error {closed:.2e} (< 1e-8); distance-on-leaf error {distance:.2e} (< {:.0e}); \
             {} kink curve; rapidity asymmetry {asym:.2e} over {} kink samples (reported)",
            2.0 * tol,
            fol.kink_curve_count(),
            rows.len()
        ),
    )
}

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
                    let (amp, phase) = (rng.random_range(0.5..1.5), rng.random_range(0.0..2.0 * PI));
                    if let Ok(m) = MaxwellMode::new(k, unit3(rng), amp, phase) {
                        return m;
                    }
                }
            })
            .collect(),
    )
}

fn slater_failure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let (mut cases, mut violations, mut hbdm, mut degenerate) = (0, 0, 0.0_f64, 0);
    while cases < 100 {
        let modes = rng.random_range(2..4);
        let field = random_field(&mut rng, modes);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = sign * rng.random_range(0.15..0.8);
        let wedge = WedgeFoliation::with_axis(a, rng.random_range(-0.8..0.8), 1.0, unit3(&mut rng), DEFAULT_MARGIN).unwrap();
        let dirac_modes: Vec<_> = (0..2)
            .map(|_| {
                let k = unit3(&mut rng).map(|c| c * rng.random_range(0.2..1.5));
                (k, EnergySign::Positive, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            })
            .collect();
        let psi = MultiTimeWaveFunction::from_modes(DiracRepresentation::<3>::dirac(), vec![1.0], &[vec![dirac_modes]]).unwrap();
        let s = rng.random_range(-1.0..1.0);
        let x: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-2.0..2.0));
        let (u, e) = (wedge.offset(s, &x), wedge.axis());
        let on_kink = [0, 1, 2].map(|i| x[i] - u * e[i]);
        match paired_kink_check(&field, &psi, &wedge, s, on_kink) {
            Ok(r) => {
                violations += usize::from(r.slater.violation());
                hbdm = hbdm.max(r.hbdm_mismatch);
                cases += 1;
            }
            Err(SlaterError::DegenerateField { .. }) => degenerate += 1,
            Err(err) => panic!("{err}"),
        }
    }
    let n_field = |p: &MinkowskiPoint<3>| {
        let (beta, theta) = (0.5 + 0.8 * p.x[0], 1.2 * p.x[1]);
        [beta.cosh(), -beta.sinh() * theta.cos(), -beta.sinh() * theta.sin(), 0.0]
    };
    let (mut varying, mut constant) = (f64::INFINITY, 0.0_f64);
    for _ in 0..20 {
        let field = random_field(&mut rng, 3);
        let x = MinkowskiPoint::new(rng.random_range(-2.0..2.0), [0, 1, 2].map(|_| rng.random_range(-2.0..2.0)));
        varying = varying.min(slater_divergence_check(&field, n_field, &x, 1e-4).relative);
        let n = UnitNormal::from_gradient(unit3(&mut rng).map(|c| 0.5 * c), Side::Smooth);
        let lower = [n.time, n.space[0], n.space[1], n.space[2]];
        constant = constant.max(slater_divergence_check(&field, |_| lower, &x, 1e-4).relative);
    }
    outcome(
        violations == cases && hbdm < 1e-9 && varying > 1e-3 && constant < 1e-6,
        format!(
            "sign violation in {violations}/{cases} kinks ({degenerate} degenerate draws skipped); paired Dirac mismatch \
             {hbdm:.2e} (< 1e-9); divergence varying n min {varying:.2e} (> 1e-3), constant n max {constant:.2e} (< 1e-6)"
        ),
    )
}

fn reversibility() -> Outcome {
    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::new(-0.5, 0.3, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 2);
    let opts = IntegratorOptions {
        record_samples: false,
        ..Default::default()
    };
    let tol = 10.0 * opts.atol.max(opts.rtol);
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let (mut done, mut worst, mut draws) = (0, 0.0_f64, 0);
    while done < 1000 {
        draws += 1;
        let q0 = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let fwd = integrate(&psi, &chart, &q0, 0.0, 3.0, &opts).unwrap();
        if fwd.events.is_empty() {
            continue;
        }
        let back = integrate(&psi, &chart, &fwd.q_end, 3.0, 0.0, &opts).unwrap();
        let err = if fwd.completed() && back.completed() {
            (0..2).map(|k| (back.q_end[k] - q0[k]).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        worst = worst.max(err);
        done += 1;
    }
    outcome(
        worst < tol,
        format!("1000 trajectories with >= 1 crossing ({draws} drawn), max return error {worst:.2e} (< {tol:.0e})"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("divergence-identity", divergence_identity),
        ("current-condition", current_condition),
        ("pushforward-identity", pushforward_identity),
        ("equivariance-across-kinks", equivariance),
        ("kink-jump-structure", kink_jumps),
        ("dn0-builder", dn0_builder),
        ("slater-failure", slater_failure),
        ("integrator-reversibility", reversibility),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let o = f();
        failed += usize::from(!o.passed);
        println!(
            "{} {name} [{:.1}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
