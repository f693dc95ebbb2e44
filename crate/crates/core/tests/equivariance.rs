use std::f64::consts::PI;

use hbdm_core::equivariance::{
    chi_square, kolmogorov_statistic, run_equivariance, sample_initial, Domain, Dynamics, EquivarianceConfig,
    EquivarianceError, LeafQuadrature, SamplingOptions,
};
use hbdm_core::geometry::{WedgeFoliation, ZigzagFoliation};
use hbdm_core::guidance::ConfigurationChart;
use hbdm_core::wavefunction::{presets, DiracRepresentation};
use proptest::prelude::*;

fn dirac() -> DiracRepresentation<1> {
    DiracRepresentation::<1>::dirac()
}

#[test]
fn zero_samples_give_an_empty_ensemble() {
    let psi = presets::two_mode(dirac());
    let fol = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&fol, 1);
    let d = Domain::window(vec![-3.0], vec![3.0]);
    let e = sample_initial(&psi, &chart, 0.0, &d, 0, 1, &SamplingOptions::default()).unwrap();
    assert!(e.points.is_empty());
}

#[test]
fn plane_wave_samples_are_uniform() {
    let psi = presets::single_mode(dirac(), 0.7);
    let fol = WedgeFoliation::new(0.4, 0.3, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 1);
    let m = 20_000;
    // on a kinked leaf the chart density of a plane wave is piecewise
    // constant, so the flat leaf is the uniform case
    let flat = WedgeFoliation::flat();
    let flat_chart = ConfigurationChart::new(&flat, 1);
    let d = Domain::window(vec![-2.0], vec![5.0]);
    let e = sample_initial(&psi, &flat_chart, 0.3, &d, m, 11, &SamplingOptions::default()).unwrap();
    let xs: Vec<f64> = e.points.iter().map(|q| q[0]).collect();
    let ks = kolmogorov_statistic(&xs, |x| (x + 2.0) / 7.0);
    assert!(ks < 1.63 / (m as f64).sqrt(), "Kolmogorov distance {ks}");

    // and on the kinked leaf the two constant pieces get their quadrature weight
    let e = sample_initial(&psi, &chart, 0.0, &d, m, 12, &SamplingOptions::default()).unwrap();
    let quad = LeafQuadrature::new(&psi, &chart);
    let left = quad.box_mass(0.0, &d, &[(-2.0, 0.0)], 1).unwrap() / e.mass;
    let observed = e.points.iter().filter(|q| q[0] < 0.0).count();
    let c = chi_square(&[observed, m - observed], &[left, 1.0 - left], m);
    assert!(c.p_value > 1e-3, "p = {}", c.p_value);
}

#[test]
fn two_mode_histogram_matches_quadrature() {
    let psi = presets::two_mode(dirac());
    let fol = WedgeFoliation::new(-0.3, 0.2, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 1);
    let d = Domain::window(vec![-6.0], vec![6.0]);
    let m = 20_000;
    let e = sample_initial(&psi, &chart, 0.5, &d, m, 5, &SamplingOptions::default()).unwrap();
    let quad = LeafQuadrature::new(&psi, &chart);
    let bins = 24;
    let width = 12.0 / bins as f64;
    let expected: Vec<f64> = (0..bins)
        .map(|i| {
            let lo = -6.0 + width * i as f64;
            quad.box_mass(0.5, &d, &[(lo, lo + width)], 1).unwrap() / e.mass
        })
        .collect();
    assert!((expected.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let mut counts = vec![0; bins];
    for q in &e.points {
        counts[(((q[0] + 6.0) / width) as usize).min(bins - 1)] += 1;
    }
    let c = chi_square(&counts, &expected, m);
    assert!(c.p_value > 1e-3, "χ² = {} with {} dof", c.statistic, c.dof);
}

#[test]
fn coarse_envelope_is_rebuilt() {
    let psi = presets::two_mode(dirac());
    let fol = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&fol, 1);
    let d = Domain::window(vec![-6.0], vec![6.0]);
    let opts = SamplingOptions {
        envelope_grid: 2,
        ..SamplingOptions::default()
    };
    let quad = LeafQuadrature::new(&psi, &chart);
    let coarse = 1.1 * quad.density(0.0, &[-3.0]).unwrap().max(quad.density(0.0, &[3.0]).unwrap());
    let peak = (0..4000).map(|i| quad.density(0.0, &[-6.0 + 12.0 * i as f64 / 4000.0]).unwrap()).fold(0.0, f64::max);
    assert!(coarse < peak, "the two-point grid must miss the peak");
    let e = sample_initial(&psi, &chart, 0.0, &d, 5000, 3, &opts).unwrap();
    assert!(e.rebuilds >= 1);
    assert!(e.envelope >= peak * 0.99);
}

#[test]
fn samples_do_not_depend_on_thread_count() {
    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::new(0.3, 0.0, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 2);
    let d = Domain::window(vec![-4.0, -4.0], vec![4.0, 4.0]);
    let draw = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_initial(&psi, &chart, 0.0, &d, 300, 99, &SamplingOptions::default()).unwrap())
    };
    assert_eq!(draw(1).points, draw(3).points);
}

#[test]
fn window_mass_precondition_is_enforced() {
    let psi = presets::two_mode(dirac());
    let fol = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&fol, 1);
    let d = Domain::window(vec![-3.0], vec![3.0]);
    let opts = SamplingOptions {
        reference: Some(Domain::window(vec![-3.5], vec![3.5])),
        ..SamplingOptions::default()
    };
    let err = sample_initial(&psi, &chart, 0.0, &d, 10, 1, &opts).unwrap_err();
    assert!(matches!(err, EquivarianceError::WindowMassTooSmall { .. }));

    let opts = SamplingOptions {
        reference: Some(Domain::window(vec![-3.001], vec![3.001])),
        ..SamplingOptions::default()
    };
    let e = sample_initial(&psi, &chart, 0.0, &d, 10, 1, &opts).unwrap();
    assert!(e.window_fraction.unwrap() >= 0.999);
}

#[test]
fn targets_must_follow_the_source() {
    let psi = presets::two_mode(dirac());
    let fol = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&fol, 1);
    let cfg = EquivarianceConfig::new(1.0, vec![0.5], Domain::window(vec![-3.0], vec![3.0]));
    assert!(matches!(
        run_equivariance(&psi, &chart, &cfg),
        Err(EquivarianceError::TargetBeforeSource { .. })
    ));
}

#[test]
fn flat_foliation_ensemble_stays_distributed_by_the_density() {
    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut cfg = EquivarianceConfig::new(0.0, vec![1.0, 2.0], Domain::window(vec![-8.0, -8.0], vec![8.0, 8.0]));
    cfg.samples = 8000;
    cfg.seed = 4;
    let run = run_equivariance(&psi, &chart, &cfg).unwrap();
    assert_eq!(run.events, 0);
    for leaf in &run.leaves {
        assert!(leaf.within_bound(), "TV {} above {} at s = {}", leaf.tv, leaf.bound, leaf.s);
        assert!(leaf.p > 1e-3, "p = {} at s = {}", leaf.p, leaf.s);
        assert_eq!(leaf.aborted_fraction, 0.0);
        assert!(leaf.outside_theory > 0.0 && leaf.outside_empirical > 0.0);
    }
}

fn torus_scenario() -> (ZigzagFoliation, hbdm_core::wavefunction::MultiTimeWaveFunction<1>) {
    (
        ZigzagFoliation::new(0.3, 2.0, 1.0, 2.0 * PI, 0.0, 6).unwrap(),
        presets::periodic_entangled_pair(dirac()),
    )
}

#[test]
fn moving_kinks_preserve_the_distribution_and_balance_the_flux() {
    let (fol, psi) = torus_scenario();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut cfg = EquivarianceConfig::new(0.0, vec![1.5, 3.0], Domain::torus(0.0, 2.0 * PI));
    cfg.samples = 2000;
    cfg.seed = 21;
    cfg.tube_check = true;
    let run = run_equivariance(&psi, &chart, &cfg).unwrap();
    assert!(run.crossing_fraction > 0.3);
    for leaf in &run.leaves {
        assert!(leaf.within_bound(), "TV {} above {}", leaf.tv, leaf.bound);
        assert!((leaf.theory_mass - 1.0).abs() < 1e-9);
    }
    let tube = run.tube.unwrap();
    assert_eq!(tube.len(), 4);
    for t in &tube {
        assert!((t.expected_left - t.expected_right).abs() < 1e-9 * t.expected_left.abs().max(1.0));
        assert!(t.within_three_sigma(), "{t:?}");
    }
}

#[test]
fn freezing_at_the_kink_breaks_the_distribution() {
    let (fol, psi) = torus_scenario();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut cfg = EquivarianceConfig::new(0.0, vec![3.0], Domain::torus(0.0, 2.0 * PI));
    cfg.samples = 2000;
    cfg.seed = 21;
    cfg.dynamics = Dynamics::FrozenAfterKink;
    let run = run_equivariance(&psi, &chart, &cfg).unwrap();
    assert!(run.leaves[0].p < 1e-6);
    assert!(run.leaves[0].tv > 2.0 * run.leaves[0].bound / 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn histogram_mass_accounts_for_every_trajectory(seed in any::<u64>(), a in -0.6_f64..0.6) {
        let psi = presets::two_mode(dirac());
        let fol = WedgeFoliation::new(a, 0.0, 1.0).unwrap();
        let chart = ConfigurationChart::new(&fol, 1);
        let mut cfg = EquivarianceConfig::new(0.0, vec![0.7], Domain::window(vec![-5.0], vec![5.0]));
        cfg.samples = 200;
        cfg.seed = seed;
        cfg.bins_per_axis = 10;
        let run = run_equivariance(&psi, &chart, &cfg).unwrap();
        let leaf = &run.leaves[0];
        let empirical: f64 = leaf.cells.iter().map(|c| c.empirical).sum();
        let theory: f64 = leaf.cells.iter().map(|c| c.theory).sum();
        prop_assert!(empirical <= 1.0 + 1e-12 && theory <= 1.0 + 1e-12);
        prop_assert!((empirical + leaf.outside_empirical + leaf.aborted_fraction - 1.0).abs() < 1e-12);
        prop_assert!((theory + leaf.outside_theory - 1.0).abs() < 1e-12);
    }
}
