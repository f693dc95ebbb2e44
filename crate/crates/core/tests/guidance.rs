use hbdm_core::geometry::{Foliation, MinkowskiPoint, Side, WedgeFoliation};
use hbdm_core::guidance::*;
use hbdm_core::wavefunction::{current_tensor, presets, DiracRepresentation, EnergySign, MultiTimeWaveFunction};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dirac() -> DiracRepresentation<1> {
    DiracRepresentation::<1>::dirac()
}

fn rest_pair() -> MultiTimeWaveFunction<1> {
    let one = Complex64::new(1.0, 0.0);
    MultiTimeWaveFunction::from_modes(
        dirac(),
        vec![1.0, 1.0],
        &[vec![vec![([0.0], EnergySign::Positive, one)], vec![([0.0], EnergySign::Positive, one)]]],
    )
    .unwrap()
}

fn wedge() -> WedgeFoliation {
    WedgeFoliation::new(-0.5, 0.0, 0.75_f64.sqrt()).unwrap()
}

#[test]
fn rest_product_state_stays_at_rest_on_any_foliation() {
    let psi = rest_pair();
    let moving = WedgeFoliation::new(0.4, 0.6, 1.0).unwrap();
    for fol in [&WedgeFoliation::flat() as &dyn Foliation, &wedge(), &moving] {
        let chart = ConfigurationChart::new(fol, 2);
        let v = guidance_velocity(&psi, &chart, 0.7, &[-1.3, 2.1], &[Side::Smooth; 2]).unwrap();
        for vj in v {
            assert!((vj[0] - 1.0).abs() < 1e-15 && vj[1].abs() < 1e-14);
        }
    }
}

#[test]
fn single_particle_velocity_ignores_the_foliation() {
    let psi = presets::single_mode(dirac(), 0.8);
    let t = current_tensor(&psi, &[MinkowskiPoint::new(0.0, [0.0])]).unwrap();
    let expected = t.get(&[1]) / t.get(&[0]);
    assert!((expected - 0.8 / 1.64_f64.sqrt()).abs() < 1e-12);
    let fols: [Box<dyn Foliation>; 3] = [
        Box::new(WedgeFoliation::flat()),
        Box::new(wedge()),
        Box::new(WedgeFoliation::new(0.3, -1.0, 1.0).unwrap()),
    ];
    for fol in &fols {
        let chart = ConfigurationChart::new(fol.as_ref(), 1);
        for x in [-2.0, 0.4, 3.0] {
            let v = guidance_velocity(&psi, &chart, 1.1, &[x], &[Side::Smooth]).unwrap();
            assert!((v[0][1] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn entangled_velocity_depends_on_the_other_particles_side() {
    let psi = presets::entangled_pair(dirac());
    let fol = wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    let q = [0.9, 0.0];
    let l = guidance_velocity(&psi, &chart, 1.0, &q, &[Side::Smooth, Side::Left]).unwrap();
    let r = guidance_velocity(&psi, &chart, 1.0, &q, &[Side::Smooth, Side::Right]).unwrap();
    assert!((l[0][1] - r[0][1]).abs() > 1e-3);
    assert!((l[1][1] - r[1][1]).abs() < 1e-14);
    assert!(matches!(
        guidance_velocity(&psi, &chart, 1.0, &q, &[Side::Smooth; 2]),
        Err(GuidanceError::Geometry(_))
    ));
}

#[test]
fn density_on_flat_and_wedge_leaves() {
    let psi = presets::single_mode(dirac(), 0.0);
    let flat = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&flat, 1);
    assert!((rho_sigma(&psi, &chart, 0.3, &[1.0], &[Side::Smooth]).unwrap() - 1.0).abs() < 1e-14);

    // product state: ρ factorizes into single-particle contractions
    let a = presets::single_mode(dirac(), 0.6);
    let b = presets::two_mode(dirac());
    let pair = MultiTimeWaveFunction::new(
        dirac(),
        vec![1.0, 1.0],
        vec![hbdm_core::wavefunction::ProductTerm {
            coefficient: Complex64::new(1.0, 0.0),
            factors: vec![a.terms()[0].factors[0].clone(), b.terms()[0].factors[0].clone()],
        }],
    )
    .unwrap();
    let fol = WedgeFoliation::new(0.4, 0.2, 1.0).unwrap();
    let c2 = ConfigurationChart::new(&fol, 2);
    let c1 = ConfigurationChart::new(&fol, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let s = rng.random_range(-1.0..1.0);
        let q: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let joint = rho_sigma(&pair, &c2, s, &q, &[Side::Smooth; 2]).unwrap();
        let ra = rho_sigma(&a, &c1, s, &q[..1], &[Side::Smooth]).unwrap();
        let rb = rho_sigma(&b, &c1, s, &q[1..], &[Side::Smooth]).unwrap();
        assert!((joint - ra * rb).abs() < 1e-12 * joint.max(1.0));
    }

    let psi = presets::entangled_pair(dirac());
    let w = wedge();
    let chart = ConfigurationChart::new(&w, 2);
    let l = rho_sigma(&psi, &chart, 1.0, &[0.9, 0.0], &[Side::Smooth, Side::Left]).unwrap();
    let r = rho_sigma(&psi, &chart, 1.0, &[0.9, 0.0], &[Side::Smooth, Side::Right]).unwrap();
    assert!((l - r).abs() > 1e-6);
}

#[test]
fn flat_chart_current_is_density_and_velocity() {
    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::flat();
    let chart = ConfigurationChart::new(&fol, 2);
    let (s, q) = (0.4, [0.2, -1.5]);
    let j = chart_current(&psi, &chart, s, &q, &[Side::Smooth; 2]).unwrap();
    let rho = rho_sigma(&psi, &chart, s, &q, &[Side::Smooth; 2]).unwrap();
    assert!((j.j0 - rho).abs() < 1e-14);
    let v = guidance_velocity(&psi, &chart, s, &q, &[Side::Smooth; 2]).unwrap();
    let w = j.velocity().unwrap();
    for k in 0..2 {
        assert!((w[k] - v[k][1]).abs() < 1e-13);
    }
}

/// Classic RK4 on the chart ODE for one particle, then maps back to spacetime.
fn chart_world_line(psi: &MultiTimeWaveFunction<1>, chart: &ConfigurationChart<'_>, q0: f64, s1: f64) -> Vec<(f64, f64)> {
    let f = |s: f64, q: f64| chart_current(psi, chart, s, &[q], &[Side::Smooth]).unwrap().velocity().unwrap()[0];
    let (mut s, mut q, h) = (0.0, q0, s1 / 200.0);
    let mut out = vec![];
    for _ in 0..200 {
        let k1 = f(s, q);
        let k2 = f(s + h / 2.0, q + h / 2.0 * k1);
        let k3 = f(s + h / 2.0, q + h / 2.0 * k2);
        let k4 = f(s + h, q + h * k3);
        q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
        let t = chart.foliation().height(s, q, Side::Smooth).unwrap();
        out.push((t, q));
    }
    out
}

#[test]
fn chart_trajectories_map_back_to_straight_world_lines() {
    let fol = WedgeFoliation::new(0.3, 0.0, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 1);
    // rest state: dq/ds = 0 in the chart, x = const in spacetime
    let rest = presets::single_mode(dirac(), 0.0);
    for (_, x) in chart_world_line(&rest, &chart, 2.0, 1.5) {
        assert!((x - 2.0).abs() < 1e-14);
    }
    // moving plane wave stays off the kink for q0 = 2, s ≤ 1.5
    let psi = presets::single_mode(dirac(), 0.5);
    let v = 0.5 / 1.25_f64.sqrt();
    let t0 = fol.height(0.0, 2.0, Side::Smooth).unwrap();
    for (t, x) in chart_world_line(&psi, &chart, 2.0, 1.5) {
        assert!((x - 2.0 - v * (t - t0)).abs() < 1e-9, "{x} {t}");
    }
}

#[test]
fn continuity_equation_holds_away_from_kinks() {
    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::new(-0.5, 0.3, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-3;
    let sides = [Side::Smooth; 2];
    let mut checked = 0;
    while checked < 50 {
        let s = rng.random_range(-1.0..1.0);
        let q: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        if q.iter().any(|x| (x - 0.3 * s).abs() < 0.05) {
            continue;
        }
        let at = |s: f64, q: [f64; 2]| chart_current(&psi, &chart, s, &q, &sides).unwrap();
        let center = at(s, q);
        let mut div = (at(s + h, q).j0 - at(s - h, q).j0) / (2.0 * h);
        for k in 0..2 {
            let (mut qp, mut qm) = (q, q);
            qp[k] += h;
            qm[k] -= h;
            div += (at(s, qp).jvec[k] - at(s, qm).jvec[k]) / (2.0 * h);
        }
        let scale = center.components().iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        assert!(div.abs() < 1e-5 * scale, "continuity residual {}", div.abs() / scale);
        checked += 1;
    }
}

#[test]
fn current_form_components_for_a_rest_particle() {
    let psi = presets::single_mode(dirac(), 0.0);
    let j = current_form(&psi, &[MinkowskiPoint::new(0.2, [0.7])]).unwrap();
    assert_eq!((j.dim(), j.degree()), (2, 1));
    assert!(j.get(&[0]).abs() < 1e-15);
    assert!((j.get(&[1]) - 1.0).abs() < 1e-14);
}

#[test]
fn index_orderings_agree_and_forms_are_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let psi = presets::entangled_pair(dirac());
    for _ in 0..5 {
        let cfg = [
            MinkowskiPoint::new(rng.random_range(-1.0..1.0), [rng.random_range(-2.0..2.0)]),
            MinkowskiPoint::new(rng.random_range(-1.0..1.0), [rng.random_range(-2.0..2.0)]),
        ];
        let j = current_form(&psi, &cfg).unwrap();
        let interleaved = current_form_interleaved(&psi, &cfg).unwrap();
        assert!(j.max_abs_difference(&interleaved) < 1e-14);
        assert!(j.max_abs() > 0.1);
        for a in 0..4 {
            for b in 0..4 {
                assert!((j.get(&[a, b]) + j.get(&[b, a])).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn orderings_agree_in_three_dimensions() {
    let one = Complex64::new(1.0, 0.0);
    let psi = MultiTimeWaveFunction::<3>::from_modes(
        DiracRepresentation::<3>::dirac(),
        vec![1.0, 1.0],
        &[
            vec![vec![([0.2, 0.1, 0.0], EnergySign::Positive, one)], vec![([0.0, -0.3, 0.1], EnergySign::Positive, one)]],
            vec![vec![([-0.1, 0.0, 0.4], EnergySign::Positive, one)], vec![([0.3, 0.2, 0.0], EnergySign::Positive, one)]],
        ],
    )
    .unwrap();
    let cfg = [MinkowskiPoint::new(0.1, [0.3, -0.2, 0.5]), MinkowskiPoint::new(-0.4, [1.0, 0.0, -0.7])];
    let j = current_form(&psi, &cfg).unwrap();
    assert_eq!((j.dim(), j.degree()), (8, 6));
    assert!(j.max_abs_difference(&current_form_interleaved(&psi, &cfg).unwrap()) < 1e-13);
    assert!(j.max_abs() > 0.01);
}

#[test]
fn pushforward_identity_on_flat_and_wedge_charts() {
    let single = presets::two_mode(dirac());
    let flat = WedgeFoliation::flat();
    let r = pushforward_identity_check(&single, &ConfigurationChart::new(&flat, 1), 0.3, &[0.5], &[Side::Smooth]).unwrap();
    assert!(r.residual < 1e-14);

    let psi = presets::entangled_pair(dirac());
    let fol = WedgeFoliation::new(-0.5, 0.4, 1.0).unwrap();
    let chart = ConfigurationChart::new(&fol, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let s = rng.random_range(-2.0..2.0);
        let q = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        let r = pushforward_identity_check(&psi, &chart, s, &q, &[Side::Smooth; 2]).unwrap();
        assert!(r.residual < 1e-9, "{}", r.residual);
    }
    assert!(matches!(
        pushforward_identity_check(&psi, &chart, 1.0, &[0.4, 2.0], &[Side::Smooth; 2]),
        Err(GuidanceError::OnKinkSet { .. })
    ));
}

#[test]
fn form_is_continuous_across_the_kink_but_its_restriction_is_not() {
    let psi = presets::entangled_pair(dirac());
    let fol = wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    let gap = pushforward_side_gap(&psi, &chart, 1.0, &[0.8, 0.0], 1).unwrap();
    assert!(gap.form_gap < 1e-12);
    assert!(gap.pushforward_gap > 1e-3 * gap.scale);
    // each side limit still satisfies the identity with its own current
    for side in [Side::Left, Side::Right] {
        let r = pushforward_identity_check(&psi, &chart, 1.0, &[0.8, 0.0], &[Side::Smooth, side]).unwrap();
        assert!(r.residual < 1e-12);
    }
}

#[test]
fn current_condition_holds_for_product_and_entangled_states() {
    let fol = wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    let rec = current_condition_check(&rest_pair(), &chart, 1.0, &[0.7, 0.0], 1, 0, &ScalarProduct::Euclidean).unwrap();
    assert!(rec.mismatch < 1e-10);

    let psi = presets::entangled_pair(dirac());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spd = ScalarProduct::random(3, &mut rng);
    for _ in 0..100 {
        let s = rng.random_range(0.1..3.0);
        let slot = rng.random_range(0..2);
        let mut q: [f64; 2] = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        if q[1 - slot].abs() < 1e-3 {
            q[1 - slot] += 0.1;
        }
        let e = current_condition_check(&psi, &chart, s, &q, slot, 0, &ScalarProduct::Euclidean).unwrap();
        let g = current_condition_check(&psi, &chart, s, &q, slot, 0, &spd).unwrap();
        assert!(e.mismatch < 1e-9 && g.mismatch < 1e-9);
        assert_eq!(e.same_sign, g.same_sign);
        assert!((e.flux_left - g.flux_left).abs() < 1e-9 * e.flux_left.abs().max(1.0));
    }
}

#[test]
fn corner_points_are_rejected() {
    let psi = presets::entangled_pair(dirac());
    let fol = wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    assert!(matches!(
        current_condition_check(&psi, &chart, 1.0, &[0.0, 0.0], 0, 0, &ScalarProduct::Euclidean),
        Err(GuidanceError::CornerPoint { .. })
    ));
}

#[test]
fn records_serialize_to_json_objects() {
    let fol = wedge();
    let chart = ConfigurationChart::new(&fol, 2);
    let rec = current_condition_check(&rest_pair(), &chart, 1.0, &[0.7, 0.0], 1, 0, &ScalarProduct::Euclidean).unwrap();
    let json = serde_json::to_value(&rec).unwrap();
    for key in ["s", "q", "slot", "flux_left", "flux_right", "mismatch", "same_sign"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

proptest! {
    #[test]
    fn guidance_is_causal(s in -2.0..2.0f64, q1 in -4.0..4.0f64, q2 in -4.0..4.0f64) {
        let psi = presets::entangled_pair(DiracRepresentation::<1>::dirac());
        let fol = WedgeFoliation::new(0.6, 0.5, 1.0).unwrap();
        let chart = ConfigurationChart::new(&fol, 2);
        prop_assume!((q1 - 0.5 * s).abs() > 1e-6 && (q2 - 0.5 * s).abs() > 1e-6);
        for v in guidance_velocity(&psi, &chart, s, &[q1, q2], &[Side::Smooth; 2]).unwrap() {
            prop_assert!(v[1].abs() <= 1.0 + 1e-10);
        }
    }
}
