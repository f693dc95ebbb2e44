use hbdm_core::geometry::MinkowskiPoint;
use hbdm_core::wavefunction::{
    check_divergence, current_tensor, presets, CMatrix, DiracRepresentation, EnergySign, MultiTimeWaveFunction,
    SpinorField, WavefunctionError,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_config<const D: usize>(rng: &mut ChaCha8Rng, n: usize) -> Vec<MinkowskiPoint<D>> {
    (0..n)
        .map(|_| MinkowskiPoint::new(rng.random_range(-3.0..3.0), std::array::from_fn(|_| rng.random_range(-5.0..5.0))))
        .collect()
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.qr().q()
}

/// `e^{λ t_1} ψ`, which solves no Dirac equation.
struct Damped<'a> {
    inner: &'a MultiTimeWaveFunction<1>,
    lambda: f64,
}

impl SpinorField<1> for Damped<'_> {
    fn particles(&self) -> usize {
        self.inner.particles()
    }
    fn representation(&self) -> &DiracRepresentation<1> {
        self.inner.representation()
    }
    fn evaluate(&self, config: &[MinkowskiPoint<1>]) -> Vec<Complex64> {
        let f = (self.lambda * config[0].t).exp();
        self.inner.evaluate(config).into_iter().map(|v| v * f).collect()
    }
}

#[test]
fn currents_do_not_depend_on_the_representation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi = presets::entangled_pair(DiracRepresentation::<1>::dirac());
    let named = presets::entangled_pair(DiracRepresentation::<1>::chiral());
    let u = random_unitary(&mut rng, 2);
    let rotated = psi.transformed("random", &u).unwrap();
    assert!(rotated.representation().clifford_defect() < 1e-13);
    for _ in 0..1000 {
        let cfg = random_config::<1>(&mut rng, 2);
        let t = current_tensor(&psi, &cfg).unwrap();
        for other in [&named, &rotated] {
            let o = current_tensor(other, &cfg).unwrap();
            for (a, b) in t.components().iter().zip(o.components()) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn currents_do_not_depend_on_the_representation_in_3d() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let modes = vec![
        ([0.3, -0.2, 0.5], EnergySign::Positive, Complex64::new(1.0, 0.0)),
        ([-0.4, 0.1, 0.0], EnergySign::Positive, Complex64::new(0.2, 0.7)),
    ];
    let psi = MultiTimeWaveFunction::from_modes(DiracRepresentation::<3>::dirac(), vec![0.8], &[vec![modes.clone()]]).unwrap();
    let weyl = MultiTimeWaveFunction::from_modes(DiracRepresentation::<3>::chiral(), vec![0.8], &[vec![modes]]).unwrap();
    let rotated = psi.transformed("random", &random_unitary(&mut rng, 4)).unwrap();
    for _ in 0..200 {
        let cfg = random_config::<3>(&mut rng, 1);
        let t = current_tensor(&psi, &cfg).unwrap();
        for other in [&weyl, &rotated] {
            let o = current_tensor(other, &cfg).unwrap();
            for (a, b) in t.components().iter().zip(o.components()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let j = t.components();
        let spatial = (j[1] * j[1] + j[2] * j[2] + j[3] * j[3]).sqrt();
        assert!(spatial <= j[0] * (1.0 + 1e-12));
    }
}

#[test]
fn divergence_vanishes_for_exact_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let states = [
        presets::single_mode(DiracRepresentation::<1>::dirac(), 0.6),
        presets::two_mode(DiracRepresentation::<1>::chiral()),
        presets::entangled_pair(DiracRepresentation::<1>::dirac()),
    ];
    for psi in &states {
        for _ in 0..100 {
            let cfg = random_config::<1>(&mut rng, psi.particles());
            for r in check_divergence(psi, &cfg, 1e-3).unwrap() {
                assert!(r < 1e-6, "residual {r}");
            }
        }
    }
}

#[test]
fn divergence_of_3d_plane_waves_vanishes() {
    let psi = MultiTimeWaveFunction::from_modes(
        DiracRepresentation::<3>::dirac(),
        vec![1.0],
        &[vec![vec![
            ([0.3, -0.2, 0.5], EnergySign::Positive, Complex64::new(1.0, 0.0)),
            ([0.0, 0.6, -0.1], EnergySign::Positive, Complex64::new(0.5, -0.5)),
        ]]],
    )
    .unwrap();
    let r = check_divergence(&psi, &[MinkowskiPoint::new(0.4, [1.0, -2.0, 0.3])], 1e-3).unwrap();
    assert!(r[0] < 1e-6);
}

#[test]
fn damped_state_violates_divergence_by_product_rule_amount() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = presets::entangled_pair(DiracRepresentation::<1>::dirac());
    let lambda = 0.05;
    let damped = Damped { inner: &psi, lambda };
    for _ in 0..20 {
        let cfg = random_config::<1>(&mut rng, 2);
        let r = check_divergence(&damped, &cfg, 1e-3).unwrap();
        // ∂_{t_1} e^{2λt_1} T = 2λ T, so slot 1 picks up 2λ max_ν |T^{0ν}|
        let t = current_tensor(&damped, &cfg).unwrap();
        let expected = 2.0 * lambda * (0..2).map(|nu| t.get(&[0, nu]).abs()).fold(0.0, f64::max) / t.scale();
        assert!((r[0] - expected).abs() < 1e-6, "{} vs {expected}", r[0]);
        assert!(r[0] > 1e-3);
        assert!(r[1] < 1e-6);
    }
}

#[test]
fn non_solution_rejects_bad_step() {
    let psi = presets::two_mode(DiracRepresentation::<1>::dirac());
    assert_eq!(
        check_divergence(&psi, &[MinkowskiPoint::new(0.0, [0.0])], 1e-6),
        Err(WavefunctionError::InvalidStep(1e-6))
    );
}

proptest! {
    #[test]
    fn density_component_is_nonnegative(t1 in -5.0..5.0f64, x1 in -5.0..5.0f64, t2 in -5.0..5.0f64, x2 in -5.0..5.0f64) {
        let psi = presets::entangled_pair(DiracRepresentation::<1>::dirac());
        let cfg = [MinkowskiPoint::new(t1, [x1]), MinkowskiPoint::new(t2, [x2])];
        let t = current_tensor(&psi, &cfg).unwrap();
        prop_assert!(t.density() >= 0.0);
        prop_assert!(t.max_imaginary() <= 1e-12 * t.scale().max(1.0));
    }
}
