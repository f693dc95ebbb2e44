use num_complex::Complex64;

use super::{DiracRepresentation, EnergySign, MultiTimeWaveFunction};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// One particle of unit mass in a single positive-energy mode `k`.
pub fn single_mode(rep: DiracRepresentation<1>, k: f64) -> MultiTimeWaveFunction<1> {
    MultiTimeWaveFunction::from_modes(rep, vec![1.0], &[vec![vec![([k], EnergySign::Positive, c(1.0, 0.0))]]])
        .expect("valid preset")
}

/// One particle of unit mass in a two-mode superposition with a beat pattern.
pub fn two_mode(rep: DiracRepresentation<1>) -> MultiTimeWaveFunction<1> {
    MultiTimeWaveFunction::from_modes(
        rep,
        vec![1.0],
        &[vec![vec![
            ([0.5], EnergySign::Positive, c(1.0, 0.0)),
            ([-0.8], EnergySign::Positive, c(0.6, 0.3)),
        ]]],
    )
    .expect("valid preset")
}

/// Two unit-mass particles in a sum of two product states.
pub fn entangled_pair(rep: DiracRepresentation<1>) -> MultiTimeWaveFunction<1> {
    MultiTimeWaveFunction::from_modes(
        rep,
        vec![1.0, 1.0],
        &[
            vec![
                vec![([0.6], EnergySign::Positive, c(1.0, 0.0))],
                vec![([-0.4], EnergySign::Positive, c(1.0, 0.0))],
            ],
            vec![
                vec![([-0.5], EnergySign::Positive, c(0.0, 0.8))],
                vec![([0.7], EnergySign::Positive, c(1.0, 0.0))],
            ],
        ],
    )
    .expect("valid preset")
}

/// Two unit-mass particles in a single product state.
pub fn product_pair(rep: DiracRepresentation<1>) -> MultiTimeWaveFunction<1> {
    MultiTimeWaveFunction::from_modes(
        rep,
        vec![1.0, 1.0],
        &[vec![
            vec![
                ([0.6], EnergySign::Positive, c(1.0, 0.0)),
                ([-0.3], EnergySign::Positive, c(0.5, 0.2)),
            ],
            vec![([-0.4], EnergySign::Positive, c(1.0, 0.0))],
        ]],
    )
    .expect("valid preset")
}

/// Two unit-mass particles in a sum of two product states with integer
/// wave numbers, so the wave function has period `2π` in each coordinate.
pub fn periodic_entangled_pair(rep: DiracRepresentation<1>) -> MultiTimeWaveFunction<1> {
    MultiTimeWaveFunction::from_modes(
        rep,
        vec![1.0, 1.0],
        &[
            vec![
                vec![([2.0], EnergySign::Positive, c(1.0, 0.0))],
                vec![([1.0], EnergySign::Positive, c(1.0, 0.0))],
            ],
            vec![
                vec![([1.0], EnergySign::Positive, c(0.0, 0.8))],
                vec![([0.0], EnergySign::Positive, c(1.0, 0.0))],
            ],
        ],
    )
    .expect("valid preset")
}
