//! Execution of scenario run blocks.

mod checks;
mod ensemble;
mod export;
mod slater;
mod trajectories;

use hbdm_core::geometry::{build_dn0_foliation, Dn0Foliation, Foliation, LeafWithKinks, WedgeFoliation, ZigzagFoliation};
use hbdm_core::wavefunction::{DiracRepresentation, MultiTimeWaveFunction, StandardRepresentation};
use num_complex::Complex64;

use crate::error::{CliError, ConfigError};
use crate::output::{ArtifactWriter, Check};
use crate::scenario::{FoliationSpec, RunSpec, Scenario, WavefunctionSpec};

/// A foliation built from its scenario description.
pub enum BuiltFoliation {
    Wedge(WedgeFoliation<1>),
    Zigzag(ZigzagFoliation),
    Dn0 { foliation: Dn0Foliation, tol: f64 },
}

impl BuiltFoliation {
    pub fn build(spec: &FoliationSpec) -> Result<Self, CliError> {
        Ok(match spec {
            FoliationSpec::Flat => BuiltFoliation::Wedge(WedgeFoliation::flat()),
            FoliationSpec::Wedge {
                slope,
                kink_speed,
                lapse,
            } => BuiltFoliation::Wedge(WedgeFoliation::new(*slope, *kink_speed, *lapse)?),
            FoliationSpec::Zigzag {
                slope,
                kink_speed,
                lapse,
                period,
                offset,
                periods,
            } => BuiltFoliation::Zigzag(ZigzagFoliation::new(*slope, *kink_speed, *lapse, *period, *offset, *periods)?),
            FoliationSpec::Dn0 {
                initial,
                margin,
                s_grid,
                x_grid,
                tol,
            } => {
                let initial = LeafWithKinks::new(initial.clone(), *margin)?;
                BuiltFoliation::Dn0 {
                    foliation: build_dn0_foliation(&initial, &s_grid.values(), &x_grid.values(), *tol)?,
                    tol: *tol,
                }
            }
        })
    }

    pub fn as_dyn(&self) -> &dyn Foliation {
        match self {
            BuiltFoliation::Wedge(f) => f,
            BuiltFoliation::Zigzag(f) => f,
            BuiltFoliation::Dn0 { foliation, .. } => foliation,
        }
    }
}

/// Assembles the multi-time wave function described by `spec`.
pub fn build_wavefunction<const D: usize>(spec: &WavefunctionSpec) -> Result<MultiTimeWaveFunction<D>, CliError>
where
    DiracRepresentation<D>: StandardRepresentation,
{
    let rep = DiracRepresentation::<D>::by_name(&spec.representation)?;
    let terms = spec
        .terms
        .iter()
        .map(|term| {
            term.iter()
                .map(|modes| {
                    modes
                        .iter()
                        .map(|m| {
                            let k: [f64; D] = m
                                .k
                                .as_slice()
                                .try_into()
                                .map_err(|_| ConfigError::field("wavefunction.terms.k", format!("need {D} components")))?;
                            Ok((k, m.sign, Complex64::new(m.amplitude[0], m.amplitude[1])))
                        })
                        .collect::<Result<Vec<_>, CliError>>()
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(MultiTimeWaveFunction::from_modes(rep, spec.masses.clone(), &terms)?)
}

fn foliation(scenario: &Scenario) -> Result<BuiltFoliation, CliError> {
    let spec = scenario
        .foliation
        .as_ref()
        .ok_or_else(|| ConfigError::field("foliation", "missing"))?;
    BuiltFoliation::build(spec)
}

fn wavefunction(scenario: &Scenario) -> Result<&WavefunctionSpec, CliError> {
    Ok(scenario
        .wavefunction
        .as_ref()
        .ok_or_else(|| ConfigError::field("wavefunction", "missing"))?)
}

/// Runs the scenario's run block, writing artifacts through `out`.
pub fn execute(scenario: &Scenario, seed: u64, out: &mut ArtifactWriter) -> Result<Vec<Check>, CliError> {
    match &scenario.run {
        RunSpec::Simulate(run) => {
            let fol = foliation(scenario)?;
            let psi = build_wavefunction::<1>(wavefunction(scenario)?)?;
            trajectories::simulate(&psi, fol.as_dyn(), run, seed, out)
        }
        RunSpec::CheckCurrentCondition(run) => {
            let fol = foliation(scenario)?;
            let psi = build_wavefunction::<1>(wavefunction(scenario)?)?;
            checks::current_condition(&psi, fol.as_dyn(), run, seed, out)
        }
        RunSpec::CheckDivergence(run) => {
            let spec = wavefunction(scenario)?;
            if scenario.dimension == 3 {
                checks::divergence(&build_wavefunction::<3>(spec)?, run, seed, out)
            } else {
                checks::divergence(&build_wavefunction::<1>(spec)?, run, seed, out)
            }
        }
        RunSpec::Equivariance(run) => {
            let fol = foliation(scenario)?;
            let psi = build_wavefunction::<1>(wavefunction(scenario)?)?;
            ensemble::equivariance(&scenario.name, &psi, fol.as_dyn(), run, seed, out)
        }
        RunSpec::SlaterDemo(run) => {
            let psi = scenario
                .wavefunction
                .as_ref()
                .map(build_wavefunction::<3>)
                .transpose()?;
            slater::demo(psi.as_ref(), run, seed, out)
        }
        RunSpec::FoliationExport(run) => export::foliation(&foliation(scenario)?, run, seed, out),
    }
}
