//! Declarative scenario files.

use std::path::{Path, PathBuf};

use hbdm_core::equivariance::{Domain, SamplingOptions};
use hbdm_core::geometry::{LeafShape, DEFAULT_MARGIN};
use hbdm_core::integrator::IntegratorOptions;
use hbdm_core::wavefunction::EnergySign;
use serde::Deserialize;

use crate::error::ConfigError;

/// Version of the scenario format understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    /// Number of spatial dimensions.
    pub dimension: usize,
    /// Number of particles `N`.
    pub particles: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the scenario file.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub foliation: Option<FoliationSpec>,
    #[serde(default)]
    pub wavefunction: Option<WavefunctionSpec>,
    pub run: RunSpec,
}

fn one() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FoliationSpec {
    Flat,
    /// `f_s(x) = a|x − v s| + c s`.
    Wedge {
        slope: f64,
        #[serde(default)]
        kink_speed: f64,
        #[serde(default = "one")]
        lapse: f64,
    },
    /// Periodic sawtooth of wedges.
    Zigzag {
        slope: f64,
        #[serde(default)]
        kink_speed: f64,
        #[serde(default = "one")]
        lapse: f64,
        period: f64,
        #[serde(default)]
        offset: f64,
        periods: usize,
    },
    /// Constant-distance leaves grown from an initial surface.
    Dn0 {
        initial: LeafShape,
        #[serde(default = "default_margin")]
        margin: f64,
        s_grid: Grid,
        x_grid: Grid,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

impl FoliationSpec {
    pub fn has_kinks(&self) -> bool {
        match self {
            FoliationSpec::Flat => false,
            FoliationSpec::Wedge { slope, .. } | FoliationSpec::Zigzag { slope, .. } => *slope != 0.0,
            FoliationSpec::Dn0 { .. } => true,
        }
    }
}

/// Explicit list of values or a uniform grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Uniform { lower: f64, upper: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Uniform { lower, upper, points } => match points {
                0 => Vec::new(),
                1 => vec![*lower],
                n => (0..*n).map(|i| lower + (upper - lower) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    fn check(&self, field: &str) -> Result<(), Invalid> {
        let v = self.values();
        if v.is_empty() {
            return Err(invalid(field, "grid is empty"));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(field, "grid must be strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionSpec {
    #[serde(default = "default_representation")]
    pub representation: String,
    pub masses: Vec<f64>,
    /// `terms[t][j]` lists the plane-wave modes of particle `j` in product term `t`.
    pub terms: Vec<Vec<Vec<ModeSpec>>>,
}

fn default_representation() -> String {
    "dirac".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<f64>,
    #[serde(default = "positive")]
    pub sign: EnergySign,
    /// Real and imaginary part.
    pub amplitude: [f64; 2],
}

fn positive() -> EnergySign {
    EnergySign::Positive
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunSpec {
    Simulate(SimulateRun),
    CheckCurrentCondition(CurrentConditionRun),
    CheckDivergence(DivergenceRun),
    Equivariance(EquivarianceRun),
    SlaterDemo(SlaterRun),
    FoliationExport(FoliationRun),
}

impl RunSpec {
    /// Subcommand that executes this run block.
    pub fn command(&self) -> &'static str {
        match self {
            RunSpec::Simulate(_) => "simulate",
            RunSpec::CheckCurrentCondition(_) => "check-current-condition",
            RunSpec::CheckDivergence(_) => "check-divergence",
            RunSpec::Equivariance(_) => "equivariance",
            RunSpec::SlaterDemo(_) => "slater-demo",
            RunSpec::FoliationExport(_) => "foliation",
        }
    }
}

/// Uniformly drawn starting configurations.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStarts {
    pub count: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRun {
    pub s0: f64,
    pub s1: f64,
    #[serde(default)]
    pub starts: Vec<Vec<f64>>,
    #[serde(default)]
    pub random_starts: Option<RandomStarts>,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    /// Integrate back from `s1` and compare with the start.
    #[serde(default)]
    pub reverse: bool,
    /// Whether non-crossing particles are expected to jump at crossings.
    #[serde(default)]
    pub expect_partner_jumps: Option<bool>,
}

fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentConditionRun {
    #[serde(default = "hundred")]
    pub points: usize,
    pub s_range: [f64; 2],
    pub q_range: [f64; 2],
    /// Random positive-definite scalar products checked besides the Euclidean one.
    #[serde(default = "one_usize")]
    pub random_products: usize,
    #[serde(default = "cc_tolerance")]
    pub tolerance: f64,
}

fn one_usize() -> usize {
    1
}

fn cc_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceRun {
    #[serde(default = "hundred")]
    pub points: usize,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "div_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_t_range")]
    pub t_range: [f64; 2],
    #[serde(default = "default_x_range")]
    pub x_range: [f64; 2],
}

fn default_h() -> f64 {
    1e-3
}

fn div_tolerance() -> f64 {
    1e-6
}

fn default_t_range() -> [f64; 2] {
    [-2.0, 2.0]
}

fn default_x_range() -> [f64; 2] {
    [-3.0, 3.0]
}

fn default_samples() -> usize {
    20_000
}

fn default_bins() -> usize {
    7
}

fn default_aborted() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivarianceRun {
    pub s0: f64,
    pub targets: Vec<f64>,
    pub domain: Domain,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_bins")]
    pub bins_per_axis: usize,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default)]
    pub integrator: Option<IntegratorOptions>,
    #[serde(default)]
    pub chart_speed_bound: Option<f64>,
    #[serde(default)]
    pub non_leaf_time: Option<f64>,
    #[serde(default)]
    pub tube_check: bool,
    /// Also run the frozen-after-kink ensemble, which must exceed the bound.
    #[serde(default)]
    pub negative_control: bool,
    /// Required fraction of trajectories crossing at least one kink.
    #[serde(default)]
    pub min_crossing_fraction: f64,
    #[serde(default = "default_aborted")]
    pub max_aborted_fraction: f64,
}

fn default_modes() -> [usize; 2] {
    [2, 3]
}

fn twenty() -> usize {
    20
}

fn slater_h() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaterRun {
    /// Random field and wedge pairs with distinct one-sided currents.
    #[serde(default = "hundred")]
    pub cases: usize,
    /// Inclusive range of plane waves per field.
    #[serde(default = "default_modes")]
    pub modes: [usize; 2],
    #[serde(default = "twenty")]
    pub divergence_points: usize,
    #[serde(default = "slater_h")]
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoliationRun {
    pub s_grid: Grid,
    pub x_grid: Grid,
    /// Random leaf points at which the distance to the initial surface is checked.
    #[serde(default = "hundred")]
    pub distance_points: usize,
    /// Slope `a` of the initial surface `t = −a|x|`, whose leaves are compared with
    /// `−a|x| + s√(1 − a²)`.
    #[serde(default)]
    pub reference_wedge: Option<f64>,
}

struct Invalid {
    field: String,
    message: String,
}

fn invalid(field: &str, message: impl Into<String>) -> Invalid {
    Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

fn range(field: &str, r: [f64; 2]) -> Result<(), Invalid> {
    if r[0] < r[1] {
        Ok(())
    } else {
        Err(invalid(field, "lower end must be below upper end"))
    }
}

impl Scenario {
    /// Reads and validates a scenario file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| e.at(path))
    }

    /// Parses and validates scenario text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: None,
            message: e.to_string(),
        })?;
        scenario.validate().map_err(|e| ConfigError::Invalid {
            path: None,
            field: e.field,
            message: e.message,
        })?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), Invalid> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        if self.dimension != 1 && self.dimension != 3 {
            return Err(invalid("dimension", "only d = 1 and d = 3 are supported"));
        }
        if self.particles == 0 {
            return Err(invalid("particles", "at least one particle is required"));
        }
        let slater = matches!(self.run, RunSpec::SlaterDemo(_));
        if slater && self.dimension != 3 {
            return Err(invalid("dimension", "slater-demo needs d = 3"));
        }
        if slater && self.particles != 1 {
            return Err(invalid("particles", "slater-demo compares with a single Dirac particle"));
        }
        let any_dimension = slater || matches!(self.run, RunSpec::CheckDivergence(_));
        if !any_dimension && self.dimension != 1 {
            return Err(invalid("dimension", format!("{} runs need d = 1", self.run.command())));
        }
        if let Some(f) = &self.foliation {
            self.validate_foliation(f)?;
        }
        let needs_foliation = matches!(
            self.run,
            RunSpec::Simulate(_) | RunSpec::CheckCurrentCondition(_) | RunSpec::Equivariance(_) | RunSpec::FoliationExport(_)
        );
        if needs_foliation && self.foliation.is_none() {
            return Err(invalid("foliation", format!("{} runs need a foliation", self.run.command())));
        }
        let needs_psi = !matches!(self.run, RunSpec::SlaterDemo(_) | RunSpec::FoliationExport(_));
        match &self.wavefunction {
            Some(w) => self.validate_wavefunction(w)?,
            None if needs_psi => {
                return Err(invalid("wavefunction", format!("{} runs need a wave function", self.run.command())));
            }
            None => {}
        }
        self.validate_run()
    }

    fn validate_foliation(&self, f: &FoliationSpec) -> Result<(), Invalid> {
        match f {
            FoliationSpec::Dn0 {
                s_grid, x_grid, tol, ..
            } => {
                if self.dimension != 1 {
                    return Err(invalid("foliation.kind", "the dn0 builder needs d = 1"));
                }
                s_grid.check("foliation.s_grid")?;
                x_grid.check("foliation.x_grid")?;
                if x_grid.values().len() < 2 {
                    return Err(invalid("foliation.x_grid", "at least two points are required"));
                }
                if s_grid.values()[0] <= 0.0 {
                    return Err(invalid("foliation.s_grid", "labels must be positive"));
                }
                if !(*tol > 0.0) {
                    return Err(invalid("foliation.tol", "tolerance must be positive"));
                }
            }
            FoliationSpec::Zigzag { period, periods, .. } => {
                if !(*period > 0.0) || *periods == 0 {
                    return Err(invalid("foliation.period", "period and periods must be positive"));
                }
            }
            FoliationSpec::Flat | FoliationSpec::Wedge { .. } => {}
        }
        Ok(())
    }

    fn validate_wavefunction(&self, w: &WavefunctionSpec) -> Result<(), Invalid> {
        if w.masses.len() != self.particles {
            return Err(invalid(
                "wavefunction.masses",
                format!("{} masses for {} particles", w.masses.len(), self.particles),
            ));
        }
        if w.masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(invalid("wavefunction.masses", "masses must be nonnegative"));
        }
        if w.terms.is_empty() {
            return Err(invalid("wavefunction.terms", "at least one product term is required"));
        }
        for (t, term) in w.terms.iter().enumerate() {
            if term.len() != self.particles {
                return Err(invalid(
                    &format!("wavefunction.terms[{t}]"),
                    format!("{} factors for {} particles", term.len(), self.particles),
                ));
            }
            for (j, modes) in term.iter().enumerate() {
                if modes.is_empty() {
                    return Err(invalid(&format!("wavefunction.terms[{t}][{j}]"), "no modes"));
                }
                if modes.iter().any(|m| m.k.len() != self.dimension) {
                    return Err(invalid(
                        &format!("wavefunction.terms[{t}][{j}].k"),
                        format!("wave vectors need {} components", self.dimension),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<(), Invalid> {
        let n = self.particles;
        match &self.run {
            RunSpec::Simulate(r) => {
                if r.starts.is_empty() && r.random_starts.is_none() {
                    return Err(invalid("run.starts", "give starts or random_starts"));
                }
                if r.starts.iter().any(|q| q.len() != n) {
                    return Err(invalid("run.starts", format!("every start needs {n} coordinates")));
                }
                if let Some(rs) = &r.random_starts {
                    range("run.random_starts", [rs.lower, rs.upper])?;
                }
                if r.s0 == r.s1 {
                    return Err(invalid("run.s1", "s1 must differ from s0"));
                }
            }
            RunSpec::CheckCurrentCondition(r) => {
                range("run.s_range", r.s_range)?;
                range("run.q_range", r.q_range)?;
                if !self.foliation.as_ref().is_some_and(FoliationSpec::has_kinks) {
                    return Err(invalid("foliation", "the current condition needs a kinked foliation"));
                }
            }
            RunSpec::CheckDivergence(r) => {
                range("run.t_range", r.t_range)?;
                range("run.x_range", r.x_range)?;
                if !(1e-5..=1e-2).contains(&r.h) {
                    return Err(invalid("run.h", "step must lie in [1e-5, 1e-2]"));
                }
            }
            RunSpec::Equivariance(r) => {
                if r.targets.is_empty() {
                    return Err(invalid("run.targets", "at least one target leaf is required"));
                }
                if r.bins_per_axis == 0 {
                    return Err(invalid("run.bins_per_axis", "must be positive"));
                }
                r.domain.validate(n).map_err(|e| invalid("run.domain", e.to_string()))?;
            }
            RunSpec::SlaterDemo(r) => {
                if r.modes[0] == 0 || r.modes[0] > r.modes[1] {
                    return Err(invalid("run.modes", "need 1 <= min <= max"));
                }
            }
            RunSpec::FoliationExport(r) => {
                r.s_grid.check("run.s_grid")?;
                r.x_grid.check("run.x_grid")?;
            }
        }
        Ok(())
    }
}
