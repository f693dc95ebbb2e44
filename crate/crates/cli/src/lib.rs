//! Scenario-driven front end for `hbdm-core`: reads a scenario file, runs it
//! and writes CSV/JSON artifacts plus a manifest.

mod error;
pub mod output;
pub mod runs;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use error::{CliError, ConfigError};
pub use output::{Check, Manifest};
pub use scenario::Scenario;

/// Command-line request for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: String,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

fn output_dir(inv: &Invocation, scenario: &Scenario) -> Result<PathBuf, ConfigError> {
    if let Some(out) = &inv.out {
        return Ok(out.clone());
    }
    let rel = scenario
        .output
        .as_ref()
        .ok_or_else(|| ConfigError::field("output", "no output directory; set `output` or pass --out"))?;
    let base = inv.config.parent().unwrap_or(Path::new("."));
    Ok(base.join(rel))
}

/// Loads, validates and executes a scenario.
pub fn run_scenario(inv: &Invocation) -> Result<RunOutcome, CliError> {
    let text = std::fs::read_to_string(&inv.config).map_err(|source| ConfigError::Read {
        path: inv.config.clone(),
        source,
    })?;
    let scenario = Scenario::parse(&text).map_err(|e| e.at(&inv.config))?;
    if scenario.run.command() != inv.command {
        return Err(ConfigError::field(
            "run.kind",
            format!("scenario runs `{}`, not `{}`", scenario.run.command(), inv.command),
        )
        .at(&inv.config)
        .into());
    }
    let dir = output_dir(inv, &scenario).map_err(|e| e.at(&inv.config))?;
    let seed = inv.seed.unwrap_or(scenario.seed);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = inv.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Threads(e.to_string()))?;
    let mut writer = output::ArtifactWriter::create(&dir)?;
    let checks = pool.install(|| runs::execute(&scenario, seed, &mut writer))?;
    let manifest = Manifest::new(&scenario.name, &text, &inv.command, seed, writer.finish(), checks);
    let manifest_path = output::write_manifest(&dir, &manifest)?;
    Ok(RunOutcome { manifest, manifest_path })
}
