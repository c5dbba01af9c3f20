//! Run configuration: a JSON file, overridden by command-line flags, and
//! always written next to the outputs in resolved form.

use std::fs;
use std::path::{Path, PathBuf};

use nsdi::analysis::BinSpec;
use nsdi::integrator::IntegratorConfig;
use nsdi::saddle::PerturbationSpec;
use nsdi::sampling::EnsembleSpec;
use nsdi::FieldParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const RESOLVED_CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bins {
    pub parallel: BinSpec,
    pub perpendicular: BinSpec,
}

impl Default for Bins {
    fn default() -> Self {
        Self {
            parallel: BinSpec::PARALLEL,
            perpendicular: BinSpec::PERPENDICULAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub field: FieldParams,
    pub ensemble: EnsembleSpec,
    /// `None` derives pulse-plus-coda settings from the field.
    pub integrator: Option<IntegratorConfig>,
    pub bins: Bins,
    pub perturbation: PerturbationSpec,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            field: FieldParams::four_cycle(0.137, nsdi::field::DEFAULT_OMEGA, 0.0).expect("default pulse is valid"),
            ensemble: EnsembleSpec::new(-0.58, 100_000, 1),
            integrator: None,
            bins: Bins::default(),
            perturbation: PerturbationSpec::default(),
            output_dir: PathBuf::from("nsdi-out"),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "config schema {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        self.integrator
            .unwrap_or_else(|| IntegratorConfig::for_pulse(self.field.t_d))
    }

    /// Fills derived fields and checks every section.
    pub fn resolve(mut self) -> CliResult<Self> {
        self.field.validate()?;
        self.ensemble = self.ensemble.resolved()?;
        self.ensemble.validate()?;
        let integrator = self.integrator();
        integrator.validate()?;
        self.integrator = Some(integrator);
        self.bins.parallel.validate()?;
        self.bins.perpendicular.validate()?;
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be >= 1".into()));
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Creates the output directory and writes the resolved config into it.
    pub fn persist(&self) -> CliResult<()> {
        fs::create_dir_all(&self.output_dir)
            .map_err(CliError::io(format!("creating {}", self.output_dir.display())))?;
        let path = self.output_dir.join(RESOLVED_CONFIG_FILE);
        fs::write(&path, self.to_json() + "\n").map_err(CliError::io(format!("writing {}", path.display())))
    }
}
