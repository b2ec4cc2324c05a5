//! Optional JSON config files. Every key mirrors a command-line flag (with
//! underscores instead of dashes); flags given on the command line win.

use std::path::{Path, PathBuf};

use assim_core::ingestion::ProviderConfig;
use assim_core::synth::Role;
use assim_core::{Error, PopulationSpec, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Populations {
    pub dest: Option<PopulationSpec>,
    pub target: Option<PopulationSpec>,
    pub home: Option<PopulationSpec>,
}

impl Populations {
    /// Configured specs, or placeholders labelled by role.
    pub fn resolve(self) -> (PopulationSpec, PopulationSpec, PopulationSpec) {
        let or_role = |p: Option<PopulationSpec>, role: &str| {
            p.unwrap_or_else(|| PopulationSpec::new(role, "unspecified"))
        };
        (
            or_role(self.dest, "dest"),
            or_role(self.target, "target"),
            or_role(self.home, "home"),
        )
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreFile {
    pub dest: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub home: Option<PathBuf>,
    pub k: Option<f64>,
    pub cap: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub populations: Populations,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessFile {
    pub dest: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub home: Option<PathBuf>,
    pub k: Option<f64>,
    pub sizes: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub floor: Option<usize>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub populations: Populations,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateFile {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub per_area: Option<bool>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    pub alpha: Option<f64>,
    pub interests: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub k: Option<f64>,
    pub dest_total: Option<u64>,
    pub home_total: Option<u64>,
    pub target_total: Option<u64>,
    pub concentration: Option<f64>,
    pub activity_scale: Option<f64>,
    pub activity_population: Option<Role>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FetchFile {
    pub population: Option<PopulationSpec>,
    pub interests: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub provider: Option<ProviderConfig>,
}
