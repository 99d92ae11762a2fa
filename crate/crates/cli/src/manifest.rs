use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
/// Resolved parameters; feed back with `--config` to replay the run.
pub const CONFIG_FILE: &str = "run.kv";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub master_seed: u64,
    pub derived_seeds: BTreeMap<String, u64>,
    pub build: String,
    pub started_unix: u64,
    pub wall_clock_secs: Option<f64>,
    pub outputs: Vec<String>,
    #[serde(skip)]
    started: Option<Instant>,
    #[serde(skip)]
    dir: PathBuf,
}

impl RunManifest {
    pub fn new(command: &str, dir: &Path, master_seed: u64, config: BTreeMap<String, String>) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
        Self {
            command: command.to_string(),
            config,
            master_seed,
            derived_seeds: BTreeMap::new(),
            build: format!("synergy {} ({profile})", env!("CARGO_PKG_VERSION")),
            started_unix,
            wall_clock_secs: None,
            outputs: Vec::new(),
            started: Some(Instant::now()),
            dir: dir.to_path_buf(),
        }
    }

    fn write(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(self.dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Written before any result file.
    pub fn begin(&self, config_text: &str) -> Result<(), CliError> {
        self.write()?;
        std::fs::write(self.dir.join(CONFIG_FILE), config_text)?;
        Ok(())
    }

    /// Creates `name` in the output directory and records it.
    pub fn output(&mut self, name: &str) -> Result<std::fs::File, CliError> {
        self.outputs.push(name.to_string());
        Ok(std::fs::File::create(self.dir.join(name))?)
    }

    pub fn finish(&mut self) -> Result<(), CliError> {
        self.wall_clock_secs = self.started.map(|t| t.elapsed().as_secs_f64());
        self.write()
    }
}
