pub mod estimate;
pub mod oracle;
pub mod rates;
pub mod simulate;
pub mod verify;

use std::path::Path;

use serde::Serialize;

use crate::config::CliFailure;

/// Every output file travels with a manifest echoing the run inputs.
#[derive(Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config_echo: serde_json::Value,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_runs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: u64, config_echo: serde_json::Value) -> Self {
        Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config_echo,
            outputs: Vec::new(),
            truncated_runs: None,
            acceptance_rate: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliFailure> {
        let path = dir.join(format!("{}_manifest.json", self.command));
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliFailure::Config(crate::config::ConfigError(e.to_string())))?;
        std::fs::write(path, body)?;
        Ok(())
    }
}

pub fn config_echo(path: Option<&std::path::PathBuf>) -> serde_json::Value {
    path.and_then(|p| std::fs::read_to_string(p).ok())
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(serde_json::Value::Null)
}

pub fn write_text(dir: &Path, name: &str, body: &str) -> Result<(), CliFailure> {
    std::fs::write(dir.join(name), body)?;
    Ok(())
}
