use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    /// Declared distribution of any generated graphs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_graph_model: Option<String>,
    pub created_unix_seconds: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs as they are read and outputs as they are written, then
/// writes `manifest.json` into the output directory.
pub struct RunRecorder {
    command: String,
    out_dir: Option<PathBuf>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    random_graph_model: Option<String>,
}

impl RunRecorder {
    pub fn new(command: &str, out_dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        }
        Ok(Self {
            command: command.to_string(),
            out_dir: out_dir.map(Path::to_path_buf),
            inputs: Vec::new(),
            outputs: Vec::new(),
            random_graph_model: None,
        })
    }

    pub fn read_input(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
    }

    pub fn declare_random_graphs(&mut self, model: String) {
        self.random_graph_model = Some(model);
    }

    /// No-op without an output directory.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let Some(dir) = &self.out_dir else {
            return Ok(());
        };
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn finish(self, config: serde_json::Value) -> Result<(), CliError> {
        let Some(dir) = &self.out_dir else {
            return Ok(());
        };
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            inputs: self.inputs,
            outputs: self.outputs,
            random_graph_model: self.random_graph_model,
            created_unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = dir.join("manifest.json");
        fs::write(&path, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}
