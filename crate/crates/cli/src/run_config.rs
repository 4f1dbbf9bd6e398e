//! Provenance sidecar written next to command outputs: the resolved flags,
//! seeds, and content hashes of every input file, so a run can be replayed
//! or audited later.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use framecrf::error::Result;
use framecrf::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Pretty-prints any serializable value with a trailing newline.
pub fn to_pretty_json(value: &impl Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Serialize)]
pub struct InputFile {
    /// What the file was used as ("corpus", "lexicon", ...).
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub tool: String,
    pub command: String,
    pub flags: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<InputFile>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunConfig {
    pub fn new(command: &str) -> RunConfig {
        RunConfig {
            tool: format!("framecrf {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            flags: BTreeMap::new(),
            inputs: Vec::new(),
        }
    }

    pub fn flag(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).expect("flag values are plain data");
        self.flags.insert(key.to_string(), value);
        self
    }

    pub fn input(&mut self, role: &str, path: &Path) -> Result<&mut Self> {
        self.inputs.push(InputFile {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = to_pretty_json(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Sidecar path for a single-file output: `preds.jsonl` gets
/// `preds.jsonl.run_config.json`.
pub fn sidecar_for(output: &Path) -> std::path::PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".run_config.json");
    output.with_file_name(name)
}
