//! Output directory handling: CSV and JSON artifacts, digests, and
//! append-only run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Renders a CSV document with LF line endings.
pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numerical(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Numerical(format!("csv encoding failed: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Collects the artifacts of one run under a root directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> CliResult<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.retain(|f| f.path != name);
        self.written.push(OutputFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> CliResult<PathBuf> {
        let bytes = render_csv(header, rows)?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Numerical(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn outputs(&self) -> &[OutputFile] {
        &self.written
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub artifact_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub seed: u64,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Value,
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    /// Writes the manifest under `manifests/` without replacing any earlier
    /// one; returns its path.
    pub fn persist(&self, root: &Path) -> CliResult<PathBuf> {
        let dir = root.join("manifests");
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let stamp: String = self
            .started_at
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let command = serde_json::to_value(self.config.command)?;
        let command = command.as_str().unwrap_or("run");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        for k in 0.. {
            let name = if k == 0 {
                format!("{command}-{stamp}.json")
            } else {
                format!("{command}-{stamp}-{k}.json")
            };
            let path = dir.join(name);
            match fs::OpenOptions::new()
                .write(true)
                .create_new(true)
                .open(&path)
            {
                Ok(mut f) => {
                    f.write_all(text.as_bytes())
                        .map_err(|e| CliError::io(&path, e))?;
                    return Ok(path);
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(CliError::io(&path, e)),
            }
        }
        unreachable!("manifest name search is unbounded")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks that every listed output exists under `root` with its digest.
    pub fn verify(&self, root: &Path) -> CliResult<()> {
        for f in &self.outputs {
            let path = root.join(&f.path);
            let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            let digest = sha256_hex(&bytes);
            if digest != f.sha256 {
                return Err(CliError::Invariant(format!(
                    "{} has digest {digest}, manifest records {}",
                    f.path, f.sha256
                )));
            }
        }
        Ok(())
    }
}
