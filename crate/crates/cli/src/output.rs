//! Output directory handling: CSV tables, JSON summaries and the run manifest
//! listing a SHA-256 digest for every file written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Every flag that affects the outputs, defaults included.
    pub params: serde_json::Value,
    /// File name to lowercase hex SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let manifest_err = |reason: String| CliError::Manifest {
            path: path.to_path_buf(),
            reason,
        };
        let text = fs::read_to_string(path).map_err(|e| manifest_err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| manifest_err(e.to_string()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct OutputDir {
    root: PathBuf,
    digests: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            digests: BTreeMap::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
        self.digests.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Header row followed by one serialized record per row. Floats use the
    /// shortest representation that round-trips.
    pub fn write_csv<R: Serialize>(&mut self, name: &str, headers: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<()> {
        let io_err = |e: csv::Error| CliError::Io {
            path: self.root.join(name),
            source: std::io::Error::other(e.to_string()),
        };
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(headers).map_err(io_err)?;
        for row in rows {
            w.serialize(row).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| io_err(e.into_error().into()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes the manifest last, so it lists every other output.
    pub fn finish(mut self, command: &str, params: serde_json::Value) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            version: fracwiener::VERSION.to_string(),
            params,
            outputs: self.digests.clone(),
        };
        self.write_json(MANIFEST_FILE, &manifest)?;
        Ok(manifest)
    }
}
