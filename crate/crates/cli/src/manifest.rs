use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(&fs::read(path).map_err(CliError::io(path))?))
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: PathBuf,
    pub sha256: String,
}

/// Records how a set of outputs was produced so it can be re-run and
/// checked byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub tool_version: &'static str,
    pub input: FileEntry,
    pub config: C,
    pub outputs: Vec<FileEntry>,
    /// Digest over the output digests, in order.
    pub content_hash: String,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(command: &'static str, input: FileEntry, config: C, outputs: Vec<FileEntry>) -> Self {
        let joined: String = outputs.iter().map(|o| format!("{}  {}\n", o.sha256, o.path.display())).collect();
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            input,
            config,
            outputs,
            content_hash: sha256_hex(joined.as_bytes()),
        }
    }
}

/// Writes `bytes` to `dir/name` and returns its manifest entry (path
/// relative to `dir`).
pub fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(CliError::io(&path))?;
    Ok(FileEntry { path: PathBuf::from(name), sha256: sha256_hex(bytes) })
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<FileEntry, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Output { path: dir.join(name), message: e.to_string() })?;
    bytes.push(b'\n');
    write_output(dir, name, &bytes)
}
