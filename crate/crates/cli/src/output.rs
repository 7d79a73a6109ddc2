//! Atomic artifact writing and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub tool_version: String,
    pub realized_tn: Option<f64>,
    pub output_paths: Vec<PathBuf>,
    /// Seconds since the Unix epoch. The only field that varies between reruns.
    pub timestamp: u64,
}

/// Files produced by a command before anything touches the disk.
pub struct Artifacts {
    pub table: String,
    pub metadata: serde_json::Value,
    /// Printed when no output path is given.
    pub summary: Option<String>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn stage(path: &Path, contents: &[u8]) -> Result<NamedTempFile, CliError> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.flush().map_err(io)?;
    Ok(tmp)
}

/// Writes `<out>`, `<stem>.json` and `<stem>.manifest.json` next to each
/// other. Everything is staged in temp files first and renamed at the end.
pub fn write_all(out: &Path, art: &Artifacts, mut manifest: RunManifest) -> Result<(), CliError> {
    let meta_path = sibling(out, ".json");
    let manifest_path = sibling(out, ".manifest.json");
    manifest.output_paths = vec![out.to_path_buf(), meta_path.clone(), manifest_path.clone()];
    let meta = serde_json::to_vec_pretty(&art.metadata).expect("json values serialize");
    let man = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    let staged = [
        (out.to_path_buf(), stage(out, art.table.as_bytes())?),
        (meta_path.clone(), stage(&meta_path, &meta)?),
        (manifest_path.clone(), stage(&manifest_path, &man)?),
    ];
    for (path, tmp) in staged {
        tmp.persist(&path).map_err(|e| CliError::Io {
            path,
            source: e.error,
        })?;
    }
    Ok(())
}

pub fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
