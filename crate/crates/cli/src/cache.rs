//! On-disk trace cache: one directory per (group, last step, mode, format
//! version), guarded by a lock file while it is written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use walklab::walk::{cache_load, cache_store, read_header, CACHE_VERSION};
use walklab::{Group, GroupSpec, WalkTrace};

use crate::error::{io_context, CliError};

const TRACE_FILE: &str = "trace.jsonl";
const LOCK_FILE: &str = ".lock";

#[derive(Clone, Debug)]
pub struct CacheEntry {
    dir: PathBuf,
}

impl CacheEntry {
    /// `mode` distinguishes traces of the same length that store different data.
    pub fn new(cache_dir: &Path, spec: &GroupSpec, last_step: usize, mode: &str) -> Self {
        let name = format!("{}-n{last_step}-{mode}-v{CACHE_VERSION}", spec.slug());
        Self {
            dir: cache_dir.join(name),
        }
    }

    pub fn trace_path(&self) -> PathBuf {
        self.dir.join(TRACE_FILE)
    }

    pub fn exists(&self) -> bool {
        self.trace_path().is_file()
    }

    pub fn load<G: Group>(&self, group: G) -> Result<(WalkTrace<G>, BTreeMap<String, Value>), CliError> {
        let path = self.trace_path();
        let loaded = cache_load(&path, group)?;
        log::info!("cache hit: {}", path.display());
        Ok(loaded)
    }

    /// Writes the trace while holding the entry's lock file.
    pub fn store<G: Group>(&self, trace: &WalkTrace<G>, extras: &BTreeMap<String, Value>) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir).map_err(io_context(format!("creating {}", self.dir.display())))?;
        let lock = self.dir.join(LOCK_FILE);
        fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
            .map_err(|e| {
                if e.kind() == std::io::ErrorKind::AlreadyExists {
                    CliError::Config(format!(
                        "cache entry {} is locked by another writer (remove {} if stale)",
                        self.dir.display(),
                        lock.display()
                    ))
                } else {
                    CliError::Io {
                        context: format!("creating {}", lock.display()),
                        source: e,
                    }
                }
            })?;
        let result = cache_store(&self.trace_path(), trace, extras);
        let _ = fs::remove_file(&lock);
        result?;
        log::info!("cached trace at {}", self.trace_path().display());
        Ok(())
    }
}

/// One line per cached trace: directory, group, mode, reached/requested steps.
pub fn list(cache_dir: &Path) -> Result<Vec<String>, CliError> {
    if !cache_dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(cache_dir)
        .map_err(io_context(format!("reading {}", cache_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(TRACE_FILE).is_file())
        .collect();
    dirs.sort();
    Ok(dirs
        .iter()
        .map(|d| {
            let name = d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            match read_header(&d.join(TRACE_FILE)) {
                Ok(h) => format!("{name}\t{}\t{}\t{}/{}", h.group, h.mode.as_str(), h.reached, h.requested),
                Err(e) => format!("{name}\tunreadable: {e}"),
            }
        })
        .collect())
}

/// Removes every cache entry; returns how many were removed.
pub fn clear(cache_dir: &Path) -> Result<usize, CliError> {
    if !cache_dir.is_dir() {
        return Ok(0);
    }
    let mut removed = 0;
    for entry in fs::read_dir(cache_dir).map_err(io_context(format!("reading {}", cache_dir.display())))? {
        let path = entry.map_err(io_context("reading cache entry"))?.path();
        if path.join(TRACE_FILE).is_file() {
            fs::remove_dir_all(&path).map_err(io_context(format!("removing {}", path.display())))?;
            removed += 1;
        }
    }
    Ok(removed)
}
