//! Persistent correlator cache: one JSON record per line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swp_core::scalar::{parse_rational, render_rational_explicit};
use swp_core::{CorrelatorKey, Engine, MultiIndex, Rational};

use crate::CliError;

/// One published correlator value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheRecord {
    pub genus: u32,
    pub kappa: Vec<(usize, u32)>,
    pub psi: Vec<u32>,
    pub value: String,
}

impl CacheRecord {
    pub fn new(key: &CorrelatorKey, value: &Rational) -> Self {
        Self {
            genus: key.genus,
            kappa: key.kappa.pairs().collect(),
            psi: key.psi.clone(),
            value: render_rational_explicit(value),
        }
    }

    /// The canonical key and reduced value; rejects zero counts, position 0
    /// and malformed values.
    pub fn decode(&self) -> Result<(CorrelatorKey, Rational), String> {
        if self.kappa.iter().any(|&(i, c)| i == 0 || c == 0) {
            return Err(format!("bad kappa pairs {:?}", self.kappa));
        }
        let value = parse_rational(&self.value).ok_or_else(|| format!("bad value {:?}", self.value))?;
        let key = CorrelatorKey::new(self.genus, MultiIndex::from_pairs(self.kappa.iter().copied()), self.psi.clone());
        Ok((key, value))
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("cache records always serialize")
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        let record: Self = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let (key, value) = record.decode()?;
        Ok(Self::new(&key, &value))
    }
}

/// Where the cache lives: `--no-cache` disables it, then the explicit path
/// (`--cache`, falling back to `SWP_CACHE`), then the per-user default.
pub fn resolve_path(explicit: Option<&Path>, no_cache: bool) -> Option<PathBuf> {
    if no_cache {
        return None;
    }
    match explicit.filter(|p| !p.as_os_str().is_empty()) {
        Some(p) => Some(p.to_path_buf()),
        None => dirs::cache_dir().map(|d| d.join("swp").join("correlators.jsonl")),
    }
}

/// Reads every record of `path`; a missing file is an empty cache.
pub fn read_records(path: &Path) -> Result<Vec<CacheRecord>, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            CacheRecord::from_line(l).map_err(|e| CliError::Cache(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Publishes every record into `engine`; a value that differs from one
/// already known for the same key is an error. Returns the record count.
pub fn cache_load(engine: &Engine, path: &Path) -> Result<usize, CliError> {
    let records = read_records(path)?;
    for r in &records {
        let (key, value) = r.decode().map_err(CliError::Cache)?;
        engine.publish(&key, value)?;
    }
    Ok(records.len())
}

/// Writes the engine's published table merged with what is already on disk,
/// sorted canonically. Returns the record count.
pub fn cache_store(engine: &Engine, path: &Path) -> Result<usize, CliError> {
    let merged = Engine::new();
    for r in read_records(path)? {
        let (key, value) = r.decode().map_err(CliError::Cache)?;
        merged.publish(&key, value)?;
    }
    for (key, value) in engine.published() {
        merged.publish(&key, value)?;
    }
    let published = merged.published();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    for (key, value) in &published {
        writeln!(file, "{}", CacheRecord::new(key, value).to_line()).map_err(|e| CliError::io(&tmp, e))?;
    }
    file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))?;
    Ok(published.len())
}
