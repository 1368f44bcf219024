//! Persistent, content-addressed store of computed results.
//!
//! Each entry lives in its own JSON file named by the SHA-256 of the query
//! together with the schema version and the algorithm revision, so any
//! change to enumeration or relation generation invalidates old entries by
//! key mismatch. Writes go through a temporary file and an atomic rename.
//! Read or write failures are logged and treated as misses.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{ChowQuery, ChowResult};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;
/// Bump whenever enumeration order, canonical forms or relation generation change.
pub const ALGORITHM_REVISION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "CHOW_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub created_at: u64,
    pub result: ChowResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cache {
    dir: PathBuf,
    revision: u32,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self::with_revision(dir, ALGORITHM_REVISION)
    }

    pub fn with_revision(dir: impl Into<PathBuf>, revision: u32) -> Self {
        Self { dir: dir.into(), revision }
    }

    /// Cache rooted at `$CHOW_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(&self, q: &ChowQuery) -> String {
        let text = format!("schema={SCHEMA_VERSION};n={};d={};locus={};rev={}", q.n, q.degree, q.locus, self.revision);
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, q: &ChowQuery) -> Option<ChowResult> {
        let key = self.key(q);
        let text = match fs::read_to_string(self.path(&key)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cache read failed for {key}: {e}");
                return None;
            }
        };
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(entry) if entry.key == key => Some(entry.result),
            Ok(_) => {
                log::warn!("cache entry {key} has a mismatched key; ignoring it");
                None
            }
            Err(e) => {
                log::warn!("cache entry {key} is unreadable: {e}");
                None
            }
        }
    }

    pub fn put(&self, q: &ChowQuery, result: &ChowResult) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let key = self.key(q);
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let entry = CacheEntry { key: key.clone(), created_at, result: result.clone() };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, &entry)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(&key)).map_err(|e| e.error)?;
        Ok(())
    }
}
