//! On-disk cache of expensive intermediate results, keyed by a SHA-256 of the
//! parameters. A miss or an unreadable entry just recomputes.

use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "CESARO_CACHE_DIR";

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    /// `--cache-dir` wins over the environment variable; neither disables caching.
    pub fn new(flag: Option<PathBuf>) -> Self {
        let dir = flag.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
        Self { dir }
    }

    pub fn key<P: Serialize>(kind: &str, params: &P) -> Result<String> {
        let mut h = Sha256::new();
        h.update(kind.as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(params)?);
        Ok(hex::encode(h.finalize()))
    }

    pub fn get_or_compute<P, T, F>(&self, kind: &str, params: &P, f: F) -> Result<T>
    where
        P: Serialize,
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        let Some(dir) = &self.dir else { return f() };
        let path = dir.join(format!("{kind}-{}.json", Self::key(kind, params)?));
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(v) = serde_json::from_slice(&bytes) {
                return Ok(v);
            }
        }
        let v = f()?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(&v)?)?;
        fs::rename(tmp, &path)?;
        Ok(v)
    }
}
