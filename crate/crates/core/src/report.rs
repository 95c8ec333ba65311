//! Versioned JSON artifacts and atomic persistence.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `hdlab.<kind>/<version>`.
pub fn schema_id(kind: &str) -> String {
    format!("hdlab.{kind}/{SCHEMA_VERSION}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact<T> {
    pub schema: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch; omitted for reproducible output.
    pub created_unix: Option<u64>,
    pub config: serde_json::Value,
    /// SHA-256 of the config as compact JSON.
    pub config_digest: String,
    pub result: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new(kind: &str, config: &impl Serialize, result: T, timestamp: bool) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let config_digest = hex::encode(Sha256::digest(serde_json::to_vec(&config)?));
        let created_unix = timestamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        Ok(Artifact {
            schema: schema_id(kind),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            config,
            config_digest,
            result,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

impl<T: DeserializeOwned> Artifact<T> {
    /// Parse and check the schema id.
    pub fn from_json(text: &str, kind: &str) -> Result<Self> {
        let a: Artifact<T> = serde_json::from_str(text)?;
        if a.schema != schema_id(kind) {
            return Err(Error::Serde(format!("expected schema {}, found {}", schema_id(kind), a.schema)));
        }
        Ok(a)
    }

    pub fn read(path: &Path, kind: &str) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, kind)
    }
}

/// Write via a temporary file in the target directory and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_schema_check() {
        let a = Artifact::new("demo", &serde_json::json!({"n": 3}), vec![1u32, 2], false).unwrap();
        assert_eq!(a.schema, "hdlab.demo/1");
        let text = a.to_json().unwrap();
        let back: Artifact<Vec<u32>> = Artifact::from_json(&text, "demo").unwrap();
        assert_eq!(back, a);
        assert!(Artifact::<Vec<u32>>::from_json(&text, "other").is_err());
        assert_eq!(text, Artifact::new("demo", &serde_json::json!({"n": 3}), vec![1u32, 2], false).unwrap().to_json().unwrap());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
    }
}
