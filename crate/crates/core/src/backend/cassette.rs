//! Recorded completions keyed by a digest of (backend, prompt), persisted as
//! JSONL and rewritten atomically on every insert.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BackendError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub backend: String,
    pub text: String,
}

/// Hex SHA-256 over the backend name, a NUL separator and the prompt text.
pub fn request_digest(backend: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(backend.as_bytes());
    h.update([0u8]);
    h.update(prompt.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug)]
pub struct Cassette {
    path: PathBuf,
    entries: Mutex<BTreeMap<String, CassetteEntry>>,
}

impl Cassette {
    /// Loads `path`; a missing file is an empty cassette. Later lines for the
    /// same digest replace earlier ones.
    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let mut entries = BTreeMap::new();
        match fs::File::open(path) {
            Ok(f) => {
                for (n, line) in BufReader::new(f).lines().enumerate() {
                    let line = line.map_err(|e| BackendError::CassetteRead {
                        path: path.to_path_buf(),
                        message: e.to_string(),
                    })?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let e: CassetteEntry = serde_json::from_str(&line).map_err(|e| BackendError::CassetteRead {
                        path: path.to_path_buf(),
                        message: format!("line {}: {e}", n + 1),
                    })?;
                    entries.insert(e.digest.clone(), e);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                return Err(BackendError::CassetteRead {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })
            }
        }
        Ok(Cassette {
            path: path.to_path_buf(),
            entries: Mutex::new(entries),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, digest: &str) -> Option<CassetteEntry> {
        self.entries.lock().unwrap().get(digest).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inserts (replacing any entry with the same digest) and rewrites the
    /// file via a temporary sibling and rename. The lock is held across the
    /// write so concurrent recorders are serialized.
    pub fn insert(&self, entry: CassetteEntry) -> Result<(), BackendError> {
        let mut entries = self.entries.lock().unwrap();
        entries.insert(entry.digest.clone(), entry);
        let werr = |e: &dyn std::fmt::Display| BackendError::CassetteWrite {
            path: self.path.clone(),
            message: e.to_string(),
        };
        let dir = match self.path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&dir).map_err(|e| werr(&e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| werr(&e))?;
        for e in entries.values() {
            let line = serde_json::to_string(e).map_err(|e| werr(&e))?;
            writeln!(tmp, "{line}").map_err(|e| werr(&e))?;
        }
        tmp.as_file().sync_all().map_err(|e| werr(&e))?;
        tmp.persist(&self.path).map_err(|e| werr(&e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_separates_backend_and_prompt() {
        assert_ne!(request_digest("ab", "c"), request_digest("a", "bc"));
        assert_eq!(request_digest("m", "p").len(), 64);
        assert_eq!(request_digest("m", "p"), request_digest("m", "p"));
    }

    #[test]
    fn insert_persists_and_last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let c = Cassette::open(&path).unwrap();
        assert!(c.is_empty());
        let d = request_digest("m", "p");
        for text in ["one", "two"] {
            c.insert(CassetteEntry {
                digest: d.clone(),
                backend: "m".into(),
                text: text.into(),
            })
            .unwrap();
        }
        let reloaded = Cassette::open(&path).unwrap();
        assert_eq!(reloaded.len(), 1);
        assert_eq!(reloaded.get(&d).unwrap().text, "two");
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1);
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(&path, "{not json}\n").unwrap();
        assert!(matches!(Cassette::open(&path), Err(BackendError::CassetteRead { .. })));
    }
}
