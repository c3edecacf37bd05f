//! Content-addressed result cache stored as JSON lines.
//!
//! Each line is one [`CacheEntry`]. Writers take an exclusive lock file, rewrite the store into a
//! temporary file and rename it over the original, so readers always see a complete file.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

pub const STORE_FILE: &str = "results.jsonl";
const LOCK_FILE: &str = "results.lock";
const LOCK_WAIT: Duration = Duration::from_secs(10);

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub version: String,
    /// Seconds since the Unix epoch when the result was computed; not part of the key.
    pub timestamp: u64,
    /// SHA-256 over every input file's bytes, in argument order.
    pub input_hash: String,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, inputs: &[Vec<u8>]) -> Self {
        let mut h = Sha256::new();
        for bytes in inputs {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        RunManifest {
            command: command.to_string(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            input_hash: hex::encode(h.finalize()),
        }
    }

    /// Hash of version, command, parameters and input bytes.
    pub fn key(&self) -> String {
        let mut h = Sha256::new();
        for part in [&self.version, &self.command, &self.params.to_string(), &self.input_hash] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub manifest: RunManifest,
    pub exit: i32,
    /// Exact bytes written to standard output.
    pub output: String,
    pub elapsed_ms: u64,
    /// SHA-256 of `key`, `exit` and `output`.
    pub checksum: String,
}

impl CacheEntry {
    pub fn new(manifest: RunManifest, exit: i32, output: String, elapsed_ms: u64) -> Self {
        let key = manifest.key();
        let checksum = checksum(&key, exit, &output);
        CacheEntry { key, manifest, exit, output, elapsed_ms, checksum }
    }

    fn intact(&self) -> bool {
        self.checksum == checksum(&self.key, self.exit, &self.output) && self.key == self.manifest.key()
    }
}

fn checksum(key: &str, exit: i32, output: &str) -> String {
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    h.update(exit.to_le_bytes());
    h.update(output.as_bytes());
    hex::encode(h.finalize())
}

pub struct Cache {
    dir: PathBuf,
}

/// Result of scanning the store.
struct Scan {
    entries: Vec<CacheEntry>,
    corrupt: Vec<usize>,
}

impl Cache {
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    pub fn store_path(&self) -> PathBuf {
        self.dir.join(STORE_FILE)
    }

    fn scan(&self) -> io::Result<Scan> {
        let text = match fs::read(self.store_path()) {
            Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e),
        };
        let mut scan = Scan { entries: Vec::new(), corrupt: Vec::new() };
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CacheEntry>(line) {
                Ok(e) if e.intact() => scan.entries.push(e),
                _ => scan.corrupt.push(i + 1),
            }
        }
        Ok(scan)
    }

    /// Finds the entry for `key`. Corrupt lines are reported through `warn` and evicted.
    pub fn lookup(&self, key: &str, warn: &mut dyn FnMut(String)) -> io::Result<Option<CacheEntry>> {
        let scan = self.scan()?;
        if !scan.corrupt.is_empty() {
            for line in &scan.corrupt {
                warn(format!("evicting corrupt cache entry at {}:{line}", self.store_path().display()));
            }
            self.locked(|| {
                let fresh = self.scan()?;
                self.rewrite(&fresh.entries)
            })?;
        }
        Ok(scan.entries.into_iter().find(|e| e.key == key))
    }

    /// Adds `entry`, replacing any entry with the same key and dropping corrupt lines.
    pub fn store(&self, entry: CacheEntry) -> io::Result<()> {
        self.locked(|| {
            let mut entries = self.scan()?.entries;
            entries.retain(|e| e.key != entry.key);
            entries.push(entry.clone());
            self.rewrite(&entries)
        })
    }

    fn rewrite(&self, entries: &[CacheEntry]) -> io::Result<()> {
        let tmp = self.dir.join(format!("{STORE_FILE}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            for e in entries {
                serde_json::to_writer(&mut f, e)?;
                f.write_all(b"\n")?;
            }
            f.sync_all()?;
        }
        fs::rename(&tmp, self.store_path())
    }

    fn locked<T>(&self, body: impl FnOnce() -> io::Result<T>) -> io::Result<T> {
        let lock = self.dir.join(LOCK_FILE);
        let start = Instant::now();
        loop {
            match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
                Ok(_) => break,
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists && start.elapsed() < LOCK_WAIT => {
                    std::thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(e),
            }
        }
        let out = body();
        let _ = fs::remove_file(&lock);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn manifest(limit: u64) -> RunManifest {
        RunManifest::new("sets greedy", json!({ "limit": limit }), &[])
    }

    #[test]
    fn key_ignores_timestamp_and_tracks_inputs() {
        let mut a = manifest(20);
        let b = manifest(20);
        a.timestamp += 100;
        assert_eq!(a.key(), b.key());
        assert_ne!(manifest(21).key(), b.key());
        let with_file = RunManifest::new("sets greedy", json!({ "limit": 20 }), &[b"1\n".to_vec()]);
        assert_ne!(with_file.key(), b.key());
    }

    #[test]
    fn store_then_lookup_and_evict() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let e = CacheEntry::new(manifest(20), 0, "{}\n".into(), 7);
        cache.store(e.clone()).unwrap();
        let mut warnings = Vec::new();
        assert_eq!(cache.lookup(&e.key, &mut |w| warnings.push(w)).unwrap(), Some(e.clone()));
        assert!(warnings.is_empty());

        let mut text = fs::read_to_string(cache.store_path()).unwrap();
        text = text.replace("{}\\n", "{\\\"x\\\":1}\\n");
        fs::write(cache.store_path(), text + "not json\n").unwrap();
        assert_eq!(cache.lookup(&e.key, &mut |w| warnings.push(w)).unwrap(), None);
        assert_eq!(warnings.len(), 2);
        assert_eq!(fs::read_to_string(cache.store_path()).unwrap(), "");
    }
}
