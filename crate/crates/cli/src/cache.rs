//! Content-addressed cache for expensive numeric results.
//!
//! Entries hold little-endian `f64` payloads behind a magic tag and a SHA-256
//! of the payload. Writes go to a unique temp file and are renamed into place,
//! so a reader sees either no entry or a complete one. An entry that fails
//! verification is deleted and reported as a miss.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

const MAGIC: &[u8; 8] = b"ZDETC001";
const HEADER: usize = MAGIC.len() + 32;

static TEMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// Key from the parts `(operator spec, n or params, computation tag, ...)`.
pub fn key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    h.update(b"zdet-cache/1");
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex(&h.finalize())
}

fn encode(values: &[f64]) -> Vec<u8> {
    let payload: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    let mut out = Vec::with_capacity(HEADER + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    out
}

fn decode(bytes: &[u8]) -> Option<Vec<f64>> {
    if bytes.len() < HEADER || &bytes[..MAGIC.len()] != MAGIC {
        return None;
    }
    let payload = &bytes[HEADER..];
    if !payload.len().is_multiple_of(8) || Sha256::digest(payload).as_slice() != &bytes[MAGIC.len()..HEADER] {
        return None;
    }
    Some(payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

#[derive(Debug, Default)]
pub struct Cache {
    root: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    warnings: Mutex<Vec<String>>,
}

impl Cache {
    /// A cache rooted at `root`; `None` disables caching.
    pub fn new(root: Option<PathBuf>) -> Self {
        Self { root, ..Self::default() }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn entry_path(&self, key: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(&key[..2]).join(key))
    }

    fn warn(&self, message: String) {
        self.warnings.lock().expect("warnings lock").push(message);
    }

    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        let path = self.entry_path(key)?;
        let bytes = fs::read(&path).ok()?;
        match decode(&bytes) {
            Some(v) => Some(v),
            None => {
                // a concurrent writer may already have replaced it; losing
                // that race only costs a recomputation
                let _ = fs::remove_file(&path);
                self.warn(format!("discarded corrupt cache entry {key}"));
                None
            }
        }
    }

    /// Stores `values`; failures are recorded as warnings and otherwise ignored.
    pub fn put(&self, key: &str, values: &[f64]) {
        let Some(path) = self.entry_path(key) else { return };
        if let Err(e) = write_atomic(&path, &encode(values)) {
            self.warn(format!("cache write for {key} failed, continuing uncached: {e}"));
        }
    }

    pub fn get_or_compute<E>(&self, key: &str, compute: impl FnOnce() -> Result<Vec<f64>, E>) -> Result<Vec<f64>, E> {
        if let Some(v) = self.get(key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = compute()?;
        self.put(key, &v);
        Ok(v)
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().expect("warnings lock").clone()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().expect("entry has a parent");
    fs::create_dir_all(dir)?;
    let temp = dir.join(format!(
        ".tmp-{}-{}-{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed),
        path.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
    ));
    let result = (|| {
        let mut f = fs::File::create(&temp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&temp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&temp);
    }
    result
}
