//! One file per census under the cache directory, named by the SHA-256 of
//! its key. Entries are written to a temp file and renamed into place while
//! holding an advisory lock on the directory's lock file.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use stdet_core::cache::CensusStore;
use stdet_core::census::{CountVector, Engine};
use stdet_core::ring::Ring;

/// Bumped whenever the entry layout or census semantics change.
pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "# stdet census cache";

pub struct FileStore {
    dir: PathBuf,
}

fn key_string(ring: &str, n: u32, engine: Engine) -> String {
    format!("{ring}|n={n}|engine={engine}|schema={SCHEMA_VERSION}")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The CSV body shared with `census --format csv`, without aggregates.
pub fn counts_csv(cv: &CountVector, ring: &Ring) -> String {
    let mut out = String::from("det_index,det_display,count\n");
    for (i, c) in cv.counts().iter().enumerate() {
        let a = stdet_core::ring::RingElement(i as u32);
        out.push_str(&format!("{i},{},{c}\n", csv_field(&ring.display(a))));
    }
    out
}

/// Quotes a field containing a comma.
pub fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Entry text for `cv`; `None` if the ring descriptor does not build.
pub fn encode_entry(cv: &CountVector) -> Option<String> {
    let ring = Ring::parse(cv.ring()).ok()?;
    let body = counts_csv(cv, &ring);
    Some(format!(
        "{MAGIC}\n# key: {}\n# sha256: {}\n{body}",
        key_string(cv.ring(), cv.n(), cv.engine()),
        sha256_hex(body.as_bytes())
    ))
}

/// Parses an entry, returning `None` on any mismatch: wrong key, bad
/// checksum, malformed rows.
pub fn decode_entry(text: &str, ring: &str, n: u32, engine: Engine) -> Option<CountVector> {
    let mut lines = text.splitn(4, '\n');
    if lines.next()? != MAGIC {
        return None;
    }
    let key = lines.next()?.strip_prefix("# key: ")?;
    let sum = lines.next()?.strip_prefix("# sha256: ")?;
    let body = lines.next()?;
    if key != key_string(ring, n, engine) || sum != sha256_hex(body.as_bytes()) {
        return None;
    }
    let mut counts = Vec::new();
    for (i, line) in body.lines().skip(1).enumerate() {
        let (index, rest) = line.split_once(',')?;
        let (_, count) = rest.rsplit_once(',')?;
        if index.parse::<usize>().ok()? != i {
            return None;
        }
        counts.push(count.parse::<BigUint>().ok()?);
    }
    let ring = Ring::parse(ring).ok()?;
    CountVector::from_parts(&ring, n, engine, counts).ok()
}

impl FileStore {
    pub fn open(dir: PathBuf) -> std::io::Result<FileStore> {
        fs::create_dir_all(&dir)?;
        Ok(FileStore { dir })
    }

    pub fn entry_path(&self, ring: &str, n: u32, engine: Engine) -> PathBuf {
        let name = sha256_hex(key_string(ring, n, engine).as_bytes());
        self.dir.join(format!("{name}.csv"))
    }

    fn lock(&self) -> std::io::Result<File> {
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(".lock"))?;
        file.lock()?;
        Ok(file)
    }

    fn write(&self, cv: &CountVector) -> std::io::Result<()> {
        let Some(text) = encode_entry(cv) else { return Ok(()) };
        let path = self.entry_path(cv.ring(), cv.n(), cv.engine());
        let _guard = self.lock()?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut file = File::create(&tmp)?;
        file.write_all(text.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, &path)
    }
}

impl CensusStore for FileStore {
    fn load(&self, ring: &str, n: u32, engine: Engine) -> Option<CountVector> {
        let text = fs::read_to_string(self.entry_path(ring, n, engine)).ok()?;
        decode_entry(&text, ring, n, engine)
    }

    fn save(&self, cv: &CountVector) {
        // a cache that cannot be written is only slower
        if let Err(e) = self.write(cv) {
            eprintln!("warning: could not write cache entry in {}: {e}", self.dir.display());
        }
    }
}

/// `--cache-dir`, then `STDET_CACHE_DIR` (handled by clap), then the XDG
/// cache home, then `~/.cache`.
pub fn default_cache_dir() -> Option<PathBuf> {
    if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(xdg).join("stdet"));
    }
    std::env::var_os("HOME").map(|home| PathBuf::from(home).join(".cache").join("stdet"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stdet_core::census::census_dp;

    #[test]
    fn entry_round_trip() {
        let ring = Ring::parse("F(2^2)").unwrap();
        let cv = census_dp(&ring, 3).unwrap();
        let text = encode_entry(&cv).unwrap();
        assert_eq!(decode_entry(&text, "F(2^2)", 3, Engine::Dp), Some(cv));
        assert_eq!(decode_entry(&text, "F(2^2)", 2, Engine::Dp), None);
        let tampered = text.replacen(",1,", ",1,1", 1);
        assert_eq!(decode_entry(&tampered, "F(2^2)", 3, Engine::Dp), None);
    }

    #[test]
    fn display_with_commas_is_quoted() {
        assert_eq!(csv_field("1+x"), "1+x");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
