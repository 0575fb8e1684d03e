//! On-disk cache of orbit tables.
//!
//! One file per `(group fingerprint, word length)`. Layout, little endian:
//! magic `SGWC`, format version `u32`, rank `u32`, word length `u32`,
//! row count `u64`, then per row the letters (`u8` each), the displacement
//! length (`f64`) and the abelianization (`i32` each).
//!
//! Writes go to a temporary file in the same directory and are renamed into
//! place. The cache never changes results: a missing or stale file is simply
//! recomputed.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::OrbitTable;
use crate::error::{Error, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"SGWC";

#[derive(Debug, Clone)]
pub struct WordCache {
    dir: PathBuf,
}

impl WordCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        Ok(WordCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, fingerprint: &str, n: usize) -> PathBuf {
        self.dir
            .join(format!("words-v{CACHE_FORMAT_VERSION}-{fingerprint}-n{n}.bin"))
    }

    /// Loads a table, `Ok(None)` when absent or written by another format version.
    pub fn load(&self, fingerprint: &str, n: usize) -> Result<Option<OrbitTable>> {
        let path = self.path_for(fingerprint, n);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
        };
        let mut r = BufReader::new(file);
        let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Ok(None);
        }
        let version = read_u32(&mut r).map_err(io)?;
        if version != CACHE_FORMAT_VERSION {
            return Ok(None);
        }
        let rank = read_u32(&mut r).map_err(io)? as usize;
        let word_len = read_u32(&mut r).map_err(io)? as usize;
        if word_len != n {
            return Ok(None);
        }
        let count = read_u64(&mut r).map_err(io)? as usize;
        let mut letters = vec![0u8; count * word_len];
        let mut lengths = Vec::with_capacity(count);
        let mut abel = Vec::with_capacity(count * rank);
        for i in 0..count {
            r.read_exact(&mut letters[i * word_len..(i + 1) * word_len]).map_err(io)?;
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io)?;
            lengths.push(f64::from_le_bytes(b));
            for _ in 0..rank {
                let mut b = [0u8; 4];
                r.read_exact(&mut b).map_err(io)?;
                abel.push(i32::from_le_bytes(b));
            }
        }
        OrbitTable::from_columns(rank, word_len, letters, lengths, abel).map(Some)
    }

    pub fn store(&self, fingerprint: &str, table: &OrbitTable) -> Result<()> {
        let path = self.path_for(fingerprint, table.word_len());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", tmp.display()));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp).map_err(io)?);
            w.write_all(MAGIC).map_err(io)?;
            w.write_all(&CACHE_FORMAT_VERSION.to_le_bytes()).map_err(io)?;
            w.write_all(&(table.rank() as u32).to_le_bytes()).map_err(io)?;
            w.write_all(&(table.word_len() as u32).to_le_bytes()).map_err(io)?;
            w.write_all(&(table.len() as u64).to_le_bytes()).map_err(io)?;
            for i in 0..table.len() {
                w.write_all(table.letters(i)).map_err(io)?;
                w.write_all(&table.length(i).to_le_bytes()).map_err(io)?;
                for x in table.abelianization(i) {
                    w.write_all(&x.to_le_bytes()).map_err(io)?;
                }
            }
            w.flush().map_err(io)?;
        }
        fs::rename(&tmp, &path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_funnel_group;
    use crate::symbolic::{enumerate_admissible_cyclic, OrbitCatalog, DEFAULT_WORD_CAP};

    #[test]
    fn stored_table_reloads_identically() {
        let dir = tempfile::tempdir().unwrap();
        let cache = WordCache::new(dir.path()).unwrap();
        let g = build_funnel_group(2, &[5.0, 6.0]).unwrap();
        let t = enumerate_admissible_cyclic(&g, 4, DEFAULT_WORD_CAP).unwrap();
        cache.store(&g.fingerprint(), &t).unwrap();
        let back = cache.load(&g.fingerprint(), 4).unwrap().unwrap();
        assert_eq!(back, t);
        assert!(cache.load(&g.fingerprint(), 5).unwrap().is_none());
    }

    #[test]
    fn catalog_is_independent_of_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = WordCache::new(dir.path()).unwrap();
        let g = build_funnel_group(2, &[5.0, 6.0]).unwrap();
        let cold = OrbitCatalog::build(&g, 4, DEFAULT_WORD_CAP, Some(&cache)).unwrap();
        let warm = OrbitCatalog::build(&g, 4, DEFAULT_WORD_CAP, Some(&cache)).unwrap();
        let none = OrbitCatalog::build(&g, 4, DEFAULT_WORD_CAP, None).unwrap();
        for n in 1..=4 {
            assert_eq!(cold.table(n), warm.table(n));
            assert_eq!(cold.table(n), none.table(n));
        }
    }
}
