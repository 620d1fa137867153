//! On-disk cache of sieved ranges.
//!
//! File layout: a 16-byte header (`b"GPYPRIM1"`, version `u32` LE, reserved
//! `u32` LE) followed by the primes as little-endian `u64`. The range is
//! encoded in the file name. The cache is an optimization only: a missing
//! or corrupt file falls back to sieving.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use super::sieve::{sieve_range, PrimeTable};
use crate::error::Result;

pub const MAGIC: &[u8; 8] = b"GPYPRIM1";
pub const VERSION: u32 = 1;

pub fn encode(primes: &[u64]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 8 * primes.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for p in primes {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    buf
}

pub fn decode(bytes: &[u8]) -> io::Result<Vec<u64>> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing GPYPRIM1 header"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bad("unsupported cache version"));
    }
    let body = &bytes[16..];
    if !body.len().is_multiple_of(8) {
        return Err(bad("truncated prime record"));
    }
    Ok(body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_file(path: &Path, primes: &[u64]) -> io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(primes))?;
    f.sync_all()
}

pub fn read_file(path: &Path) -> io::Result<Vec<u64>> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    decode(&buf)
}

/// Directory-backed cache keyed by range.
#[derive(Debug, Clone)]
pub struct PrimeCache {
    dir: PathBuf,
}

impl PrimeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PrimeCache { dir: dir.into() }
    }

    fn path_for(&self, lo: u64, hi: u64) -> PathBuf {
        self.dir.join(format!("primes_{lo}_{hi}.bin"))
    }

    /// Same result as [`sieve_range`]; reads the cached file when valid and
    /// writes it otherwise. I/O failures are ignored.
    pub fn sieve_range(&self, lo: u64, hi: u64) -> Result<PrimeTable> {
        super::sieve::check_range(lo, hi)?;
        let path = self.path_for(lo, hi);
        if let Ok(primes) = read_file(&path) {
            if primes.windows(2).all(|w| w[0] < w[1])
                && primes.first().is_none_or(|&p| p >= lo)
                && primes.last().is_none_or(|&p| p <= hi)
            {
                return Ok(PrimeTable::from_parts(lo, hi, primes));
            }
        }
        let table = sieve_range(lo, hi)?;
        if fs::create_dir_all(&self.dir).is_ok() {
            let _ = write_file(&path, table.primes());
        }
        Ok(table)
    }
}
