//! Byte histograms and normalized byte-frequency distributions (BFD).
//!
//! The BFD is the only thing the rest of the pipeline ever sees of a file, so
//! every downstream result is invariant under any permutation of the bytes.

use std::io::{self, Read};

use crate::error::{Error, Result};

/// Number of distinct byte values.
pub const BINS: usize = 256;

const READ_CHUNK: usize = 64 * 1024;

/// Raw occurrence counts of each byte value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteHistogram {
    counts: [u64; BINS],
    total: u64,
}

impl Default for ByteHistogram {
    fn default() -> Self {
        Self {
            counts: [0; BINS],
            total: 0,
        }
    }
}

impl ByteHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds every byte of `data` to the histogram.
    pub fn update(&mut self, data: &[u8]) {
        for &b in data {
            self.counts[b as usize] += 1;
        }
        self.total += data.len() as u64;
    }

    /// Histograms a reader in fixed-size chunks, so memory stays bounded for
    /// arbitrarily large files.
    pub fn from_reader<R: Read>(mut reader: R) -> io::Result<Self> {
        let mut hist = Self::new();
        let mut buf = vec![0u8; READ_CHUNK];
        loop {
            match reader.read(&mut buf) {
                Ok(0) => return Ok(hist),
                Ok(n) => hist.update(&buf[..n]),
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn counts(&self) -> &[u64; BINS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Bin-wise sum of two histograms.
    pub fn merge(&mut self, other: &ByteHistogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn normalize(&self) -> Result<NormalizedBfd> {
        normalize(self)
    }
}

/// Relative byte frequencies; sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBfd {
    freq: [f64; BINS],
}

impl NormalizedBfd {
    pub fn as_slice(&self) -> &[f64] {
        &self.freq
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.freq.to_vec()
    }
}

impl AsRef<[f64]> for NormalizedBfd {
    fn as_ref(&self) -> &[f64] {
        &self.freq
    }
}

pub fn count_bytes(data: &[u8]) -> ByteHistogram {
    let mut hist = ByteHistogram::new();
    hist.update(data);
    hist
}

/// Divides every bin by the total byte count.
pub fn normalize(hist: &ByteHistogram) -> Result<NormalizedBfd> {
    if hist.total == 0 {
        return Err(Error::EmptyInput);
    }
    let total = hist.total as f64;
    let mut freq = [0.0; BINS];
    for (f, &c) in freq.iter_mut().zip(hist.counts.iter()) {
        *f = c as f64 / total;
    }
    Ok(NormalizedBfd { freq })
}

/// Convenience: `normalize(count_bytes(data))`.
pub fn bfd(data: &[u8]) -> Result<NormalizedBfd> {
    normalize(&count_bytes(data))
}
