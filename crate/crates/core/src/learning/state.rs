//! Bijective encoding of sorted quantization-level tuples into state indices.
//!
//! A platoon state is the multiset of per-band quantized SINR levels,
//! i.e. a nondecreasing K-tuple over R levels. There are C(R + K - 1, K)
//! such tuples; ranking maps each one to a unique index in [0, S) via the
//! standard combinadic of the strictly-increasing tuple `level[i] + i`.

use crate::{Error, Result};

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result = 1u64;
    for i in 1..=k {
        result = result * (n - (k - i)) / i;
    }
    result
}

/// Encoder/decoder between sorted level tuples and state indices.
#[derive(Debug, Clone)]
pub struct StateCodec {
    levels: u8,
    bands: usize,
    state_count: usize,
}

impl StateCodec {
    pub fn new(levels: u8, bands: usize) -> Self {
        assert!(levels >= 1 && bands >= 1);
        let state_count =
            binomial(levels as u64 + bands as u64 - 1, bands as u64) as usize;
        Self { levels, bands, state_count }
    }

    /// S = C(R + K - 1, K).
    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Rank a level tuple (sorted internally) into [0, S).
    pub fn encode(&self, levels: &[u8]) -> Result<usize> {
        if levels.len() != self.bands {
            return Err(Error::DimensionMismatch(format!(
                "expected {} levels, got {}",
                self.bands,
                levels.len()
            )));
        }
        let mut sorted: Vec<u8> = levels.to_vec();
        sorted.sort_unstable();
        if sorted.last().copied().unwrap_or(0) >= self.levels {
            return Err(Error::config(format!(
                "quantization level out of range [0, {})",
                self.levels
            )));
        }
        // multiset -> strictly increasing combination over R + K - 1 symbols
        let n = self.levels as u64 + self.bands as u64 - 1;
        let k = self.bands as u64;
        let mut rank = 0u64;
        let mut prev = 0u64;
        for (i, &lvl) in sorted.iter().enumerate() {
            let c = lvl as u64 + i as u64;
            for j in prev..c {
                rank += binomial(n - j - 1, k - i as u64 - 1);
            }
            prev = c + 1;
        }
        Ok(rank as usize)
    }

    /// Inverse of `encode`: the sorted level tuple for a state index.
    pub fn decode(&self, index: usize) -> Result<Vec<u8>> {
        if index >= self.state_count {
            return Err(Error::config(format!(
                "state index {index} out of range [0, {})",
                self.state_count
            )));
        }
        let n = self.levels as u64 + self.bands as u64 - 1;
        let k = self.bands as u64;
        let mut rank = index as u64;
        let mut tuple = Vec::with_capacity(self.bands);
        let mut c = 0u64;
        for i in 0..k {
            loop {
                let count = binomial(n - c - 1, k - i - 1);
                if count <= rank {
                    rank -= count;
                    c += 1;
                } else {
                    tuple.push((c - i) as u8);
                    c += 1;
                    break;
                }
            }
        }
        Ok(tuple)
    }
}
