//! Plug-in block-entropy estimates from a single realization.
//!
//! Used as a model-free oracle against the mixed-state estimator: the
//! increments `H(l) - H(l-1)` upper-bound the entropy rate and converge to it.
//! No bias correction is applied.

use crate::error::{Error, Result};
use crate::info::neg_plogp;

/// Largest number of block counters allocated for one length.
pub const MAX_BLOCK_CELLS: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntropyPoint {
    pub length: usize,
    /// `H(l)` in bits.
    pub entropy: f64,
    /// `H(l) - H(l-1)` in bits per symbol.
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEntropyEstimate {
    pub per_length: Vec<BlockEntropyPoint>,
    pub sample_length: usize,
    /// Set when the sample is shorter than `100 * M^l_max`.
    pub undersampled: bool,
}

impl BlockEntropyEstimate {
    /// Increment at the longest block length.
    pub fn last_increment(&self) -> f64 {
        self.per_length.last().map_or(0.0, |p| p.increment)
    }

    pub fn increment(&self, length: usize) -> Option<f64> {
        self.per_length
            .iter()
            .find(|p| p.length == length)
            .map(|p| p.increment)
    }
}

pub fn block_entropy_estimate(
    sequence: &[usize],
    alphabet_size: usize,
    l_max: usize,
) -> Result<BlockEntropyEstimate> {
    if alphabet_size == 0 || l_max == 0 {
        return Err(Error::InvalidArgument(
            "alphabet size and l_max must be positive".into(),
        ));
    }
    let cells = (alphabet_size as u128).checked_pow(l_max as u32).unwrap_or(u128::MAX);
    if cells > MAX_BLOCK_CELLS {
        return Err(Error::LMaxTooLarge {
            l_max,
            cells,
            budget: MAX_BLOCK_CELLS,
        });
    }
    if sequence.len() < l_max {
        return Err(Error::InvalidArgument(format!(
            "sequence of length {} is shorter than l_max = {l_max}",
            sequence.len()
        )));
    }
    if let Some(&bad) = sequence.iter().find(|&&x| x >= alphabet_size) {
        return Err(Error::InvalidArgument(format!(
            "symbol {bad} outside alphabet of size {alphabet_size}"
        )));
    }

    let m = alphabet_size;
    let mut per_length = Vec::with_capacity(l_max);
    let mut previous = 0.0;
    for l in 1..=l_max {
        let size = m.pow(l as u32);
        let mut counts = vec![0u64; size];
        let mut code = 0usize;
        for (t, &x) in sequence.iter().enumerate() {
            code = (code * m + x) % size;
            if t + 1 >= l {
                counts[code] += 1;
            }
        }
        let windows = (sequence.len() + 1 - l) as f64;
        let entropy: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| neg_plogp(c as f64 / windows))
            .sum();
        per_length.push(BlockEntropyPoint {
            length: l,
            entropy,
            increment: entropy - previous,
        });
        previous = entropy;
    }
    Ok(BlockEntropyEstimate {
        per_length,
        sample_length: sequence.len(),
        undersampled: (sequence.len() as u128) < 100 * cells,
    })
}
