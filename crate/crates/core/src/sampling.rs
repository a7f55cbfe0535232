//! Seeded realizations of a machine's output process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hmm::LabeledHmm;

/// The crate-wide generator: ChaCha8, so streams are identical on every
/// platform for a given seed.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; a stable, schedule-independent hash.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-job seed `seed XOR hash(index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

/// Draws an index from a discrete distribution given as a cumulative table.
#[inline]
pub(crate) fn draw(cumulative: &[f64], u: f64) -> usize {
    let total = *cumulative.last().expect("non-empty table");
    let target = u * total;
    cumulative
        .iter()
        .position(|&c| target < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Output of [`sample_sequence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledSequence {
    pub symbols: Vec<usize>,
    /// Hidden states `s_0 .. s_length` when requested.
    pub states: Option<Vec<usize>>,
}

/// Runs the hidden chain: `s_0 ~ pi`, then each step draws `(x, j)` jointly
/// from row `s_t` of the labeled matrices.
pub fn sample_sequence(
    machine: &LabeledHmm,
    length: usize,
    seed: u64,
    record_states: bool,
) -> Result<SampledSequence> {
    if length == 0 {
        return Err(Error::InvalidArgument("sequence length must be >= 1".into()));
    }
    let n = machine.num_states();
    // Per-row table over (symbol, successor) pairs with positive mass.
    let rows: Vec<(Vec<f64>, Vec<(usize, usize)>)> = (0..n)
        .map(|i| {
            let mut cum = Vec::new();
            let mut outcomes = Vec::new();
            let mut acc = 0.0;
            for (x, t) in machine.matrices().iter().enumerate() {
                for j in 0..n {
                    let p = t[(i, j)];
                    if p > 0.0 {
                        acc += p;
                        cum.push(acc);
                        outcomes.push((x, j));
                    }
                }
            }
            (cum, outcomes)
        })
        .collect();
    let mut pi_cum = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &p in machine.stationary().as_slice() {
        acc += p;
        pi_cum.push(acc);
    }

    let mut rng = seeded_rng(seed);
    let mut state = draw(&pi_cum, rng.random::<f64>());
    let mut symbols = Vec::with_capacity(length);
    let mut states = record_states.then(|| {
        let mut v = Vec::with_capacity(length + 1);
        v.push(state);
        v
    });
    for _ in 0..length {
        let (cum, outcomes) = &rows[state];
        let (x, next) = outcomes[draw(cum, rng.random::<f64>())];
        symbols.push(x);
        state = next;
        if let Some(v) = states.as_mut() {
            v.push(state);
        }
    }
    Ok(SampledSequence { symbols, states })
}
