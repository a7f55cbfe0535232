//! Lyapunov spectrum of the mixed-state iterated function system.
//!
//! The update `eta -> eta T / (eta T 1)` preserves total mass, so its
//! derivative maps the tangent space `{v : sum v = 0}` of the simplex into
//! itself. An orthonormal frame of that `(N-1)`-dimensional space is pushed
//! through the Jacobians along the orbit and re-orthonormalized by modified
//! Gram-Schmidt; the exponents are time averages of `log2 r_kk`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hmm::LabeledHmm;
use crate::info::BatchMeans;
use crate::mixed_state::{MixedState, MixedStateWalk, DEFAULT_BURN_IN, UNDERFLOW};

pub const MIN_LCE_LENGTH: usize = 10_000;
/// Exponents below this are reported as floored: the frame collapsed onto a
/// direction the maps annihilate.
pub const FLOOR_EXPONENT: f64 = -50.0;
const COLLAPSE: f64 = 1e-300;

/// `d eta' / d eta` for symbol `x`, row-vector convention (`d eta' = d eta J`).
pub fn ifs_jacobian(eta: &MixedState, symbol: usize, machine: &LabeledHmm) -> Result<DMatrix<f64>> {
    let n = machine.num_states();
    if eta.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "mixed state over {} states, machine has {n}",
            eta.len()
        )));
    }
    if symbol >= machine.alphabet_size() {
        return Err(Error::InvalidArgument(format!("symbol {symbol} out of range")));
    }
    let t = machine.matrix(symbol);
    let row_sums: Vec<f64> = (0..n).map(|i| t.row(i).sum()).collect();
    let image: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| eta.probs[i] * t[(i, j)]).sum())
        .collect();
    let s: f64 = image.iter().sum();
    if s <= UNDERFLOW {
        return Err(Error::ZeroProbabilitySymbol { symbol });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| t[(i, j)] / s - row_sums[i] * image[j] / (s * s)))
}

/// Orthonormal basis of `{v : sum v = 0}` in `R^n` (Helmert vectors).
pub fn tangent_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut v = vec![0.0; n];
            for vi in v.iter_mut().take(k) {
                *vi = 1.0 / norm;
            }
            v[k] = -(k as f64) / norm;
            v
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LceEstimate {
    /// `lambda_1 >= ... >= lambda_{N-1}`, bits per symbol.
    pub exponents: Vec<f64>,
    /// Batch-means standard error, aligned with `exponents`.
    pub stderr: Vec<f64>,
    /// Set where the exponent is below [`FLOOR_EXPONENT`].
    pub floored: Vec<bool>,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LceConfig {
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub reorth_every: usize,
}

impl LceConfig {
    pub fn new(length: usize, seed: u64) -> Self {
        LceConfig {
            length,
            burn_in: DEFAULT_BURN_IN,
            seed,
            reorth_every: 1,
        }
    }
}

/// Tangent frame driven by the (pre-step mixed state, symbol) pairs of a walk.
pub(crate) struct LceAccumulator {
    n: usize,
    reorth_every: usize,
    basis: Vec<Vec<f64>>,
    frame: Vec<Vec<f64>>,
    scratch: Vec<f64>,
    image: Vec<f64>,
    pending: usize,
    recording: bool,
    stats: Vec<BatchMeans>,
}

impl LceAccumulator {
    pub(crate) fn new(n: usize, reorth_every: usize, length: usize) -> Self {
        let basis = tangent_basis(n);
        let events = length / reorth_every.max(1);
        LceAccumulator {
            n,
            reorth_every: reorth_every.max(1),
            frame: basis.clone(),
            basis,
            scratch: vec![0.0; n],
            image: vec![0.0; n],
            pending: 0,
            recording: false,
            stats: (1..n).map(|_| BatchMeans::for_length(events.max(1))).collect(),
        }
    }

    pub(crate) fn start_recording(&mut self) {
        self.recording = true;
    }

    /// Applies `v -> v J` to every frame vector without forming `J`.
    pub(crate) fn push(&mut self, machine: &LabeledHmm, eta: &[f64], symbol: usize) {
        let n = self.n;
        if n < 2 {
            return;
        }
        let t = machine.matrix(symbol);
        for j in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                v += eta[i] * t[(i, j)];
            }
            self.image[j] = v;
        }
        let s: f64 = self.image.iter().sum();
        for v in self.frame.iter_mut() {
            let mut flux = 0.0;
            for j in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += v[i] * t[(i, j)];
                }
                self.scratch[j] = acc;
                flux += acc;
            }
            for j in 0..n {
                v[j] = self.scratch[j] / s - flux * self.image[j] / (s * s);
            }
        }
        self.pending += 1;
        if self.pending == self.reorth_every {
            self.pending = 0;
            self.orthonormalize();
        }
    }

    fn orthonormalize(&mut self) {
        let k = self.frame.len();
        for a in 0..k {
            for b in 0..a {
                let dot: f64 = dot(&self.frame[a], &self.frame[b]);
                let (head, tail) = self.frame.split_at_mut(a);
                axpy(&mut tail[0], -dot, &head[b]);
            }
            let r = dot(&self.frame[a], &self.frame[a]).sqrt();
            let log_r = if r < COLLAPSE || !r.is_finite() {
                self.frame[a] = self.completion(a);
                COLLAPSE.log2()
            } else {
                self.frame[a].iter_mut().for_each(|x| *x /= r);
                r.log2()
            };
            if self.recording {
                self.stats[a].push(log_r);
            }
        }
    }

    /// Unit tangent vector orthogonal to `frame[..a]`.
    fn completion(&self, a: usize) -> Vec<f64> {
        let mut best = (0.0, vec![0.0; self.n]);
        for e in &self.basis {
            let mut v = e.clone();
            for f in &self.frame[..a] {
                let d = dot(&v, f);
                axpy(&mut v, -d, f);
            }
            let r = dot(&v, &v).sqrt();
            if r > best.0 {
                best = (r, v);
            }
        }
        let (r, mut v) = best;
        v.iter_mut().for_each(|x| *x /= r);
        v
    }

    pub(crate) fn finish(self, length: usize) -> LceEstimate {
        let per_step = self.reorth_every as f64;
        let mut pairs: Vec<(f64, f64)> = self
            .stats
            .iter()
            .map(|s| (s.mean() / per_step, s.stderr() / per_step))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        LceEstimate {
            floored: pairs.iter().map(|p| p.0 < FLOOR_EXPONENT).collect(),
            exponents: pairs.iter().map(|p| p.0).collect(),
            stderr: pairs.iter().map(|p| p.1).collect(),
            length,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Lyapunov spectrum along the orbit [`crate::iterate_trajectory`] would
/// follow for the same seed and burn-in.
pub fn lce_spectrum(machine: &LabeledHmm, config: &LceConfig) -> Result<LceEstimate> {
    if config.length < MIN_LCE_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "LCE length {} below minimum {MIN_LCE_LENGTH}",
            config.length
        )));
    }
    if config.reorth_every == 0 {
        return Err(Error::InvalidArgument("reorth_every must be >= 1".into()));
    }
    let mut walk = MixedStateWalk::new(machine, config.seed);
    let mut acc = LceAccumulator::new(machine.num_states(), config.reorth_every, config.length);
    for t in 0..config.burn_in + config.length {
        if t == config.burn_in {
            acc.start_recording();
        }
        walk.step_with(|eta, _, x| acc.push(machine, eta, x));
    }
    Ok(acc.finish(config.length))
}
