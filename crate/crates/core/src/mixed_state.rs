//! Mixed states and the Blackwell entropy-rate estimator.
//!
//! A mixed state `eta` is the observer's distribution over hidden states
//! given the symbols seen so far. Observing `x` maps it to
//! `eta T^(x) / (eta T^(x) 1)`; these maps form an iterated function system
//! on the simplex. Averaging the next-symbol uncertainty along one long
//! orbit, with symbols drawn from `Pr(x | eta_t)`, gives the entropy rate of
//! the observed process even when the machine is nonunifilar.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hmm::LabeledHmm;
use crate::info::{neg_plogp, BatchMeans};
use crate::sampling::{seeded_rng, SeededRng};

/// Probabilities at or below this are treated as structural zeros.
pub const UNDERFLOW: f64 = 1e-300;
/// Slightly negative entries from rounding are clamped to zero.
const NEGATIVE_SLACK: f64 = 1e-15;
const SIMPLEX_TOL: f64 = 1e-12;
/// Release builds verify the simplex invariant at this stride.
const RELEASE_CHECK_STRIDE: u64 = 10_000;

/// Default number of discarded initial iterates.
pub const DEFAULT_BURN_IN: usize = 1_000;

/// Distribution over the hidden states of a specific machine.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    pub probs: Vec<f64>,
}

impl MixedState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < -NEGATIVE_SLACK) {
            return Err(Error::InvalidArgument("mixed state has negative entries".into()));
        }
        let mut s = MixedState { probs };
        if s.probs.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidArgument("mixed state has zero mass".into()));
        }
        s.renormalize();
        Ok(s)
    }

    /// Point mass on `state`.
    pub fn delta(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        MixedState { probs }
    }

    /// `eta_0 = pi`.
    pub fn stationary(machine: &LabeledHmm) -> Self {
        MixedState {
            probs: machine.stationary().probs.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn renormalize(&mut self) {
        renormalize(&mut self.probs);
    }

    pub fn l1_distance(&self, other: &MixedState) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Clamp rounding negatives and rescale to unit L1 mass.
#[inline]
pub(crate) fn renormalize(v: &mut [f64]) {
    let mut total = 0.0;
    for p in v.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
        total += *p;
    }
    for p in v.iter_mut() {
        *p /= total;
    }
}

fn check_simplex(v: &[f64]) {
    let total: f64 = v.iter().sum();
    assert!(
        v.iter().all(|&p| p >= -NEGATIVE_SLACK) && (total - 1.0).abs() <= SIMPLEX_TOL,
        "mixed state left the simplex: {v:?}"
    );
}

fn check_dims(eta: &MixedState, machine: &LabeledHmm) -> Result<()> {
    if eta.len() != machine.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "mixed state over {} states, machine has {}",
            eta.len(),
            machine.num_states()
        )));
    }
    Ok(())
}

/// `Pr(x | eta) = eta T^(x) 1` for every symbol.
pub fn symbol_distribution(eta: &MixedState, machine: &LabeledHmm) -> Result<Vec<f64>> {
    check_dims(eta, machine)?;
    let n = machine.num_states();
    Ok(machine
        .matrices()
        .iter()
        .map(|t| (0..n).map(|i| eta.probs[i] * t.row(i).sum()).sum())
        .collect())
}

/// `eta T^(x) / (eta T^(x) 1)`.
pub fn propagate(eta: &MixedState, symbol: usize, machine: &LabeledHmm) -> Result<MixedState> {
    check_dims(eta, machine)?;
    if symbol >= machine.alphabet_size() {
        return Err(Error::InvalidArgument(format!("symbol {symbol} out of range")));
    }
    let n = machine.num_states();
    let t = machine.matrix(symbol);
    let mut next: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| eta.probs[i] * t[(i, j)]).sum())
        .collect();
    let mass: f64 = next.iter().sum();
    if mass <= UNDERFLOW {
        return Err(Error::ZeroProbabilitySymbol { symbol });
    }
    for p in &mut next {
        *p /= mass;
    }
    renormalize(&mut next);
    Ok(MixedState { probs: next })
}

/// `eta(w)`: the fold of [`propagate`] over `word` starting from `pi`.
pub fn mixed_state_of_word(machine: &LabeledHmm, word: &[usize]) -> Result<MixedState> {
    word.iter()
        .enumerate()
        .try_fold(MixedState::stationary(machine), |eta, (pos, &x)| {
            propagate(&eta, x, machine).map_err(|e| match e {
                Error::ZeroProbabilitySymbol { .. } => Error::ZeroProbabilityWord { position: pos },
                other => other,
            })
        })
}

/// One orbit of the mixed-state dynamic, starting at `pi`.
///
/// Each step draws `x ~ Pr(. | eta_t)` with one uniform variate and moves
/// `eta` in place. Every estimator built on a walk with the same seed sees
/// the same orbit.
pub struct MixedStateWalk<'a> {
    machine: &'a LabeledHmm,
    row_sums: Vec<Vec<f64>>,
    eta: Vec<f64>,
    next: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    rng: SeededRng,
    steps: u64,
}

impl<'a> MixedStateWalk<'a> {
    pub fn new(machine: &'a LabeledHmm, seed: u64) -> Self {
        let n = machine.num_states();
        let m = machine.alphabet_size();
        let row_sums = machine
            .matrices()
            .iter()
            .map(|t| (0..n).map(|i| t.row(i).sum()).collect())
            .collect();
        MixedStateWalk {
            machine,
            row_sums,
            eta: machine.stationary().probs.clone(),
            next: vec![0.0; n],
            probs: vec![0.0; m],
            cumulative: vec![0.0; m],
            rng: seeded_rng(seed),
            steps: 0,
        }
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn machine(&self) -> &LabeledHmm {
        self.machine
    }

    /// Advances one step. `visit` sees the pre-step mixed state, its symbol
    /// distribution and the drawn symbol.
    #[inline]
    pub fn step_with<F: FnMut(&[f64], &[f64], usize)>(&mut self, mut visit: F) -> usize {
        let n = self.eta.len();
        let mut acc = 0.0;
        for (x, sums) in self.row_sums.iter().enumerate() {
            let mut p = 0.0;
            for i in 0..n {
                p += self.eta[i] * sums[i];
            }
            if p <= UNDERFLOW {
                p = 0.0;
            }
            self.probs[x] = p;
            acc += p;
            self.cumulative[x] = acc;
        }
        let u: f64 = self.rng.random();
        let target = u * acc;
        let x = self
            .cumulative
            .iter()
            .position(|&c| target < c)
            .unwrap_or_else(|| self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0));

        visit(&self.eta, &self.probs, x);

        let t = self.machine.matrix(x);
        let mut mass = 0.0;
        for j in 0..n {
            let mut v = 0.0;
            for i in 0..n {
                v += self.eta[i] * t[(i, j)];
            }
            self.next[j] = v;
            mass += v;
        }
        for j in 0..n {
            self.next[j] /= mass;
        }
        renormalize(&mut self.next);
        std::mem::swap(&mut self.eta, &mut self.next);

        self.steps += 1;
        if cfg!(debug_assertions) || self.steps.is_multiple_of(RELEASE_CHECK_STRIDE) {
            check_simplex(&self.eta);
        }
        x
    }

    pub fn step(&mut self) -> usize {
        self.step_with(|_, _, _| {})
    }
}

/// Flat storage for a sequence of mixed states.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        PointCloud {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, points: usize) -> Self {
        PointCloud {
            dim,
            coords: Vec::with_capacity(dim * points),
        }
    }

    pub fn from_points<I: IntoIterator<Item = Vec<f64>>>(dim: usize, points: I) -> Self {
        let mut c = PointCloud::new(dim);
        for p in points {
            c.push(&p);
        }
        c
    }

    pub fn push(&mut self, point: &[f64]) {
        assert_eq!(point.len(), self.dim, "point dimension");
        self.coords.extend_from_slice(point);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }
}

/// Settings shared by the orbit-based estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryConfig {
    /// Post-burn-in iterates.
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Keep every `decimation`-th post-burn-in mixed state; `None` keeps none.
    pub decimation: Option<usize>,
}

impl TrajectoryConfig {
    pub fn new(length: usize, seed: u64) -> Self {
        TrajectoryConfig {
            length,
            burn_in: DEFAULT_BURN_IN,
            seed,
            decimation: None,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_cloud(mut self, decimation: usize) -> Self {
        self.decimation = Some(decimation.max(1));
        self
    }
}

/// Result of [`iterate_trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEstimate {
    /// Entropy rate estimate, bits per symbol.
    pub hmu_b: f64,
    /// Batch-means standard error of `hmu_b`.
    pub stderr: f64,
    pub length: usize,
    pub burn_in: usize,
    pub point_cloud: Option<PointCloud>,
}

pub const MIN_TRAJECTORY_LENGTH: usize = 1_000;

/// Time-averaged next-symbol uncertainty along one mixed-state orbit.
pub fn iterate_trajectory(machine: &LabeledHmm, config: &TrajectoryConfig) -> Result<TrajectoryEstimate> {
    if config.length < MIN_TRAJECTORY_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "trajectory length {} below minimum {MIN_TRAJECTORY_LENGTH}",
            config.length
        )));
    }
    let n = machine.num_states();
    let mut walk = MixedStateWalk::new(machine, config.seed);
    for _ in 0..config.burn_in {
        walk.step();
    }
    let mut acc = BatchMeans::for_length(config.length);
    let mut cloud = config
        .decimation
        .map(|d| PointCloud::with_capacity(n, config.length / d + 1));
    for t in 0..config.length {
        walk.step_with(|eta, probs, _| {
            acc.push(probs.iter().copied().map(neg_plogp).sum());
            if let (Some(c), Some(d)) = (cloud.as_mut(), config.decimation) {
                if t % d == 0 {
                    c.push(eta);
                }
            }
        });
    }
    Ok(TrajectoryEstimate {
        hmu_b: acc.mean(),
        stderr: acc.stderr(),
        length: config.length,
        burn_in: config.burn_in,
        point_cloud: cloud,
    })
}
