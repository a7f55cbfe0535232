//! Edge-labeled hidden Markov models.
//!
//! A machine over `N` hidden states and `M` symbols is a set of `M`
//! substochastic matrices `T^(x)` with `T^(x)[i][j] = Pr(emit x, go to j | in i)`.
//! Their sum `T` is a stochastic, irreducible matrix. Validated machines are
//! immutable and carry their stationary distribution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result, UnifilarWitness};
use crate::info::{neg_plogp, shannon_entropy};

/// Row sums must be 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Entries below this magnitude are structural zeros for unifilarity.
pub const UNIFILAR_ZERO: f64 = 1e-14;
/// Power-iteration tolerance for the stationary fallback.
pub const POWER_TOL: f64 = 1e-13;
const FIXED_POINT_TOL: f64 = 1e-10;

/// Unvalidated machine description.
#[derive(Debug, Clone)]
pub struct RawMachine {
    pub state_ids: Vec<String>,
    pub alphabet: Vec<String>,
    pub matrices: Vec<DMatrix<f64>>,
}

impl RawMachine {
    /// Empty (all structural zeros) machine of the given shape.
    pub fn zeros(state_ids: Vec<String>, alphabet: Vec<String>) -> Self {
        let n = state_ids.len();
        let matrices = alphabet.iter().map(|_| DMatrix::zeros(n, n)).collect();
        RawMachine {
            state_ids,
            alphabet,
            matrices,
        }
    }

    /// Builder helper: add `prob` to `T^(symbol)[from][to]`.
    pub fn with(mut self, symbol: usize, from: usize, to: usize, prob: f64) -> Self {
        self.matrices[symbol][(from, to)] += prob;
        self
    }

    pub fn validate(self) -> Result<LabeledHmm> {
        validate(self)
    }
}

/// Stationary distribution `pi` with `pi T = pi`, `sum(pi) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub probs: Vec<f64>,
}

impl StationaryDistribution {
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// A validated edge-labeled HMM.
#[derive(Debug, Clone)]
pub struct LabeledHmm {
    state_ids: Vec<String>,
    alphabet: Vec<String>,
    matrices: Vec<DMatrix<f64>>,
    stationary: StationaryDistribution,
}

/// Outcome of [`LabeledHmm::is_unifilar`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifilarCheck {
    pub unifilar: bool,
    pub witness: Option<UnifilarWitness>,
}

/// Checks shape, entries, row sums and irreducibility, then computes and
/// caches the stationary distribution.
pub fn validate(raw: RawMachine) -> Result<LabeledHmm> {
    let n = raw.state_ids.len();
    let m = raw.alphabet.len();
    if n == 0 {
        return Err(Error::DimensionMismatch("machine has no states".into()));
    }
    if m == 0 {
        return Err(Error::DimensionMismatch("machine has an empty alphabet".into()));
    }
    if raw.matrices.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols but {} transition matrices",
            m,
            raw.matrices.len()
        )));
    }
    for (x, t) in raw.matrices.iter().enumerate() {
        if t.nrows() != n || t.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "T^({x}) is {}x{}, expected {n}x{n}",
                t.nrows(),
                t.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = t[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite entry in T^({x})[{i}][{j}]"
                    )));
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        symbol: x,
                        from: i,
                        to: j,
                        value: v,
                    });
                }
            }
        }
    }
    for i in 0..n {
        let sum: f64 = raw.matrices.iter().map(|t| t.row(i).sum()).sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NonStochasticRow {
                state: i,
                deficit: 1.0 - sum,
            });
        }
    }

    let summed = raw
        .matrices
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, t| acc + t);
    let components = strongly_connected(&summed);
    if components.len() > 1 {
        return Err(Error::Reducible {
            components: components
                .into_iter()
                .map(|c| c.into_iter().map(|i| raw.state_ids[i].clone()).collect())
                .collect(),
        });
    }

    let stationary = solve_stationary(&summed)?;
    Ok(LabeledHmm {
        state_ids: raw.state_ids,
        alphabet: raw.alphabet,
        matrices: raw.matrices,
        stationary,
    })
}

/// Strongly connected components of the support graph of `t`, via mutual
/// reachability. Machines are small so the O(N^3) cost is irrelevant.
fn strongly_connected(t: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = t.nrows();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if t[(i, j)] > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut comps = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &comp {
            assigned[j] = true;
        }
        comps.push(comp);
    }
    comps
}

/// Left eigenvector of a stochastic matrix: direct solve of
/// `(T^T - I) pi = 0` with one equation replaced by `sum(pi) = 1`, falling
/// back to power iteration when the solve is ill-conditioned.
pub fn solve_stationary(t: &DMatrix<f64>) -> Result<StationaryDistribution> {
    let n = t.nrows();
    if n == 1 {
        return Ok(StationaryDistribution { probs: vec![1.0] });
    }
    let mut a = t.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    if let Some(sol) = a.lu().solve(&b) {
        let mut probs: Vec<f64> = sol.iter().map(|&p| if p < 0.0 && p > -1e-12 { 0.0 } else { p }).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        if probs.iter().all(|&p| p >= 0.0) && fixed_point_residual(t, &probs) < FIXED_POINT_TOL {
            return Ok(StationaryDistribution { probs });
        }
    }
    power_iteration(t)
}

fn fixed_point_residual(t: &DMatrix<f64>, p: &[f64]) -> f64 {
    let n = t.nrows();
    (0..n)
        .map(|j| ((0..n).map(|i| p[i] * t[(i, j)]).sum::<f64>() - p[j]).abs())
        .sum()
}

fn power_iteration(t: &DMatrix<f64>) -> Result<StationaryDistribution> {
    let n = t.nrows();
    // Lazy chain (I + T)/2 has the same fixed point and is aperiodic.
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for _ in 0..1_000_000 {
        for j in 0..n {
            next[j] = 0.5 * p[j] + 0.5 * (0..n).map(|i| p[i] * t[(i, j)]).sum::<f64>();
        }
        let s: f64 = next.iter().sum();
        delta = 0.0;
        for j in 0..n {
            next[j] /= s;
            delta += (next[j] - p[j]).abs();
        }
        std::mem::swap(&mut p, &mut next);
        if delta < POWER_TOL {
            return Ok(StationaryDistribution { probs: p });
        }
    }
    Err(Error::NoConvergence { residual: delta })
}

impl LabeledHmm {
    pub fn num_states(&self) -> usize {
        self.state_ids.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn state_ids(&self) -> &[String] {
        &self.state_ids
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// `T^(symbol)`.
    pub fn matrix(&self, symbol: usize) -> &DMatrix<f64> {
        &self.matrices[symbol]
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// `T = sum_x T^(x)`.
    pub fn summed(&self) -> DMatrix<f64> {
        let n = self.num_states();
        self.matrices
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, t| acc + t)
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.stationary
    }

    /// Recomputes the stationary distribution from scratch.
    pub fn stationary_distribution(&self) -> Result<StationaryDistribution> {
        solve_stationary(&self.summed())
    }

    /// Stationary single-symbol marginals `Pr(x) = pi T^(x) 1`.
    pub fn symbol_marginals(&self) -> Vec<f64> {
        let pi = self.stationary.as_slice();
        self.matrices
            .iter()
            .map(|t| (0..self.num_states()).map(|i| pi[i] * t.row(i).sum()).sum())
            .collect()
    }

    /// True iff every row of every `T^(x)` has at most one entry above
    /// [`UNIFILAR_ZERO`]. The first offending (state, symbol) is returned as
    /// a witness otherwise.
    pub fn is_unifilar(&self) -> UnifilarCheck {
        let n = self.num_states();
        for i in 0..n {
            for (x, t) in self.matrices.iter().enumerate() {
                let successors: Vec<usize> =
                    (0..n).filter(|&j| t[(i, j)] >= UNIFILAR_ZERO).collect();
                if successors.len() > 1 {
                    return UnifilarCheck {
                        unifilar: false,
                        witness: Some(UnifilarWitness {
                            state: i,
                            symbol: x,
                            successors,
                        }),
                    };
                }
            }
        }
        UnifilarCheck {
            unifilar: true,
            witness: None,
        }
    }

    fn require_unifilar(&self) -> Result<()> {
        match self.is_unifilar().witness {
            Some(w) => Err(Error::NotUnifilar(w)),
            None => Ok(()),
        }
    }

    /// State-averaged symbol uncertainty, exact for unifilar machines:
    /// `-sum_s pi_s sum_x sum_s' T^(x)[s][s'] log2 T^(x)[s][s']`.
    pub fn hmu_exact_unifilar(&self) -> Result<f64> {
        self.require_unifilar()?;
        let pi = self.stationary.as_slice();
        let n = self.num_states();
        Ok((0..n)
            .map(|i| {
                pi[i]
                    * self
                        .matrices
                        .iter()
                        .map(|t| (0..n).map(|j| neg_plogp(t[(i, j)])).sum::<f64>())
                        .sum::<f64>()
            })
            .sum())
    }

    /// Shannon entropy of the stationary state distribution. Assumes the
    /// states are probabilistically distinct; that is not checked.
    pub fn cmu_exact(&self) -> Result<f64> {
        self.require_unifilar()?;
        Ok(shannon_entropy(self.stationary.as_slice()))
    }

    /// Same machine with two symbols' matrices exchanged.
    pub fn swap_symbols(&self, a: usize, b: usize) -> LabeledHmm {
        let mut out = self.clone();
        out.matrices.swap(a, b);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(k: usize, prefix: &str) -> Vec<String> {
        (0..k).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn single_state_identity() {
        let m = RawMachine::zeros(names(1, "s"), names(1, "x"))
            .with(0, 0, 0, 1.0)
            .validate()
            .unwrap();
        assert_eq!(m.stationary().probs, vec![1.0]);
        assert!(m.is_unifilar().unifilar);
        assert_eq!(m.cmu_exact().unwrap(), 0.0);
        assert_eq!(m.hmu_exact_unifilar().unwrap(), 0.0);
    }

    #[test]
    fn rejects_short_row() {
        let err = RawMachine::zeros(names(2, "s"), names(1, "x"))
            .with(0, 0, 1, 0.9)
            .with(0, 1, 0, 1.0)
            .validate()
            .unwrap_err();
        match err {
            Error::NonStochasticRow { state, deficit } => {
                assert_eq!(state, 0);
                assert!((deficit - 0.1).abs() < 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_negative_and_reducible() {
        let err = RawMachine::zeros(names(2, "s"), names(2, "x"))
            .with(0, 0, 0, 1.5)
            .with(1, 0, 0, -0.5)
            .with(0, 1, 1, 1.0)
            .validate()
            .unwrap_err();
        assert!(matches!(err, Error::NegativeEntry { symbol: 1, from: 0, to: 0, .. }));

        let err = RawMachine::zeros(names(2, "s"), names(1, "x"))
            .with(0, 0, 0, 1.0)
            .with(0, 1, 1, 1.0)
            .validate()
            .unwrap_err();
        match err {
            Error::Reducible { components } => assert_eq!(components.len(), 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_shape_errors() {
        let mut raw = RawMachine::zeros(names(2, "s"), names(2, "x"));
        raw.matrices.pop();
        assert!(matches!(raw.validate(), Err(Error::DimensionMismatch(_))));
        let raw = RawMachine {
            state_ids: names(2, "s"),
            alphabet: names(1, "x"),
            matrices: vec![DMatrix::from_element(3, 3, 1.0 / 3.0)],
        };
        assert!(matches!(raw.validate(), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let m = RawMachine::zeros(names(2, "s"), names(2, "x"))
            .with(0, 0, 0, 0.3)
            .with(1, 0, 1, 0.7)
            .with(0, 1, 0, 0.7)
            .with(1, 1, 1, 0.3)
            .validate()
            .unwrap();
        for p in &m.stationary().probs {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn golden_mean_exact_values() {
        let m = fixtures::golden_mean();
        let pi = m.stationary().as_slice();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.hmu_exact_unifilar().unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let h = -(2.0f64 / 3.0) * (2.0f64 / 3.0).log2() - (1.0f64 / 3.0) * (1.0f64 / 3.0).log2();
        assert!((m.cmu_exact().unwrap() - h).abs() < 1e-12);
        assert!((h - 0.91830).abs() < 1e-5);
    }

    #[test]
    fn fair_coin_one_bit() {
        let m = fixtures::biased_coin(0.5);
        assert!((m.hmu_exact_unifilar().unwrap() - 1.0).abs() < 1e-15);
        assert!(m.is_unifilar().unifilar);
    }

    #[test]
    fn nonunifilar_witness_and_error() {
        let c = fixtures::fig2c();
        let check = c.is_unifilar();
        assert!(!check.unifilar);
        let w = check.witness.unwrap();
        assert_eq!((w.state, w.symbol), (0, 0));
        assert_eq!(w.successors, vec![0, 1]);
        assert!(matches!(c.hmu_exact_unifilar(), Err(Error::NotUnifilar(_))));
        assert!(matches!(c.cmu_exact(), Err(Error::NotUnifilar(_))));
    }

    #[test]
    fn power_iteration_agrees_with_solve() {
        let m = fixtures::fig2c();
        let direct = m.stationary().probs.clone();
        let power = power_iteration(&m.summed()).unwrap().probs;
        for (a, b) in direct.iter().zip(&power) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
