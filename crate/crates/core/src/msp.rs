//! Breadth-first construction of the mixed-state presentation.
//!
//! Starting at `pi`, every positive-probability symbol is applied to every
//! discovered mixed state; states closer than `merge_tol` in L1 are
//! identified. When the closure finishes within the state budget, the
//! recurrent part is the causal-state set and the exact unifilar formulas
//! apply to it. Running out of budget usually signals an uncountable set of
//! mixed states, but a large finite or countable set looks the same; use
//! [`merge_tolerance_sweep`] to probe the sensitivity.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::hmm::LabeledHmm;
use crate::info::{neg_plogp, shannon_entropy};
use crate::mixed_state::{symbol_distribution, MixedState, UNDERFLOW};

pub const DEFAULT_MERGE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_STATES: usize = 10_000;
/// Grid hashing enumerates `3^N` neighbour cells; beyond this many states a
/// linear scan is cheaper.
const GRID_MAX_DIM: usize = 8;
const DENSE_SOLVE_MAX: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MspConfig {
    pub merge_tol: f64,
    pub max_states: usize,
}

impl Default for MspConfig {
    fn default() -> Self {
        MspConfig {
            merge_tol: DEFAULT_MERGE_TOL,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Outgoing edge of a mixed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MspTransition {
    pub prob: f64,
    pub target: usize,
}

/// A closed (finite) mixed-state presentation.
#[derive(Debug, Clone)]
pub struct MsPresentation {
    pub mixed_states: Vec<MixedState>,
    pub recurrent: Vec<bool>,
    /// `transitions[s][x]`, `None` for zero-probability symbols.
    pub transitions: Vec<Vec<Option<MspTransition>>>,
    /// Stationary weights; zero on transient states.
    pub state_probabilities: Vec<f64>,
    /// Entropy rate of the presentation (exact, since it is unifilar).
    pub hmu: f64,
    /// Entropy of the stationary weights over recurrent states.
    pub cmu: f64,
}

impl MsPresentation {
    pub fn num_states(&self) -> usize {
        self.mixed_states.len()
    }

    pub fn num_recurrent(&self) -> usize {
        self.recurrent.iter().filter(|&&r| r).count()
    }

    pub fn recurrent_states(&self) -> impl Iterator<Item = &MixedState> + '_ {
        self.mixed_states
            .iter()
            .zip(&self.recurrent)
            .filter(|(_, &r)| r)
            .map(|(s, _)| s)
    }
}

#[derive(Debug, Clone)]
pub enum MspOutcome {
    Closed(MsPresentation),
    /// The budget ran out; `frontier` states were still unexpanded.
    BudgetExceeded { states: usize, frontier: usize },
}

impl MspOutcome {
    pub fn closed(&self) -> Option<&MsPresentation> {
        match self {
            MspOutcome::Closed(p) => Some(p),
            MspOutcome::BudgetExceeded { .. } => None,
        }
    }
}

struct StateIndex {
    tol: f64,
    grid: Option<HashMap<Vec<i64>, Vec<usize>>>,
}

impl StateIndex {
    fn new(tol: f64, dim: usize) -> Self {
        StateIndex {
            tol,
            grid: (dim <= GRID_MAX_DIM).then(HashMap::new),
        }
    }

    fn cell(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|&v| (v / self.tol).floor() as i64).collect()
    }

    fn insert(&mut self, p: &[f64], id: usize) {
        let key = self.cell(p);
        if let Some(g) = self.grid.as_mut() {
            g.entry(key).or_default().push(id);
        }
    }

    /// Closest stored state within tolerance.
    fn find(&self, p: &[f64], states: &[MixedState]) -> Option<usize> {
        let dist = |id: usize| -> f64 {
            states[id]
                .probs
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .sum()
        };
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |id: usize| {
            let d = dist(id);
            if d < self.tol && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, id));
            }
        };
        match &self.grid {
            None => (0..states.len()).for_each(&mut consider),
            Some(grid) => {
                let base = self.cell(p);
                let dim = base.len();
                let mut offset = vec![-1i64; dim];
                loop {
                    let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
                    if let Some(ids) = grid.get(&key) {
                        ids.iter().copied().for_each(&mut consider);
                    }
                    // odometer over {-1, 0, 1}^dim
                    let mut k = 0;
                    while k < dim && offset[k] == 1 {
                        offset[k] = -1;
                        k += 1;
                    }
                    if k == dim {
                        break;
                    }
                    offset[k] += 1;
                }
            }
        }
        best.map(|(_, id)| id)
    }
}

pub fn enumerate_msp(machine: &LabeledHmm, config: &MspConfig) -> Result<MspOutcome> {
    if !(config.merge_tol > 0.0) {
        return Err(Error::InvalidArgument("merge tolerance must be positive".into()));
    }
    if config.max_states == 0 {
        return Err(Error::InvalidArgument("state budget must be positive".into()));
    }
    let n = machine.num_states();
    let m = machine.alphabet_size();
    let start = MixedState::stationary(machine);
    let mut index = StateIndex::new(config.merge_tol, n);
    index.insert(&start.probs, 0);
    let mut states = vec![start];
    let mut transitions: Vec<Vec<Option<MspTransition>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(s) = queue.pop_front() {
        let eta = states[s].clone();
        let probs = symbol_distribution(&eta, machine)?;
        let mut row = vec![None; m];
        for (x, &p) in probs.iter().enumerate() {
            if p <= UNDERFLOW {
                continue;
            }
            let next = crate::mixed_state::propagate(&eta, x, machine)?;
            let target = match index.find(&next.probs, &states) {
                Some(id) => id,
                None => {
                    if states.len() >= config.max_states {
                        return Ok(MspOutcome::BudgetExceeded {
                            states: states.len(),
                            frontier: queue.len() + 1,
                        });
                    }
                    let id = states.len();
                    index.insert(&next.probs, id);
                    states.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row[x] = Some(MspTransition { prob: p, target });
        }
        if transitions.len() <= s {
            transitions.resize(s + 1, Vec::new());
        }
        transitions[s] = row;
    }

    let count = states.len();
    let recurrent = bottom_components(&transitions, count);
    let state_probabilities = stationary_weights(&transitions, &recurrent)?;
    let hmu = (0..count)
        .map(|s| {
            state_probabilities[s]
                * transitions[s]
                    .iter()
                    .flatten()
                    .map(|t| neg_plogp(t.prob))
                    .sum::<f64>()
        })
        .sum();
    let cmu = shannon_entropy(&state_probabilities);
    Ok(MspOutcome::Closed(MsPresentation {
        mixed_states: states,
        recurrent,
        transitions,
        state_probabilities,
        hmu,
        cmu,
    }))
}

/// Marks states in closed strongly connected components.
fn bottom_components(transitions: &[Vec<Option<MspTransition>>], count: usize) -> Vec<bool> {
    let mut g = DiGraph::<(), ()>::with_capacity(count, count * 2);
    let nodes: Vec<_> = (0..count).map(|_| g.add_node(())).collect();
    for (s, row) in transitions.iter().enumerate() {
        for t in row.iter().flatten() {
            g.add_edge(nodes[s], nodes[t.target], ());
        }
    }
    let mut component = vec![0usize; count];
    let sccs = tarjan_scc(&g);
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            component[v.index()] = c;
        }
    }
    let mut recurrent = vec![false; count];
    for (c, members) in sccs.iter().enumerate() {
        let closed = members.iter().all(|v| {
            transitions[v.index()]
                .iter()
                .flatten()
                .all(|t| component[t.target] == c)
        });
        if closed {
            for v in members {
                recurrent[v.index()] = true;
            }
        }
    }
    recurrent
}

fn stationary_weights(transitions: &[Vec<Option<MspTransition>>], recurrent: &[bool]) -> Result<Vec<f64>> {
    let count = recurrent.len();
    let members: Vec<usize> = (0..count).filter(|&s| recurrent[s]).collect();
    let single_class = {
        // all recurrent states reachable from the first one
        let mut seen = vec![false; count];
        let mut stack = vec![members[0]];
        seen[members[0]] = true;
        while let Some(s) = stack.pop() {
            for t in transitions[s].iter().flatten() {
                if !seen[t.target] {
                    seen[t.target] = true;
                    stack.push(t.target);
                }
            }
        }
        members.iter().all(|&s| seen[s])
    };

    if single_class && members.len() <= DENSE_SOLVE_MAX {
        let k = members.len();
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut a = DMatrix::<f64>::zeros(k, k);
        for (i, &s) in members.iter().enumerate() {
            for t in transitions[s].iter().flatten() {
                a[(local[&t.target], i)] += t.prob;
            }
            a[(i, i)] -= 1.0;
        }
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(k);
        b[k - 1] = 1.0;
        if let Some(sol) = a.lu().solve(&b) {
            if sol.iter().all(|&p| p > -1e-12) {
                let mut w = vec![0.0; count];
                for (i, &s) in members.iter().enumerate() {
                    w[s] = sol[i].max(0.0);
                }
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|p| *p /= total);
                return Ok(w);
            }
        }
    }

    // Lazy power iteration from the start state; also handles several
    // closed classes by weighting them with their absorption probability.
    let mut p = vec![0.0; count];
    p[0] = 1.0;
    let mut next = vec![0.0; count];
    let mut delta = f64::INFINITY;
    for _ in 0..10_000_000u64 {
        next.iter_mut().zip(&p).for_each(|(n, v)| *n = 0.5 * v);
        for (s, row) in transitions.iter().enumerate() {
            let half = 0.5 * p[s];
            if half == 0.0 {
                continue;
            }
            for t in row.iter().flatten() {
                next[t.target] += half * t.prob;
            }
        }
        delta = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if delta < 1e-15 {
            break;
        }
    }
    if delta >= 1e-12 {
        return Err(Error::NoConvergence { residual: delta });
    }
    for s in 0..count {
        if !recurrent[s] {
            p[s] = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

/// Runs the enumeration at several merge tolerances.
pub fn merge_tolerance_sweep(
    machine: &LabeledHmm,
    tolerances: &[f64],
    max_states: usize,
) -> Result<Vec<(f64, MspOutcome)>> {
    tolerances
        .iter()
        .map(|&merge_tol| {
            enumerate_msp(machine, &MspConfig { merge_tol, max_states }).map(|o| (merge_tol, o))
        })
        .collect()
}
