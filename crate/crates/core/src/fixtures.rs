//! Reference machines shipped with the crate.
//!
//! `fig2a`/`fig2b` are three-state qubit sources emitting `{|0>, |1>}` and
//! `{|0>, |+>}` respectively; `fig2c` is `fig2b` measured at `theta = pi/2`.
//! The JSON originals live in `crates/core/fixtures/`.

use nalgebra::DMatrix;

use crate::hmm::{LabeledHmm, RawMachine};
use crate::machine_file::{parse_machine, LoadedMachine};
use crate::quantum::QubitHmm;

pub const FIG2A_JSON: &str = include_str!("../fixtures/fig2a.json");
pub const FIG2B_JSON: &str = include_str!("../fixtures/fig2b.json");
pub const FIG2C_JSON: &str = include_str!("../fixtures/fig2c.json");
pub const GOLDEN_MEAN_JSON: &str = include_str!("../fixtures/golden_mean.json");
pub const FAIR_COIN_JSON: &str = include_str!("../fixtures/fair_coin.json");

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["fig2a", "fig2b", "fig2c", "golden_mean", "fair_coin"];

pub fn by_name(name: &str) -> Option<LoadedMachine> {
    let text = match name {
        "fig2a" => FIG2A_JSON,
        "fig2b" => FIG2B_JSON,
        "fig2c" => FIG2C_JSON,
        "golden_mean" => GOLDEN_MEAN_JSON,
        "fair_coin" => FAIR_COIN_JSON,
        _ => return None,
    };
    Some(parse_machine(text).expect("shipped fixture is valid"))
}

fn qubit(text: &str) -> QubitHmm {
    match parse_machine(text).expect("shipped fixture is valid") {
        LoadedMachine::Qubit(q) => q,
        LoadedMachine::Classical(_) => panic!("fixture is not a qubit machine"),
    }
}

fn classical(text: &str) -> LabeledHmm {
    parse_machine(text).expect("shipped fixture is valid").machine().clone()
}

pub fn fig2a() -> QubitHmm {
    qubit(FIG2A_JSON)
}

pub fn fig2b() -> QubitHmm {
    qubit(FIG2B_JSON)
}

pub fn fig2c() -> LabeledHmm {
    classical(FIG2C_JSON)
}

pub fn golden_mean() -> LabeledHmm {
    classical(GOLDEN_MEAN_JSON)
}

/// One state, `Pr(0) = p`.
pub fn biased_coin(p: f64) -> LabeledHmm {
    RawMachine::zeros(vec!["A".into()], vec!["0".into(), "1".into()])
        .with(0, 0, 0, p)
        .with(1, 0, 0, 1.0 - p)
        .validate()
        .expect("valid coin")
}

/// Deterministic period-2 machine emitting `0101...`.
pub fn period_two() -> LabeledHmm {
    RawMachine::zeros(vec!["A".into(), "B".into()], vec!["0".into(), "1".into()])
        .with(0, 0, 1, 1.0)
        .with(1, 1, 0, 1.0)
        .validate()
        .expect("valid cycle")
}

/// Two-symbol machine with `T^(0) = T^(1) = chain / 2` for a stochastic
/// `chain`: the mixed-state map is the same linear map for both symbols.
pub fn constant_map(chain: &DMatrix<f64>) -> LabeledHmm {
    let n = chain.nrows();
    RawMachine {
        state_ids: (0..n).map(|i| format!("S{i}")).collect(),
        alphabet: vec!["0".into(), "1".into()],
        matrices: vec![chain * 0.5, chain * 0.5],
    }
    .validate()
    .expect("valid constant map")
}

/// Small fully-connected nonunifilar two-state machine.
pub fn two_state_nonunifilar() -> LabeledHmm {
    RawMachine {
        state_ids: vec!["A".into(), "B".into()],
        alphabet: vec!["0".into(), "1".into()],
        matrices: vec![
            DMatrix::from_row_slice(2, 2, &[0.4, 0.2, 0.1, 0.3]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.2, 0.4]),
        ],
    }
    .validate()
    .expect("valid machine")
}
