//! JSON machine files.
//!
//! ```json
//! { "states": ["A", "B"],
//!   "alphabet": ["0", "1"],
//!   "transitions": [ {"from": "A", "to": "B", "symbol": 0, "prob": 0.5}, ... ] }
//! ```
//!
//! Alphabet entries are either plain labels (classical machine) or
//! `{"label": "rho0", "bloch": [alpha, beta]}` (qubit machine). A transition's
//! `symbol` is an alphabet index or label. Unlisted transitions are
//! structural zeros.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::{LabeledHmm, RawMachine};
use crate::quantum::{PureQubit, QubitHmm};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    Label(String),
    Qubit { label: String, bloch: [f64; 2] },
}

impl SymbolSpec {
    fn label(&self) -> &str {
        match self {
            SymbolSpec::Label(l) => l,
            SymbolSpec::Qubit { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub from: String,
    pub to: String,
    pub symbol: SymbolRef,
    pub prob: f64,
}

/// On-disk machine description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineFile {
    pub states: Vec<String>,
    pub alphabet: Vec<SymbolSpec>,
    pub transitions: Vec<TransitionSpec>,
}

/// A machine file after validation.
#[derive(Debug, Clone)]
pub enum LoadedMachine {
    Classical(LabeledHmm),
    Qubit(QubitHmm),
}

impl LoadedMachine {
    /// Underlying labeled machine (for a qubit source, the generator with
    /// qubit labels as symbols).
    pub fn machine(&self) -> &LabeledHmm {
        match self {
            LoadedMachine::Classical(m) => m,
            LoadedMachine::Qubit(q) => q.machine(),
        }
    }

    pub fn as_qubit(&self) -> Option<&QubitHmm> {
        match self {
            LoadedMachine::Qubit(q) => Some(q),
            LoadedMachine::Classical(_) => None,
        }
    }
}

impl MachineFile {
    pub fn into_raw(self) -> Result<(RawMachine, Option<Vec<PureQubit>>)> {
        let state_index = |name: &str| {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::MachineFile(format!("unknown state {name:?}")))
        };
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                return Err(Error::MachineFile(format!("duplicate state {s:?}")));
            }
        }
        let labels: Vec<String> = self.alphabet.iter().map(|s| s.label().to_string()).collect();
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::MachineFile(format!("duplicate symbol {l:?}")));
            }
        }

        let qubit_count = self
            .alphabet
            .iter()
            .filter(|s| matches!(s, SymbolSpec::Qubit { .. }))
            .count();
        let qubits = if qubit_count == 0 {
            None
        } else if qubit_count == self.alphabet.len() {
            Some(
                self.alphabet
                    .iter()
                    .map(|s| match s {
                        SymbolSpec::Qubit { bloch, .. } => PureQubit::new(bloch[0], bloch[1]),
                        SymbolSpec::Label(_) => unreachable!(),
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            return Err(Error::MachineFile(
                "alphabet mixes classical labels and qubit symbols".into(),
            ));
        };

        let mut raw = RawMachine::zeros(self.states.clone(), labels.clone());
        let mut seen_edges = HashSet::new();
        for t in &self.transitions {
            let from = state_index(&t.from)?;
            let to = state_index(&t.to)?;
            let symbol = match &t.symbol {
                SymbolRef::Index(i) if *i < labels.len() => *i,
                SymbolRef::Index(i) => {
                    return Err(Error::MachineFile(format!("symbol index {i} out of range")))
                }
                SymbolRef::Label(l) => labels
                    .iter()
                    .position(|s| s == l)
                    .ok_or_else(|| Error::MachineFile(format!("unknown symbol {l:?}")))?,
            };
            if !seen_edges.insert((from, to, symbol)) {
                return Err(Error::MachineFile(format!(
                    "duplicate transition {} -> {} on {:?}",
                    t.from, t.to, labels[symbol]
                )));
            }
            raw.matrices[symbol][(from, to)] = t.prob;
        }
        Ok((raw, qubits))
    }

    pub fn into_machine(self) -> Result<LoadedMachine> {
        let (raw, qubits) = self.into_raw()?;
        let machine = raw.validate()?;
        Ok(match qubits {
            None => LoadedMachine::Classical(machine),
            Some(q) => LoadedMachine::Qubit(QubitHmm::new(machine, q)?),
        })
    }

    /// File description of a classical machine; only nonzero entries are listed.
    pub fn from_machine(machine: &LabeledHmm) -> Self {
        Self::build(
            machine,
            machine.alphabet().iter().cloned().map(SymbolSpec::Label).collect(),
        )
    }

    pub fn from_qubit_machine(source: &QubitHmm) -> Self {
        let m = source.machine();
        let alphabet = m
            .alphabet()
            .iter()
            .zip(source.qubits())
            .map(|(l, q)| SymbolSpec::Qubit {
                label: l.clone(),
                bloch: [q.alpha, q.beta],
            })
            .collect();
        Self::build(m, alphabet)
    }

    fn build(machine: &LabeledHmm, alphabet: Vec<SymbolSpec>) -> Self {
        let n = machine.num_states();
        let ids = machine.state_ids();
        let mut transitions = Vec::new();
        for i in 0..n {
            for (x, t) in machine.matrices().iter().enumerate() {
                for j in 0..n {
                    let p = t[(i, j)];
                    if p != 0.0 {
                        transitions.push(TransitionSpec {
                            from: ids[i].clone(),
                            to: ids[j].clone(),
                            symbol: SymbolRef::Index(x),
                            prob: p,
                        });
                    }
                }
            }
        }
        MachineFile {
            states: ids.to_vec(),
            alphabet,
            transitions,
        }
    }
}

pub fn parse_machine(text: &str) -> Result<LoadedMachine> {
    let file: MachineFile = serde_json::from_str(text)?;
    file.into_machine()
}

pub fn load_machine(path: impl AsRef<Path>) -> Result<LoadedMachine> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MachineFile(format!("{}: {e}", path.display())))?;
    parse_machine(&text)
}

/// Pretty-printed JSON for a classical machine.
pub fn machine_to_json(machine: &LabeledHmm) -> String {
    serde_json::to_string_pretty(&MachineFile::from_machine(machine))
        .expect("machine file serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn empty_input_is_a_parse_error() {
        assert!(matches!(parse_machine(""), Err(Error::Json { line: 1, .. })));
    }

    #[test]
    fn reports_line_context() {
        let text = "{\n \"states\": [\"A\"],\n \"alphabet\": [\"0\"],\n \"transitions\": [ oops ]\n}";
        match parse_machine(text) {
            Err(Error::Json { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symbol_by_label_and_index() {
        let text = r#"{"states":["A"],"alphabet":["h","t"],
            "transitions":[{"from":"A","to":"A","symbol":"h","prob":0.25},
                           {"from":"A","to":"A","symbol":1,"prob":0.75}]}"#;
        let m = parse_machine(text).unwrap();
        assert_eq!(m.machine().symbol_marginals(), vec![0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_references() {
        let base = |t: &str| {
            format!(r#"{{"states":["A"],"alphabet":["h"],"transitions":[{t}]}}"#)
        };
        for t in [
            r#"{"from":"B","to":"A","symbol":0,"prob":1.0}"#,
            r#"{"from":"A","to":"A","symbol":3,"prob":1.0}"#,
            r#"{"from":"A","to":"A","symbol":"q","prob":1.0}"#,
        ] {
            assert!(matches!(parse_machine(&base(t)), Err(Error::MachineFile(_))), "{t}");
        }
        let dup = base(
            r#"{"from":"A","to":"A","symbol":0,"prob":0.5},{"from":"A","to":"A","symbol":0,"prob":0.5}"#,
        );
        assert!(matches!(parse_machine(&dup), Err(Error::MachineFile(_))));
    }

    #[test]
    fn qubit_fixture_round_trips() {
        let src = fixtures::fig2b();
        let json = serde_json::to_string(&MachineFile::from_qubit_machine(&src)).unwrap();
        let back = parse_machine(&json).unwrap();
        let q = back.as_qubit().expect("qubit machine");
        assert_eq!(q.qubits(), src.qubits());
        for x in 0..2 {
            assert_eq!(q.machine().matrix(x), src.machine().matrix(x));
        }
    }

    #[test]
    fn mixed_alphabet_rejected() {
        let text = r#"{"states":["A"],"alphabet":["h",{"label":"q","bloch":[0,0]}],
            "transitions":[{"from":"A","to":"A","symbol":0,"prob":1.0}]}"#;
        assert!(matches!(parse_machine(text), Err(Error::MachineFile(_))));
    }
}
