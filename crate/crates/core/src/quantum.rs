//! Pure qubits, projective measurements and the measured machine.
//!
//! Qubits and measurement bases are stored as Bloch angles; amplitudes are
//! derived on demand as explicit `(re, im)` pairs. Outcome `0` corresponds
//! to basis vector `psi_0`, outcome `1` to `psi_1`:
//!
//! ```text
//! psi_0 = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
//! psi_1 = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>
//! ```

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hmm::{LabeledHmm, RawMachine};

/// Born probabilities below this are rounding noise and snapped to zero.
const BORN_FLOOR: f64 = 1e-15;

/// Minimal complex number, enough for inner products of qubit amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

impl Amplitude {
    pub const fn new(re: f64, im: f64) -> Self {
        Amplitude { re, im }
    }

    pub fn polar(r: f64, arg: f64) -> Self {
        Amplitude::new(r * arg.cos(), r * arg.sin())
    }

    pub fn conj(self) -> Self {
        Amplitude::new(self.re, -self.im)
    }

    pub fn mul(self, o: Self) -> Self {
        Amplitude::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }

    pub fn add(self, o: Self) -> Self {
        Amplitude::new(self.re + o.re, self.im + o.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Amplitudes `(c0, c1)` of `c0|0> + c1|1>`.
pub type Ket = [Amplitude; 2];

/// `<a|b>`.
pub fn inner(a: &Ket, b: &Ket) -> Amplitude {
    a[0].conj().mul(b[0]).add(a[1].conj().mul(b[1]))
}

/// Pure qubit state at Bloch angles (`alpha` polar, `beta` azimuthal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    pub alpha: f64,
    pub beta: f64,
}

impl PureQubit {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let (alpha, beta) = check_angles(alpha, beta, "alpha", "beta")?;
        Ok(PureQubit { alpha, beta })
    }

    /// `|0>`.
    pub fn zero() -> Self {
        PureQubit { alpha: 0.0, beta: 0.0 }
    }

    /// `|1>`.
    pub fn one() -> Self {
        PureQubit { alpha: PI, beta: 0.0 }
    }

    /// `|+> = (|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        PureQubit { alpha: PI / 2.0, beta: 0.0 }
    }

    /// `(cos(alpha/2), e^{i beta} sin(alpha/2))`.
    pub fn amplitudes(&self) -> Ket {
        [
            Amplitude::new((self.alpha / 2.0).cos(), 0.0),
            Amplitude::polar((self.alpha / 2.0).sin(), self.beta),
        ]
    }
}

/// Projective measurement `{E_0, E_1}` parametrized by Bloch angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveMeasurement {
    pub theta: f64,
    pub phi: f64,
}

impl ProjectiveMeasurement {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let (theta, phi) = check_angles(theta, phi, "theta", "phi")?;
        Ok(ProjectiveMeasurement { theta, phi })
    }

    /// Basis vectors `(psi_0, psi_1)`.
    pub fn basis_vectors(&self) -> (Ket, Ket) {
        let (c, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let psi0 = [Amplitude::new(c, 0.0), Amplitude::polar(s, self.phi)];
        let psi1 = [Amplitude::new(s, 0.0), Amplitude::polar(-c, self.phi)];
        (psi0, psi1)
    }

    /// Outcome probabilities `(p0, p1)` with `p_i = |<psi_i|psi>|^2`.
    pub fn born_probabilities(&self, qubit: &PureQubit) -> [f64; 2] {
        self.born_probabilities_ket(&qubit.amplitudes())
    }

    /// Same as [`born_probabilities`](Self::born_probabilities) for raw
    /// amplitudes (which need not carry a real first component).
    pub fn born_probabilities_ket(&self, ket: &Ket) -> [f64; 2] {
        let (psi0, psi1) = self.basis_vectors();
        let snap = |p: f64| {
            let p = p.clamp(0.0, 1.0);
            if p < BORN_FLOOR {
                0.0
            } else {
                p
            }
        };
        let p0 = snap(inner(&psi0, ket).norm_sqr());
        let p1 = snap(inner(&psi1, ket).norm_sqr());
        let total = p0 + p1;
        [p0 / total, p1 / total]
    }
}

fn check_angles(polar: f64, azimuth: f64, pn: &str, an: &str) -> Result<(f64, f64)> {
    if !polar.is_finite() || !azimuth.is_finite() {
        return Err(Error::InvalidArgument(format!("{pn}/{an} must be finite")));
    }
    if !(-1e-12..=PI + 1e-12).contains(&polar) {
        return Err(Error::InvalidArgument(format!(
            "{pn} = {polar} outside [0, pi]"
        )));
    }
    Ok((polar.clamp(0.0, PI), azimuth.rem_euclid(2.0 * PI)))
}

/// A machine whose alphabet symbols are pure qubits.
#[derive(Debug, Clone)]
pub struct QubitHmm {
    machine: LabeledHmm,
    qubits: Vec<PureQubit>,
}

impl QubitHmm {
    pub fn new(machine: LabeledHmm, qubits: Vec<PureQubit>) -> Result<Self> {
        if qubits.len() != machine.alphabet_size() {
            return Err(Error::DimensionMismatch(format!(
                "{} qubit payloads for {} symbols",
                qubits.len(),
                machine.alphabet_size()
            )));
        }
        Ok(QubitHmm { machine, qubits })
    }

    /// The generator itself, with qubit labels as classical symbols.
    pub fn machine(&self) -> &LabeledHmm {
        &self.machine
    }

    pub fn qubits(&self) -> &[PureQubit] {
        &self.qubits
    }

    /// Composes the source with a measurement:
    /// `T^(x) = sum_j T^{rho_j} Pr(x | rho_j)` over outcomes `x in {0, 1}`.
    pub fn measure(&self, measurement: &ProjectiveMeasurement) -> Result<LabeledHmm> {
        measure_machine(self, measurement)
    }
}

pub fn measure_machine(source: &QubitHmm, measurement: &ProjectiveMeasurement) -> Result<LabeledHmm> {
    let n = source.machine.num_states();
    let mut out = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    for (t, q) in source.machine.matrices().iter().zip(&source.qubits) {
        let p = measurement.born_probabilities(q);
        for (x, o) in out.iter_mut().enumerate() {
            if p[x] > 0.0 {
                *o += t * p[x];
            }
        }
    }
    RawMachine {
        state_ids: source.machine.state_ids().to_vec(),
        alphabet: vec!["0".into(), "1".into()],
        matrices: out.into(),
    }
    .validate()
}
