//! Dense statevector simulator with Pauli-string gates, Hadamard-test
//! circuits and seeded shot sampling.
//!
//! Qubit `q` is bit `q` of the amplitude index. Rotations follow
//! `R_σ(θ) = e^{−iσθ/2}`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::{PauliSum, PauliTerm};
use crate::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_SIM_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Gate {
    Rx { qubit: usize, theta: f64 },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    H { qubit: usize },
    X { qubit: usize },
    Y { qubit: usize },
    Z { qubit: usize },
    Cz { a: usize, b: usize },
    Cnot { control: usize, target: usize },
    /// `e^{−iPθ/2}`; the string acts on qubits `0..label.len()`.
    PauliExp {
        #[serde(with = "label")]
        pauli: PauliTerm,
        theta: f64,
    },
    /// Applies `P` when the control is `|1⟩`.
    ControlledPauli {
        control: usize,
        #[serde(with = "label")]
        pauli: PauliTerm,
    },
    /// Applies `P` when the control is `|0⟩`.
    AntiControlledPauli {
        control: usize,
        #[serde(with = "label")]
        pauli: PauliTerm,
    },
}

mod label {
    use super::PauliTerm;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &PauliTerm, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PauliTerm, D::Error> {
        let s = String::deserialize(d)?;
        PauliTerm::from_label(&s).map_err(D::Error::custom)
    }
}

impl Gate {
    /// Qubits touched by the gate.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::Y { qubit }
            | Gate::Z { qubit } => vec![*qubit],
            Gate::Cz { a, b } => vec![*a, *b],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::PauliExp { pauli, .. } => bits(pauli.support()),
            Gate::ControlledPauli { control, pauli }
            | Gate::AntiControlledPauli { control, pauli } => {
                let mut q = vec![*control];
                q.extend(bits(pauli.support()));
                q
            }
        }
    }

    /// The 2×2 matrix of a single-qubit gate, `None` otherwise.
    pub fn matrix_1q(&self) -> Option<(usize, Matrix2)> {
        let m = match *self {
            Gate::Rx { qubit, theta } => (qubit, rx(theta)),
            Gate::Ry { qubit, theta } => (qubit, ry(theta)),
            Gate::Rz { qubit, theta } => (qubit, rz(theta)),
            Gate::H { qubit } => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                (qubit, [[h, h], [h, -h]])
            }
            Gate::X { qubit } => (qubit, [[ZERO, ONE], [ONE, ZERO]]),
            Gate::Y { qubit } => (qubit, [[ZERO, -I], [I, ZERO]]),
            Gate::Z { qubit } => (qubit, [[ONE, ZERO], [ZERO, -ONE]]),
            _ => return None,
        };
        Some(m)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let out_of_range = |q: usize| Error::IndexOutOfRange {
            index: format!("qubit {q}"),
            limit: n.to_string(),
        };
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= n) {
            return Err(out_of_range(q));
        }
        match self {
            Gate::Cz { a, b } if a == b => Err(Error::InvalidArgument("CZ on a single qubit".into())),
            Gate::Cnot { control, target } if control == target => {
                Err(Error::InvalidArgument("CNOT control equals target".into()))
            }
            Gate::PauliExp { pauli, .. }
            | Gate::ControlledPauli { pauli, .. }
            | Gate::AntiControlledPauli { pauli, .. }
                if pauli.n_qubits > n =>
            {
                Err(Error::QubitMismatch(pauli.n_qubits, n))
            }
            Gate::ControlledPauli { control, pauli } | Gate::AntiControlledPauli { control, pauli }
                if pauli.support() >> control & 1 == 1 =>
            {
                Err(Error::InvalidArgument(format!(
                    "control qubit {control} overlaps the Pauli string {}",
                    pauli.label()
                )))
            }
            _ => Ok(()),
        }
    }
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|q| mask >> q & 1 == 1).collect()
}

pub fn rx(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

pub fn ry(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rz(theta: f64) -> Matrix2 {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, word: usize) -> Result<Self> {
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: MAX_SIM_QUBITS,
            });
        }
        let dim = 1usize << n_qubits;
        if word >= dim {
            return Err(Error::WordOutOfRange { word, n_qubits });
        }
        let mut amps = vec![ZERO; dim];
        amps[word] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("amplitude count {len} is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::DenseCapExceeded {
                n_qubits,
                cap: MAX_SIM_QUBITS,
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Appends `extra` qubits in `|0⟩` above the current register.
    pub fn extended(&self, extra: usize) -> Result<Self> {
        let mut out = Self::zero(self.n_qubits + extra)?;
        out.amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(out)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if let Some((q, m)) = gate.matrix_1q() {
            self.apply_1q(q, &m);
            return Ok(());
        }
        match gate {
            Gate::Cz { a, b } => {
                let mask = (1 << a) | (1 << b);
                for (w, amp) in self.amps.iter_mut().enumerate() {
                    if w & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (1usize << control, 1usize << target);
                for w in 0..self.amps.len() {
                    if w & c != 0 && w & t == 0 {
                        self.amps.swap(w, w | t);
                    }
                }
            }
            Gate::PauliExp { pauli, theta } => {
                let p = self.pauli_image(pauli, |_| true);
                let (s, c) = (theta / 2.0).sin_cos();
                let (c, s) = (Complex64::new(c, 0.0), Complex64::new(0.0, -s));
                for (a, pa) in self.amps.iter_mut().zip(p) {
                    *a = c * *a + s * pa;
                }
            }
            Gate::ControlledPauli { control, pauli } => {
                self.apply_pauli_where(pauli, 1 << control, true);
            }
            Gate::AntiControlledPauli { control, pauli } => {
                self.apply_pauli_where(pauli, 1 << control, false);
            }
            _ => unreachable!("single-qubit gates handled above"),
        }
        Ok(())
    }

    /// Applies a Pauli string (coefficient included) to the whole register.
    pub fn apply_pauli(&mut self, pauli: &PauliTerm) -> Result<()> {
        if pauli.n_qubits > self.n_qubits {
            return Err(Error::QubitMismatch(pauli.n_qubits, self.n_qubits));
        }
        self.amps = self.pauli_image(pauli, |_| true);
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: &Matrix2) {
        let bit = 1usize << q;
        for w in 0..self.amps.len() {
            if w & bit == 0 {
                let (a0, a1) = (self.amps[w], self.amps[w | bit]);
                self.amps[w] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[w | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `P|ψ⟩` restricted to source words accepted by `keep` (others map to 0).
    fn pauli_image(&self, pauli: &PauliTerm, keep: impl Fn(usize) -> bool) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.amps.len()];
        for (w, &a) in self.amps.iter().enumerate() {
            if keep(w) {
                let (row, v) = pauli.act_on_basis(w);
                out[row] = v * a;
            }
        }
        out
    }

    fn apply_pauli_where(&mut self, pauli: &PauliTerm, control: usize, set: bool) {
        let on = |w: usize| (w & control != 0) == set;
        let image = self.pauli_image(pauli, on);
        for (w, amp) in self.amps.iter_mut().enumerate() {
            if on(w) {
                *amp = image[w];
            }
        }
    }
}

/// Applies `circuit` left to right to a copy of `psi0`.
pub fn run(circuit: &[Gate], psi0: &Statevector) -> Result<Statevector> {
    let mut psi = psi0.clone();
    for g in circuit {
        psi.apply(g)?;
    }
    Ok(psi)
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(obs: &PauliSum, psi: &Statevector) -> Result<Complex64> {
    if obs.n_qubits() > psi.n_qubits() {
        return Err(Error::QubitMismatch(obs.n_qubits(), psi.n_qubits()));
    }
    let mut acc = ZERO;
    for term in obs.iter() {
        for (w, &a) in psi.amps.iter().enumerate() {
            let (row, v) = term.act_on_basis(w);
            acc += psi.amps[row].conj() * v * a;
        }
    }
    Ok(acc)
}

/// Dense unitary of a circuit on `n` qubits (column `j` is `U|j⟩`).
pub fn unitary(n_qubits: usize, circuit: &[Gate]) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << n_qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let col = run(circuit, &Statevector::basis(n_qubits, j)?)?;
        for (i, a) in col.amps.iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    Ok(u)
}

/// An ancilla-interference circuit whose ancilla statistics encode
/// `½ Re⟨A|B⟩ = p₀ − ½`, where `A` is the branch with the ancilla in `|0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardTest {
    /// System qubits; the ancilla is qubit `n_system`.
    pub n_system: usize,
    pub circuit: Vec<Gate>,
}

impl HadamardTest {
    pub fn ancilla(&self) -> usize {
        self.n_system
    }

    /// Exact probability of reading the ancilla as 0.
    pub fn p0(&self, psi0: &Statevector) -> Result<f64> {
        if psi0.n_qubits() != self.n_system {
            return Err(Error::QubitMismatch(psi0.n_qubits(), self.n_system));
        }
        let out = run(&self.circuit, &psi0.extended(1)?)?;
        let anc = 1usize << self.ancilla();
        Ok(out
            .amps
            .iter()
            .enumerate()
            .filter(|(w, _)| w & anc == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Readout rule `p₀ − ½`.
    pub fn value(&self, psi0: &Statevector) -> Result<f64> {
        Ok(readout(self.p0(psi0)?))
    }

    /// Shot estimate of the readout and its binomial standard deviation.
    pub fn sampled_value(&self, psi0: &Statevector, shots: u64, seed: u64) -> Result<(f64, f64)> {
        let p0 = self.p0(psi0)?.clamp(0.0, 1.0);
        let zeros = sample_bernoulli(p0, shots, seed)?;
        let est = zeros as f64 / shots as f64;
        let sigma = (p0 * (1.0 - p0) / shots as f64).sqrt();
        Ok((readout(est), sigma))
    }
}

pub fn readout(p0: f64) -> f64 {
    p0 - 0.5
}

fn slot_gates(slots: &[PauliTerm], theta: &[f64], range: std::ops::Range<usize>) -> Vec<Gate> {
    range
        .map(|j| Gate::PauliExp {
            pauli: slots[j],
            theta: theta[j],
        })
        .collect()
}

fn check_slots(slots: &[PauliTerm], theta: &[f64]) -> Result<usize> {
    if slots.len() != theta.len() {
        return Err(Error::DimensionMismatch(slots.len(), theta.len()));
    }
    let n = slots.first().map_or(0, |p| p.n_qubits);
    if let Some(p) = slots.iter().find(|p| p.n_qubits != n) {
        return Err(Error::QubitMismatch(p.n_qubits, n));
    }
    Ok(n)
}

/// Circuit for `M_kq` with slots `e^{−iP_jθ_j/2}` applied in order:
/// ancilla H, `Γ_0..Γ_{k−1}`, anti-controlled `P_k`, `Γ_k..Γ_{q−1}`,
/// controlled `P_q`, ancilla H.
pub fn hadamard_test_m(slots: &[PauliTerm], theta: &[f64], k: usize, q: usize) -> Result<HadamardTest> {
    let n = check_slots(slots, theta)?;
    if k > q || q >= slots.len() {
        return Err(Error::InvalidArgument(format!(
            "need k <= q < {}, got k = {k}, q = {q}",
            slots.len()
        )));
    }
    let anc = n;
    let mut circuit = vec![Gate::H { qubit: anc }];
    circuit.extend(slot_gates(slots, theta, 0..k));
    circuit.push(Gate::AntiControlledPauli {
        control: anc,
        pauli: unit(&slots[k]),
    });
    circuit.extend(slot_gates(slots, theta, k..q));
    circuit.push(Gate::ControlledPauli {
        control: anc,
        pauli: unit(&slots[q]),
    });
    circuit.push(Gate::H { qubit: anc });
    Ok(HadamardTest { n_system: n, circuit })
}

/// Circuit for `V_km`: ancilla H, `Γ_0..Γ_{k−1}`, anti-controlled `P_k`,
/// `Γ_k..Γ_{N−1}`, controlled `P_m`, ancilla H.
pub fn hadamard_test_v(slots: &[PauliTerm], theta: &[f64], k: usize, p_m: &PauliTerm) -> Result<HadamardTest> {
    let n = check_slots(slots, theta)?;
    if k >= slots.len() {
        return Err(Error::IndexOutOfRange {
            index: k.to_string(),
            limit: slots.len().to_string(),
        });
    }
    if p_m.n_qubits != n {
        return Err(Error::QubitMismatch(p_m.n_qubits, n));
    }
    let anc = n;
    let mut circuit = vec![Gate::H { qubit: anc }];
    circuit.extend(slot_gates(slots, theta, 0..k));
    circuit.push(Gate::AntiControlledPauli {
        control: anc,
        pauli: unit(&slots[k]),
    });
    circuit.extend(slot_gates(slots, theta, k..slots.len()));
    circuit.push(Gate::ControlledPauli {
        control: anc,
        pauli: unit(p_m),
    });
    circuit.push(Gate::H { qubit: anc });
    Ok(HadamardTest { n_system: n, circuit })
}

fn unit(p: &PauliTerm) -> PauliTerm {
    p.with_coeff(ONE)
}

/// Number of zeros in `shots` Bernoulli(`p0`) draws from a seeded stream.
pub fn sample_bernoulli(p0: f64, shots: u64, seed: u64) -> Result<u64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).filter(|_| rng.random::<f64>() < p0).count() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    /// One of `I/X/Y/Z` per qubit, leftmost = highest qubit.
    pub basis: String,
    /// Bitstrings (leftmost = highest qubit) to counts.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotResult {
    /// Empirical `⟨∏_{q ∈ mask} Z_q⟩` in the rotated frame.
    pub fn parity_expectation(&self, mask: u64) -> f64 {
        let n = self.basis.len();
        let mut acc = 0i64;
        for (bits, &count) in &self.counts {
            let word = usize::from_str_radix(bits, 2).unwrap_or(0);
            let parity = (word as u64 & mask & ((1u64 << n) - 1)).count_ones() % 2;
            acc += if parity == 0 { count as i64 } else { -(count as i64) };
        }
        acc as f64 / self.shots as f64
    }
}

/// Options for [`sample_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SampleOptions {
    /// Probability of replacing each sampled bitstring by a uniform one.
    pub depolarizing: f64,
}

/// Measures every qubit in the basis given by `basis` (one of `I/X/Y/Z`
/// per qubit, leftmost = highest qubit).
pub fn sample(psi: &Statevector, basis: &str, shots: u64, seed: u64) -> Result<ShotResult> {
    sample_with(psi, basis, shots, seed, SampleOptions::default())
}

pub fn sample_with(
    psi: &Statevector,
    basis: &str,
    shots: u64,
    seed: u64,
    options: SampleOptions,
) -> Result<ShotResult> {
    let n = psi.n_qubits();
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    if basis.chars().count() != n {
        return Err(Error::QubitMismatch(basis.chars().count(), n));
    }
    if !(0.0..=1.0).contains(&options.depolarizing) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing probability {} outside [0, 1]",
            options.depolarizing
        )));
    }
    let mut rotated = psi.clone();
    for (pos, ch) in basis.chars().enumerate() {
        let qubit = n - 1 - pos;
        let g = match ch {
            'I' | 'Z' => continue,
            'X' => Gate::Ry {
                qubit,
                theta: -std::f64::consts::FRAC_PI_2,
            },
            'Y' => Gate::Rx {
                qubit,
                theta: std::f64::consts::FRAC_PI_2,
            },
            other => return Err(Error::InvalidArgument(format!("unknown basis symbol '{other}'"))),
        };
        rotated.apply(&g)?;
    }
    let mut cdf = Vec::with_capacity(rotated.amps.len());
    let mut acc = 0.0;
    for p in rotated.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let dim = cdf.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![0u64; dim];
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let mut word = cdf.partition_point(|&c| c <= u).min(dim - 1);
        if options.depolarizing > 0.0 && rng.random::<f64>() < options.depolarizing {
            word = rng.random_range(0..dim);
        }
        hits[word] += 1;
    }
    let counts = hits
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(w, c)| (format!("{w:0n$b}"), c))
        .collect();
    Ok(ShotResult {
        basis: basis.to_string(),
        counts,
        shots,
        seed,
    })
}
