//! Rewriting circuits into the native gate set
//! `{X2P, X2M, Y2P, Y2M, Rz, CZ}` and checking equivalence up to a global
//! phase.
//!
//! Phase bookkeeping: for a [`NativeCircuit`] with `global_phase = φ`, the
//! source circuit's unitary is `e^{iφ} U_native`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pauli::PauliTerm;
use crate::sim::{self, Gate, Matrix2};
use crate::{Error, Result, SCHEMA_VERSION};

/// Largest register for dense equivalence checks.
pub const MAX_VERIFY_QUBITS: usize = 10;

/// Angles below this magnitude are treated as zero.
const ANGLE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NativeGate {
    /// `Rx(π/2)`.
    X2P(usize),
    /// `Rx(−π/2)`.
    X2M(usize),
    /// `Ry(π/2)`.
    Y2P(usize),
    /// `Ry(−π/2)`.
    Y2M(usize),
    Rz(usize, f64),
    Cz(usize, usize),
}

impl NativeGate {
    pub fn kind(&self) -> &'static str {
        match self {
            NativeGate::X2P(_) => "X2P",
            NativeGate::X2M(_) => "X2M",
            NativeGate::Y2P(_) => "Y2P",
            NativeGate::Y2M(_) => "Y2M",
            NativeGate::Rz(..) => "RZ",
            NativeGate::Cz(..) => "CZ",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            NativeGate::X2P(q)
            | NativeGate::X2M(q)
            | NativeGate::Y2P(q)
            | NativeGate::Y2M(q)
            | NativeGate::Rz(q, _) => vec![q],
            NativeGate::Cz(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            NativeGate::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    /// The same operation as a simulator gate.
    pub fn to_gate(&self) -> Gate {
        match *self {
            NativeGate::X2P(qubit) => Gate::Rx { qubit, theta: FRAC_PI_2 },
            NativeGate::X2M(qubit) => Gate::Rx { qubit, theta: -FRAC_PI_2 },
            NativeGate::Y2P(qubit) => Gate::Ry { qubit, theta: FRAC_PI_2 },
            NativeGate::Y2M(qubit) => Gate::Ry { qubit, theta: -FRAC_PI_2 },
            NativeGate::Rz(qubit, theta) => Gate::Rz { qubit, theta },
            NativeGate::Cz(a, b) => Gate::Cz { a, b },
        }
    }

    pub fn to_record(&self) -> NativeRecord {
        NativeRecord {
            kind: self.kind().to_string(),
            qubits: self.qubits(),
            angle: self.angle(),
        }
    }

    pub fn from_record(r: &NativeRecord) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed native gate record {r:?}"));
        let one = || match r.qubits.as_slice() {
            [q] => Ok(*q),
            _ => Err(bad()),
        };
        Ok(match r.kind.as_str() {
            "X2P" => NativeGate::X2P(one()?),
            "X2M" => NativeGate::X2M(one()?),
            "Y2P" => NativeGate::Y2P(one()?),
            "Y2M" => NativeGate::Y2M(one()?),
            "RZ" => NativeGate::Rz(one()?, r.angle.ok_or_else(bad)?),
            "CZ" => match r.qubits.as_slice() {
                [a, b] if a != b => NativeGate::Cz(*a, *b),
                _ => return Err(bad()),
            },
            other => return Err(Error::UnsupportedGate(other.to_string())),
        })
    }
}

/// One line of the native JSON-lines format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NativeRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

/// First line of the native JSON-lines format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NativeHeader {
    pub schema_version: u32,
    pub n_qubits: usize,
    pub global_phase: f64,
    pub n_gates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NativeCircuit {
    pub n_qubits: usize,
    pub gates: Vec<NativeGate>,
    pub global_phase: f64,
}

impl NativeCircuit {
    pub fn to_gates(&self) -> Vec<Gate> {
        self.gates.iter().map(NativeGate::to_gate).collect()
    }

    pub fn unitary(&self) -> Result<DMatrix<Complex64>> {
        sim::unitary(self.n_qubits, &self.to_gates())
    }

    pub fn count(&self, kind: &str) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    /// Header line followed by one record per gate.
    pub fn to_jsonl(&self) -> String {
        let header = NativeHeader {
            schema_version: SCHEMA_VERSION,
            n_qubits: self.n_qubits,
            global_phase: self.global_phase,
            n_gates: self.gates.len(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for g in &self.gates {
            out.push_str(&serde_json::to_string(&g.to_record()).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: NativeHeader = serde_json::from_str(
            lines.next().ok_or_else(|| Error::InvalidArgument("empty native circuit file".into()))?,
        )?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema_version {}",
                header.schema_version
            )));
        }
        let gates = lines
            .map(|l| NativeGate::from_record(&serde_json::from_str(l)?))
            .collect::<Result<Vec<_>>>()?;
        if gates.len() != header.n_gates {
            return Err(Error::InvalidArgument(format!(
                "header announces {} gates, found {}",
                header.n_gates,
                gates.len()
            )));
        }
        Ok(Self {
            n_qubits: header.n_qubits,
            gates,
            global_phase: header.global_phase,
        })
    }

    /// One gate per line, e.g. `RZ q1 -0.31277`.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let qs: Vec<String> = g.qubits().iter().map(|q| format!("q{q}")).collect();
            write!(out, "{} {}", g.kind(), qs.join(" ")).unwrap();
            if let Some(a) = g.angle() {
                write!(out, " {a}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Circuit input file: `{schema_version, n_qubits, gates}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub schema_version: u32,
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl CircuitFile {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n_qubits,
            gates,
        }
    }
}

fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn product_1q(seq: &[NativeGate]) -> Matrix2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    seq.iter().fold([[one, zero], [zero, one]], |acc, g| {
        let (_, m) = g.to_gate().matrix_1q().expect("single-qubit native gate");
        mat_mul(&m, &acc)
    })
}

/// `arg(a/b)` at the entry where `|a|` is largest.
fn relative_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    let k = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if b[k].norm() == 0.0 {
        0.0
    } else {
        (a[k] / b[k]).arg()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < ANGLE_EPS
}

/// Native sequence (time order) and global phase `φ` with
/// `g = e^{iφ} · product`. Quarter rotations and `Rz` map to themselves and
/// other axis rotations to the conjugated form `Y2M·Rz(θ)·Y2P` (resp.
/// `X2P·Rz(θ)·X2M`); see [`decompose_unitary_1q`] for arbitrary matrices.
pub fn decompose_1q(g: &Gate) -> Result<(Vec<NativeGate>, f64)> {
    use NativeGate::*;
    let (q, target) = g
        .matrix_1q()
        .ok_or_else(|| Error::UnsupportedGate(format!("{g:?} is not a single-qubit gate")))?;
    let seq = match *g {
        Gate::Rz { theta, .. } => vec![Rz(q, theta)],
        Gate::Rx { theta, .. } if close(theta, FRAC_PI_2) => vec![X2P(q)],
        Gate::Rx { theta, .. } if close(theta, -FRAC_PI_2) => vec![X2M(q)],
        Gate::Ry { theta, .. } if close(theta, FRAC_PI_2) => vec![Y2P(q)],
        Gate::Ry { theta, .. } if close(theta, -FRAC_PI_2) => vec![Y2M(q)],
        Gate::Rx { theta, .. } if close(theta, PI) => vec![X2P(q), X2P(q)],
        Gate::Ry { theta, .. } if close(theta, PI) => vec![Y2P(q), Y2P(q)],
        Gate::X { .. } => vec![X2P(q), X2P(q)],
        Gate::Y { .. } => vec![Y2P(q), Y2P(q)],
        Gate::Z { .. } => vec![Rz(q, PI)],
        Gate::H { .. } => vec![Y2M(q), Rz(q, PI)],
        Gate::Rx { theta, .. } => vec![Y2M(q), Rz(q, theta), Y2P(q)],
        Gate::Ry { theta, .. } => vec![X2P(q), Rz(q, theta), X2M(q)],
        _ => return Ok(decompose_unitary_1q(q, &target)),
    };
    let prod = product_1q(&seq);
    let phase = relative_phase(&target.concat(), &prod.concat());
    Ok((seq, phase))
}

/// ZXZ form `Rz(λ−π)·X2P·Rz(π−θ)·X2P·Rz(φ)` (time order) of any 2×2
/// unitary, from its ZYZ angles `U ∝ Rz(φ)Ry(θ)Rz(λ)`, plus the global phase.
pub fn decompose_unitary_1q(q: usize, u: &Matrix2) -> (Vec<NativeGate>, f64) {
    use NativeGate::*;
    let (phi, theta, lambda) = zyz_angles(u);
    let seq = vec![Rz(q, lambda - PI), X2P(q), Rz(q, PI - theta), X2P(q), Rz(q, phi)];
    let prod = product_1q(&seq);
    let phase = relative_phase(&u.concat(), &prod.concat());
    (seq, phase)
}

/// `U ∝ Rz(φ) Ry(θ) Rz(λ)`.
fn zyz_angles(u: &Matrix2) -> (f64, f64, f64) {
    let theta = 2.0 * u[1][0].norm().atan2(u[0][0].norm());
    // Strip the determinant phase so the entries follow the SU(2) pattern.
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let s = Complex64::from_polar(1.0, -det.arg() / 2.0);
    let (v00, v10) = (u[0][0] * s, u[1][0] * s);
    let sum = if v00.norm() > 1e-9 { -2.0 * v00.arg() } else { 0.0 };
    let diff = if v10.norm() > 1e-9 { 2.0 * v10.arg() } else { 0.0 };
    ((sum + diff) / 2.0, theta, (sum - diff) / 2.0)
}

/// `θ` wrapped into `(−π, π]` and the phase `kπ` with `Rz(θ₀) = e^{ikπ}Rz(θ)`.
fn wrap_rz(theta: f64) -> (f64, f64) {
    let k = (theta / (2.0 * PI)).round();
    let mut wrapped = theta - 2.0 * PI * k;
    let mut k = k;
    if wrapped <= -PI {
        wrapped += 2.0 * PI;
        k -= 1.0;
    }
    (wrapped, k * PI)
}

/// Rewrites `circuit` into native gates. CNOT becomes `Y2M_t · CZ · Y2P_t`;
/// adjacent `Rz` on a qubit are merged, wrapped into `(−π, π]` and dropped
/// when zero. Pauli exponentials and controlled Paulis must go through
/// [`lower`] first.
pub fn transpile(n_qubits: usize, circuit: &[Gate]) -> Result<NativeCircuit> {
    let mut raw = Vec::new();
    let mut phase = 0.0;
    for g in circuit {
        g.qubits()
            .iter()
            .find(|&&q| q >= n_qubits)
            .map_or(Ok(()), |q| {
                Err(Error::IndexOutOfRange {
                    index: format!("qubit {q}"),
                    limit: n_qubits.to_string(),
                })
            })?;
        match *g {
            Gate::Cz { a, b } => raw.push(NativeGate::Cz(a, b)),
            Gate::Cnot { control, target } => raw.extend([
                NativeGate::Y2M(target),
                NativeGate::Cz(control, target),
                NativeGate::Y2P(target),
            ]),
            Gate::PauliExp { .. } | Gate::ControlledPauli { .. } | Gate::AntiControlledPauli { .. } => {
                return Err(Error::UnsupportedGate(format!(
                    "{g:?}: lower Pauli gates before transpiling"
                )));
            }
            _ => {
                let (seq, p) = decompose_1q(g)?;
                raw.extend(seq);
                phase += p;
            }
        }
    }
    let (gates, p) = merge_rz(n_qubits, raw);
    phase += p;
    Ok(NativeCircuit {
        n_qubits,
        gates,
        global_phase: wrap_phase(phase),
    })
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    // `+ 0.0` turns a negative zero into zero for stable output.
    if w > PI {
        w - 2.0 * PI
    } else {
        w + 0.0
    }
}

fn merge_rz(n_qubits: usize, raw: Vec<NativeGate>) -> (Vec<NativeGate>, f64) {
    let mut out: Vec<NativeGate> = Vec::with_capacity(raw.len());
    let mut last: Vec<Option<usize>> = vec![None; n_qubits];
    for g in raw {
        if let NativeGate::Rz(q, a) = g {
            if let Some(i) = last[q] {
                if let NativeGate::Rz(_, b) = out[i] {
                    out[i] = NativeGate::Rz(q, a + b);
                    continue;
                }
            }
        }
        for q in g.qubits() {
            last[q] = Some(out.len());
        }
        out.push(g);
    }
    let mut phase = 0.0;
    let gates = out
        .into_iter()
        .filter_map(|g| match g {
            NativeGate::Rz(q, a) => {
                let (w, p) = wrap_rz(a);
                phase += p;
                (w.abs() >= ANGLE_EPS).then_some(NativeGate::Rz(q, w))
            }
            other => Some(other),
        })
        .collect();
    (gates, phase)
}

/// Rewrites Pauli exponentials and (anti-)controlled Pauli strings into
/// single-qubit gates, CNOT and CZ. Returns the gates and the global phase
/// `φ` with `U_in = e^{iφ} U_out`. Pauli coefficients must have unit modulus
/// (and be `±1` for exponentials).
pub fn lower(circuit: &[Gate]) -> Result<(Vec<Gate>, f64)> {
    let mut out = Vec::new();
    let mut phase = 0.0;
    for g in circuit {
        match g {
            Gate::PauliExp { pauli, theta } => {
                let c = pauli.coeff;
                if c.im.abs() > 1e-12 || (c.re.abs() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "exponential needs a ±1 coefficient, got {c}"
                    )));
                }
                let theta = theta * c.re.signum();
                if pauli.is_identity() {
                    phase -= theta / 2.0;
                    continue;
                }
                lower_pauli_exp(pauli, theta, &mut out);
            }
            Gate::ControlledPauli { control, pauli } => {
                phase += lower_controlled(*control, pauli, true, &mut out)?;
            }
            Gate::AntiControlledPauli { control, pauli } => {
                phase += lower_controlled(*control, pauli, false, &mut out)?;
            }
            other => out.push(other.clone()),
        }
    }
    Ok((out, phase))
}

fn support(p: &PauliTerm) -> Vec<usize> {
    (0..p.n_qubits).filter(|&q| p.symbol(q) != 'I').collect()
}

fn lower_pauli_exp(p: &PauliTerm, theta: f64, out: &mut Vec<Gate>) {
    let qs = support(p);
    let into_z = |q: usize, forward: bool| match p.symbol(q) {
        'X' => Some(Gate::H { qubit: q }),
        'Y' => Some(Gate::Rx {
            qubit: q,
            theta: if forward { FRAC_PI_2 } else { -FRAC_PI_2 },
        }),
        _ => None,
    };
    out.extend(qs.iter().filter_map(|&q| into_z(q, true)));
    let ladder: Vec<Gate> = qs
        .windows(2)
        .map(|w| Gate::Cnot { control: w[0], target: w[1] })
        .collect();
    out.extend(ladder.iter().cloned());
    out.push(Gate::Rz {
        qubit: *qs.last().expect("non-identity string"),
        theta,
    });
    out.extend(ladder.into_iter().rev());
    out.extend(qs.iter().filter_map(|&q| into_z(q, false)));
}

fn lower_controlled(control: usize, p: &PauliTerm, on_one: bool, out: &mut Vec<Gate>) -> Result<f64> {
    let c = p.coeff;
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "controlled Pauli needs a unit-modulus coefficient, got {c}"
        )));
    }
    if p.support() >> control & 1 == 1 {
        return Err(Error::InvalidArgument(format!(
            "control qubit {control} overlaps the Pauli string {}",
            p.label()
        )));
    }
    if !on_one {
        out.push(Gate::X { qubit: control });
    }
    // The coefficient is a phase on the active branch: diag(1, c) = e^{ia/2} Rz(a).
    let a = c.arg();
    let mut phase = 0.0;
    if a.abs() > ANGLE_EPS {
        out.push(Gate::Rz { qubit: control, theta: a });
        phase += a / 2.0;
    }
    for q in support(p) {
        match p.symbol(q) {
            'X' => out.push(Gate::Cnot { control, target: q }),
            'Z' => out.push(Gate::Cz { a: control, b: q }),
            _ => out.extend([
                Gate::Rz { qubit: q, theta: -FRAC_PI_2 },
                Gate::Cnot { control, target: q },
                Gate::Rz { qubit: q, theta: FRAC_PI_2 },
            ]),
        }
    }
    if !on_one {
        out.push(Gate::X { qubit: control });
    }
    Ok(phase)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    /// `max |U_a − e^{iφ} U_b|`.
    pub deviation: f64,
    /// Optimal `φ`, from the largest-magnitude entry ratio.
    pub phase: f64,
}

fn check_verify_size(n: usize) -> Result<()> {
    if n > MAX_VERIFY_QUBITS {
        return Err(Error::DenseCapExceeded {
            n_qubits: n,
            cap: MAX_VERIFY_QUBITS,
        });
    }
    Ok(())
}

/// Compares two unitaries up to a global phase.
pub fn compare_unitaries(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> Result<Equivalence> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let phase = relative_phase(a.as_slice(), b.as_slice());
    let rot = Complex64::from_polar(1.0, phase);
    let deviation = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - rot * y).norm())
        .fold(0.0, f64::max);
    Ok(Equivalence {
        equivalent: deviation <= tol,
        deviation,
        phase,
    })
}

pub fn verify_equivalence(n_qubits: usize, a: &[Gate], b: &[Gate], tol: f64) -> Result<Equivalence> {
    check_verify_size(n_qubits)?;
    compare_unitaries(&sim::unitary(n_qubits, a)?, &sim::unitary(n_qubits, b)?, tol)
}

/// Checks `U_source = e^{iφ} U_native` with the recorded `φ` itself, so a
/// wrong phase record fails too.
pub fn verify_native(source: &[Gate], native: &NativeCircuit, tol: f64) -> Result<Equivalence> {
    check_verify_size(native.n_qubits)?;
    let a = sim::unitary(native.n_qubits, source)?;
    let b = native.unitary()?;
    let mut eq = compare_unitaries(&a, &b, tol)?;
    let rot = Complex64::from_polar(1.0, native.global_phase);
    let recorded = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - rot * y).norm())
        .fold(0.0, f64::max);
    eq.deviation = eq.deviation.max(recorded);
    eq.equivalent = eq.deviation <= tol;
    Ok(eq)
}

/// A seeded random circuit over rotations, fixed single-qubit gates, CZ and
/// CNOT.
pub fn random_circuit(n_qubits: usize, n_gates: usize, seed: u64) -> Vec<Gate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_gates)
        .map(|_| {
            let qubit = rng.random_range(0..n_qubits);
            let theta = rng.random_range(-2.0 * PI..2.0 * PI);
            let other = if n_qubits > 1 {
                (qubit + rng.random_range(1..n_qubits)) % n_qubits
            } else {
                qubit
            };
            match rng.random_range(0..if n_qubits > 1 { 9 } else { 7 }) {
                0 => Gate::Rx { qubit, theta },
                1 => Gate::Ry { qubit, theta },
                2 => Gate::Rz { qubit, theta },
                3 => Gate::H { qubit },
                4 => Gate::X { qubit },
                5 => Gate::Y { qubit },
                6 => Gate::Z { qubit },
                7 => Gate::Cz { a: qubit, b: other },
                _ => Gate::Cnot { control: qubit, target: other },
            }
        })
        .collect()
}
