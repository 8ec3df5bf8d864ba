//! McLachlan variational quantum simulation with a Hamiltonian variational
//! ansatz.
//!
//! Every parameter slot applies `e^{−iP_jθ_j/2}`. With
//! `φ_k = Γ_{N−1}⋯Γ_k P_k Γ_{k−1}⋯Γ_0 |ψ₀⟩` the linear system `M θ̇ = V` uses
//!
//! * `M_kq = ½ Re⟨φ_k|φ_q⟩`
//! * `V_k  = Re⟨φ_k|H|ψ⟩ = 2 Σ_m ξ_m V_km` with `V_km = ½ Re⟨φ_k|P_m|ψ⟩`,
//!
//! which is McLachlan's `Σ_q Re⟨∂_kψ|∂_qψ⟩ θ̇_q = Im⟨∂_kψ|H|ψ⟩` scaled by 2.
//! Identity terms of `H` only rotate the global phase and are left out of `V`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pauli::{PauliSum, PauliTerm};
use crate::sim::{self, Gate, Statevector};
use crate::{Error, Result};

/// Relative singular-value cutoff of the unregularized pseudo-inverse.
pub const PINV_RCOND: f64 = 1e-12;

pub const DEFAULT_DT: f64 = 0.01;

/// Default Tikhonov weight for shot-based runs.
pub const DEFAULT_SAMPLED_LAMBDA: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// One layer of unit-coefficient generators, applied first to last.
    pub generators: Vec<PauliTerm>,
}

impl Ansatz {
    pub fn n_params(&self) -> usize {
        self.n_layers * self.generators.len()
    }

    /// Generator of every parameter slot, layer by layer.
    pub fn slots(&self) -> Vec<PauliTerm> {
        (0..self.n_layers).flat_map(|_| self.generators.iter().copied()).collect()
    }

    pub fn circuit(&self, theta: &[f64]) -> Result<Vec<Gate>> {
        self.check_theta(theta)?;
        Ok(self
            .slots()
            .into_iter()
            .zip(theta)
            .map(|(pauli, &theta)| Gate::PauliExp { pauli, theta })
            .collect())
    }

    /// `Γ(θ)|ψ₀⟩`.
    pub fn state(&self, theta: &[f64], psi0: &Statevector) -> Result<Statevector> {
        sim::run(&self.circuit(theta)?, psi0)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch(theta.len(), self.n_params()));
        }
        Ok(())
    }
}

/// Ansatz whose generators are the non-identity Pauli strings of `h` in
/// canonical mask order, repeated `n_layers` times.
pub fn build_vha(h: &PauliSum, n_layers: usize) -> Result<Ansatz> {
    if n_layers == 0 {
        return Err(Error::InvalidArgument("the ansatz needs at least one layer".into()));
    }
    let generators: Vec<PauliTerm> = h
        .simplified()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| t.with_coeff(Complex64::new(1.0, 0.0)))
        .collect();
    if generators.is_empty() {
        return Err(Error::InvalidArgument("Hamiltonian has no non-identity terms".into()));
    }
    Ok(Ansatz {
        n_qubits: h.n_qubits(),
        n_layers,
        generators,
    })
}

/// How `M` and `V` are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MvMode {
    /// Statevector insertion of `P_k` at the slot positions.
    Analytic,
    /// Hadamard-test circuits with exact ancilla probabilities.
    CircuitExact,
    /// Hadamard-test circuits with sampled ancilla readout.
    CircuitSampled { shots: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MvSystem {
    pub m: DMatrix<f64>,
    pub v: DVector<f64>,
    /// Binomial standard deviations in sampled mode.
    pub m_sigma: Option<DMatrix<f64>>,
    pub v_sigma: Option<DVector<f64>>,
}

/// Non-identity terms of `h` as `(ξ_m, P_m)`; `ξ_m` must be real.
fn hamiltonian_terms(h: &PauliSum) -> Result<Vec<(f64, PauliTerm)>> {
    h.simplified()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| {
            if t.coeff.im.abs() > 1e-12 {
                return Err(Error::NotHermitian(t.coeff.im.abs()));
            }
            Ok((t.coeff.re, t.with_coeff(Complex64::new(1.0, 0.0))))
        })
        .collect()
}

fn check_register(h: &PauliSum, ansatz: &Ansatz, psi0: &Statevector) -> Result<()> {
    if h.n_qubits() != ansatz.n_qubits {
        return Err(Error::QubitMismatch(h.n_qubits(), ansatz.n_qubits));
    }
    if psi0.n_qubits() != ansatz.n_qubits {
        return Err(Error::QubitMismatch(psi0.n_qubits(), ansatz.n_qubits));
    }
    Ok(())
}

/// `M`, `V` by inserting `P_k` into the statevector at each slot.
pub fn compute_mv_analytic(
    h: &PauliSum,
    ansatz: &Ansatz,
    theta: &[f64],
    psi0: &Statevector,
) -> Result<MvSystem> {
    check_register(h, ansatz, psi0)?;
    let gates = ansatz.circuit(theta)?;
    let terms = hamiltonian_terms(h)?;
    let n = gates.len();

    let mut prefix = psi0.clone();
    let mut phis = Vec::with_capacity(n);
    for k in 0..n {
        let mut phi = prefix.clone();
        phi.apply_pauli(&ansatz.slots()[k])?;
        for g in &gates[k..] {
            phi.apply(g)?;
        }
        phis.push(phi);
        prefix.apply(&gates[k])?;
    }
    let psi = prefix;
    let mut acc = vec![Complex64::new(0.0, 0.0); 1 << psi.n_qubits()];
    for (xi, p) in &terms {
        let mut t = psi.clone();
        t.apply_pauli(p)?;
        for (a, b) in acc.iter_mut().zip(t.amps()) {
            *a += *b * xi;
        }
    }
    let h_psi = Statevector::from_amps(acc)?;

    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for q in k..n {
            let val = 0.5 * phis[k].inner(&phis[q])?.re;
            m[(k, q)] = val;
            m[(q, k)] = val;
        }
    }
    let mut v = DVector::zeros(n);
    for k in 0..n {
        v[k] = phis[k].inner(&h_psi)?.re;
    }
    Ok(MvSystem {
        m,
        v,
        m_sigma: None,
        v_sigma: None,
    })
}

enum Task {
    M(usize, usize),
    V(usize, usize),
}

/// `M`, `V` through Hadamard-test circuits. In sampled mode each circuit
/// gets the seed `seed ⊕ task_id`, so results do not depend on scheduling.
pub fn compute_mv_circuit(
    h: &PauliSum,
    ansatz: &Ansatz,
    theta: &[f64],
    psi0: &Statevector,
    mode: MvMode,
) -> Result<MvSystem> {
    check_register(h, ansatz, psi0)?;
    ansatz.check_theta(theta)?;
    let slots = ansatz.slots();
    let terms = hamiltonian_terms(h)?;
    let n = slots.len();
    let n_terms = terms.len();

    let mut tasks = Vec::new();
    for k in 0..n {
        for q in k..n {
            tasks.push(Task::M(k, q));
        }
        for m in 0..n_terms {
            tasks.push(Task::V(k, m));
        }
    }
    let results: Vec<(f64, f64)> = tasks
        .par_iter()
        .map(|task| {
            let (test, id) = match *task {
                Task::M(k, q) => (sim::hadamard_test_m(&slots, theta, k, q)?, (k * n + q) as u64),
                Task::V(k, m) => (
                    sim::hadamard_test_v(&slots, theta, k, &terms[m].1)?,
                    (n * n + k * n_terms + m) as u64,
                ),
            };
            match mode {
                MvMode::CircuitSampled { shots, seed } => test.sampled_value(psi0, shots, seed ^ id),
                _ => Ok((test.value(psi0)?, 0.0)),
            }
        })
        .collect::<Result<_>>()?;

    let mut m = DMatrix::zeros(n, n);
    let mut m_sigma = DMatrix::zeros(n, n);
    let mut v = DVector::zeros(n);
    let mut v_var = DVector::zeros(n);
    for (task, (val, sigma)) in tasks.iter().zip(results) {
        match *task {
            Task::M(k, q) => {
                m[(k, q)] = val;
                m[(q, k)] = val;
                m_sigma[(k, q)] = sigma;
                m_sigma[(q, k)] = sigma;
            }
            Task::V(k, idx) => {
                let xi = terms[idx].0;
                v[k] += 2.0 * xi * val;
                v_var[k] += (2.0 * xi * sigma).powi(2);
            }
        }
    }
    let sampled = matches!(mode, MvMode::CircuitSampled { .. });
    Ok(MvSystem {
        m,
        v,
        m_sigma: sampled.then_some(m_sigma),
        v_sigma: sampled.then(|| v_var.map(f64::sqrt)),
    })
}

pub fn compute_mv(
    h: &PauliSum,
    ansatz: &Ansatz,
    theta: &[f64],
    psi0: &Statevector,
    mode: MvMode,
) -> Result<MvSystem> {
    match mode {
        MvMode::Analytic => compute_mv_analytic(h, ansatz, theta, psi0),
        _ => compute_mv_circuit(h, ansatz, theta, psi0, mode),
    }
}

/// `θ̇ = argmin ‖Mθ̇ − V‖² + λ‖θ̇‖²`. With `λ = 0` this is the minimum-norm
/// pseudo-inverse solution (modes below `PINV_RCOND · σ_max` discarded).
///
/// Symmetric `M` (always the case here) is diagonalized with the symmetric
/// eigensolver: the VHA metric has exact null directions (e.g. `Z₁X₀` and
/// `X₀` act alike on `|00⟩`), and the general SVD was observed to return
/// wrong singular values for such rank-deficient inputs.
pub fn solve_step(m: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    if m.nrows() != v.len() {
        return Err(Error::DimensionMismatch(m.nrows(), v.len()));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("regularization {lambda} must be >= 0")));
    }
    let scale = m.amax();
    let symmetric = (m - m.transpose()).amax() <= 1e-12 * scale.max(1.0);
    // M = L diag(s) R^T with s >= 0.
    let (left, s, right) = if symmetric {
        let eig = m.clone().symmetric_eigen();
        let signs = eig.eigenvalues.map(|e| if e < 0.0 { -1.0 } else { 1.0 });
        let mut left = eig.eigenvectors.clone();
        for (j, sign) in signs.iter().enumerate() {
            left.column_mut(j).scale_mut(*sign);
        }
        (left, eig.eigenvalues.abs(), eig.eigenvectors)
    } else {
        let svd = m.clone().svd(true, true);
        let right = svd.v_t.expect("requested").transpose();
        (svd.u.expect("requested"), svd.singular_values, right)
    };
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let proj = left.transpose() * v;
    let mut scaled = DVector::zeros(v.len());
    for (i, &sv) in s.iter().enumerate() {
        let f = if lambda > 0.0 {
            sv / (sv * sv + lambda)
        } else if sv > PINV_RCOND * s_max && sv > 0.0 {
            1.0 / sv
        } else {
            0.0
        };
        scaled[i] = f * proj[i];
    }
    Ok(right * scaled)
}

/// Fidelity target of an evolution at time `t`.
pub trait FidelityReference: Sync {
    fn fidelity(&self, t: f64, psi: &Statevector) -> Result<f64>;
}

/// `e^{−iHt}|ψ₀⟩` on the qubit register, from one eigendecomposition.
pub struct ExactEvolution {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
    coords: DVector<Complex64>,
}

impl ExactEvolution {
    pub fn new(h: &PauliSum, psi0: &Statevector) -> Result<Self> {
        if h.n_qubits() != psi0.n_qubits() {
            return Err(Error::QubitMismatch(h.n_qubits(), psi0.n_qubits()));
        }
        let mat = h.to_matrix()?;
        let defect = (&mat - mat.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        let eig = mat.symmetric_eigen();
        let coords = eig.eigenvectors.adjoint() * DVector::from_column_slice(psi0.amps());
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            coords,
        })
    }

    pub fn state(&self, t: f64) -> Statevector {
        let evolved = DVector::from_iterator(
            self.coords.len(),
            self.coords
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        let amps = &self.eigenvectors * evolved;
        Statevector::from_amps(amps.iter().copied().collect()).expect("power-of-two length")
    }
}

impl FidelityReference for ExactEvolution {
    fn fidelity(&self, t: f64, psi: &Statevector) -> Result<f64> {
        Ok(self.state(t).inner(psi)?.norm_sqr())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqsConfig {
    pub n_layers: usize,
    pub dt: f64,
    pub t_final: f64,
    pub mode: MvMode,
    pub lambda: f64,
}

impl VqsConfig {
    /// Analytic mode, `Δt = 0.01`, no regularization.
    pub fn analytic(n_layers: usize, t_final: f64) -> Self {
        Self {
            n_layers,
            dt: DEFAULT_DT,
            t_final,
            mode: MvMode::Analytic,
            lambda: 0.0,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().max(0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub theta: Vec<f64>,
    pub fidelity: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqsRun {
    pub hamiltonian: PauliSum,
    pub ansatz: Ansatz,
    pub config: VqsConfig,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl VqsRun {
    pub fn final_theta(&self) -> &[f64] {
        &self.trajectory.last().expect("trajectory is never empty").theta
    }

    /// `t, theta_0..theta_{K−1}, fidelity, energy`.
    pub fn trajectory_csv(&self) -> String {
        let k = self.ansatz.n_params();
        let mut out = String::from("t");
        for j in 0..k {
            write!(out, ",theta_{j}").unwrap();
        }
        out.push_str(",fidelity,energy\n");
        for p in &self.trajectory {
            write!(out, "{}", p.t).unwrap();
            for th in &p.theta {
                write!(out, ",{th}").unwrap();
            }
            writeln!(out, ",{},{}", p.fidelity, p.energy).unwrap();
        }
        out
    }
}

/// Forward-Euler McLachlan evolution from `θ = 0`.
pub fn run_evolution(
    h: &PauliSum,
    psi0: &Statevector,
    config: &VqsConfig,
    reference: &dyn FidelityReference,
) -> Result<VqsRun> {
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {}", config.dt)));
    }
    if config.t_final < 0.0 || !config.t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("t_final must be >= 0, got {}", config.t_final)));
    }
    let ansatz = build_vha(h, config.n_layers)?;
    check_register(h, &ansatz, psi0)?;
    let mut theta = vec![0.0; ansatz.n_params()];
    let record = |t: f64, theta: &[f64]| -> Result<TrajectoryPoint> {
        let psi = ansatz.state(theta, psi0)?;
        Ok(TrajectoryPoint {
            t,
            theta: theta.to_vec(),
            fidelity: reference.fidelity(t, &psi)?,
            energy: sim::expectation(h, &psi)?.re,
        })
    };
    let mut trajectory = vec![record(0.0, &theta)?];
    for step in 0..config.n_steps() {
        let mode = match config.mode {
            MvMode::CircuitSampled { shots, seed } => MvMode::CircuitSampled {
                shots,
                seed: seed ^ (step as u64).rotate_left(32),
            },
            other => other,
        };
        let sys = compute_mv(h, &ansatz, &theta, psi0, mode)?;
        let theta_dot = solve_step(&sys.m, &sys.v, config.lambda)?;
        if let Some(j) = theta_dot.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step,
                what: format!("theta_dot[{j}]"),
            });
        }
        for (th, d) in theta.iter_mut().zip(theta_dot.iter()) {
            *th += d * config.dt;
        }
        let t = (step + 1) as f64 * config.dt;
        trajectory.push(record(t, &theta)?);
    }
    Ok(VqsRun {
        hamiltonian: h.clone(),
        ansatz,
        config: config.clone(),
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(label: &str) -> PauliTerm {
        PauliTerm::from_label(label).unwrap()
    }

    fn sum(n: usize, terms: &[(&str, f64)]) -> PauliSum {
        PauliSum::from_terms(
            n,
            terms.iter().map(|(l, c)| p(l).with_coeff(Complex64::new(*c, 0.0))),
        )
        .unwrap()
    }

    fn test_hamiltonian() -> PauliSum {
        sum(2, &[("IX", 1.7), ("XI", 0.87), ("ZX", -1.0), ("XZ", -0.87)])
    }

    /// `M = 2Re⟨∂_kψ|∂_qψ⟩`, `V = 2Im⟨∂_kψ|H|ψ⟩` by central differences.
    fn finite_difference(h: &PauliSum, a: &Ansatz, theta: &[f64], psi0: &Statevector) -> (DMatrix<f64>, DVector<f64>) {
        let eps = 1e-6;
        let n = theta.len();
        let grads: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                let mut hi = theta.to_vec();
                let mut lo = theta.to_vec();
                hi[k] += eps;
                lo[k] -= eps;
                let sh = a.state(&hi, psi0).unwrap();
                let sl = a.state(&lo, psi0).unwrap();
                sh.amps().iter().zip(sl.amps()).map(|(x, y)| (x - y) / (2.0 * eps)).collect()
            })
            .collect();
        let psi = a.state(theta, psi0).unwrap();
        let hm = h.to_matrix().unwrap();
        let h_psi = &hm * DVector::from_column_slice(psi.amps());
        let mut m = DMatrix::zeros(n, n);
        let mut v = DVector::zeros(n);
        for k in 0..n {
            let dk = DVector::from_column_slice(&grads[k]);
            for q in 0..n {
                m[(k, q)] = 2.0 * dk.dotc(&DVector::from_column_slice(&grads[q])).re;
            }
            v[k] = 2.0 * dk.dotc(&h_psi).im;
        }
        (m, v)
    }

    fn random_theta(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    #[test]
    fn vha_structure() {
        let h = test_hamiltonian();
        let a = build_vha(&h, 1).unwrap();
        assert_eq!(a.n_params(), 4);
        assert_eq!(build_vha(&h, 2).unwrap().n_params(), 8);
        let psi = Statevector::zero(2).unwrap();
        let out = a.state(&[0.0; 4], &psi).unwrap();
        assert_eq!(out, psi);
        let with_identity = h.add(&sum(2, &[("II", 3.0)])).unwrap();
        assert_eq!(build_vha(&with_identity, 1).unwrap().generators, a.generators);
        assert!(build_vha(&PauliSum::zero(2), 1).is_err());
        assert!(build_vha(&h, 0).is_err());
    }

    #[test]
    fn analytic_matches_finite_differences() {
        let h = test_hamiltonian();
        let a = build_vha(&h, 2).unwrap();
        let psi0 = Statevector::zero(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let theta = random_theta(a.n_params(), &mut rng);
            let sys = compute_mv_analytic(&h, &a, &theta, &psi0).unwrap();
            let (m, v) = finite_difference(&h, &a, &theta, &psi0);
            assert!((&sys.m - m).amax() < 1e-6);
            assert!((&sys.v - v).amax() < 1e-6);
            assert!((&sys.m - sys.m.transpose()).amax() <= 1e-12);
        }
    }

    #[test]
    fn circuit_matches_analytic() {
        let h = test_hamiltonian();
        let a = build_vha(&h, 1).unwrap();
        let psi0 = Statevector::zero(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let theta = random_theta(4, &mut rng);
            let an = compute_mv_analytic(&h, &a, &theta, &psi0).unwrap();
            let ci = compute_mv_circuit(&h, &a, &theta, &psi0, MvMode::CircuitExact).unwrap();
            assert!((&an.m - &ci.m).amax() <= 1e-10);
            assert!((&an.v - &ci.v).amax() <= 1e-10);
        }
    }

    #[test]
    fn sampled_within_five_sigma() {
        let h = test_hamiltonian();
        let a = build_vha(&h, 1).unwrap();
        let psi0 = Statevector::zero(2).unwrap();
        let theta = [0.4, -0.3, 1.2, 0.8];
        let exact = compute_mv_analytic(&h, &a, &theta, &psi0).unwrap();
        let mode = MvMode::CircuitSampled { shots: 50_000, seed: 99 };
        let s = compute_mv_circuit(&h, &a, &theta, &psi0, mode).unwrap();
        let ms = s.m_sigma.as_ref().unwrap();
        for k in 0..4 {
            for q in 0..4 {
                let tol = 5.0 * ms[(k, q)].max(1e-12);
                assert!((s.m[(k, q)] - exact.m[(k, q)]).abs() <= tol);
            }
        }
        assert_eq!(s, compute_mv_circuit(&h, &a, &theta, &psi0, mode).unwrap());
    }

    #[test]
    fn single_generator_rate() {
        let xi = 0.37;
        let h = sum(1, &[("X", xi)]);
        let a = build_vha(&h, 1).unwrap();
        let sys = compute_mv_analytic(&h, &a, &[0.0], &Statevector::zero(1).unwrap()).unwrap();
        let rate = solve_step(&sys.m, &sys.v, 0.0).unwrap();
        assert!((rate[0] - 2.0 * xi).abs() < 1e-14);
    }

    #[test]
    fn zero_hamiltonian_gives_zero_v() {
        let h = sum(2, &[("IX", 0.0), ("ZZ", 0.0)]);
        let a = Ansatz {
            n_qubits: 2,
            n_layers: 1,
            generators: vec![p("IX"), p("ZZ")],
        };
        let psi0 = Statevector::zero(2).unwrap();
        let sys = compute_mv_circuit(&h, &a, &[0.3, 0.2], &psi0, MvMode::CircuitExact).unwrap();
        assert!(sys.v.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn solver_cases() {
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((solve_step(&id, &v, 0.0).unwrap() - &v).amax() < 1e-15);
        let lam = 0.25;
        assert!((solve_step(&id, &v, lam).unwrap() - &v / (1.0 + lam)).amax() < 1e-15);
        let zero = DMatrix::<f64>::zeros(3, 3);
        assert!(solve_step(&zero, &v, 1e-3).unwrap().iter().all(|x| *x == 0.0));
        assert!(solve_step(&zero, &v, 0.0).unwrap().iter().all(|x| *x == 0.0));
        assert!(solve_step(&id, &v, -1.0).is_err());
    }

    #[test]
    fn solver_handles_non_symmetric_and_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let v = DVector::from_vec(vec![1.0, 2.0]);
        let want = m.clone().lu().solve(&v).unwrap();
        assert!((solve_step(&m, &v, 0.0).unwrap() - want).amax() < 1e-14);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -3.0]);
        let want = m.clone().lu().solve(&v).unwrap();
        assert!((solve_step(&m, &v, 0.0).unwrap() - want).amax() < 1e-14);
    }

    proptest! {
        #[test]
        fn solver_matches_dense_solve(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 5;
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let m = &a * a.transpose() + DMatrix::<f64>::identity(n, n);
            let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let want = m.clone().lu().solve(&v).unwrap();
            prop_assert!((solve_step(&m, &v, 0.0).unwrap() - want).amax() <= 1e-10);
        }
    }

    #[test]
    fn zero_duration_run() {
        let h = test_hamiltonian();
        let psi0 = Statevector::zero(2).unwrap();
        let exact = ExactEvolution::new(&h, &psi0).unwrap();
        let run = run_evolution(&h, &psi0, &VqsConfig::analytic(1, 0.0), &exact).unwrap();
        assert_eq!(run.trajectory.len(), 1);
        assert!((run.trajectory[0].fidelity - 1.0).abs() < 1e-14);
        assert!(run.final_theta().iter().all(|t| *t == 0.0));
    }

    #[test]
    fn short_time_error_is_second_order() {
        let h = test_hamiltonian();
        let psi0 = Statevector::zero(2).unwrap();
        let exact = ExactEvolution::new(&h, &psi0).unwrap();
        let err = |dt: f64| {
            let cfg = VqsConfig { dt, ..VqsConfig::analytic(1, dt) };
            let run = run_evolution(&h, &psi0, &cfg, &exact).unwrap();
            let psi = run.ansatz.state(run.final_theta(), &psi0).unwrap();
            let target = exact.state(dt);
            // Phase-insensitive distance.
            let ov = target.inner(&psi).unwrap();
            (2.0 - 2.0 * ov.norm()).max(0.0).sqrt()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn modes_agree_over_a_run() {
        let h = test_hamiltonian();
        let psi0 = Statevector::zero(2).unwrap();
        let exact = ExactEvolution::new(&h, &psi0).unwrap();
        let cfg = VqsConfig::analytic(1, 0.5);
        let a = run_evolution(&h, &psi0, &cfg, &exact).unwrap();
        let cfg_c = VqsConfig { mode: MvMode::CircuitExact, ..cfg.clone() };
        let b = run_evolution(&h, &psi0, &cfg_c, &exact).unwrap();
        for (x, y) in a.final_theta().iter().zip(b.final_theta()) {
            assert!((x - y).abs() <= 1e-8);
        }
        let csv = a.trajectory_csv();
        assert!(csv.starts_with("t,theta_0,theta_1,theta_2,theta_3,fidelity,energy\n"));
        assert_eq!(csv.lines().count(), 52);
    }

    #[test]
    fn energy_is_conserved() {
        let h = test_hamiltonian();
        let psi0 = Statevector::zero(2).unwrap();
        let exact = ExactEvolution::new(&h, &psi0).unwrap();
        let run = run_evolution(&h, &psi0, &VqsConfig::analytic(1, 1.0), &exact).unwrap();
        let norm: f64 = h.iter().map(|t| t.coeff.norm()).sum();
        let e0 = run.trajectory[0].energy;
        for pt in &run.trajectory {
            assert!((pt.energy - e0).abs() <= 1e-3 * norm);
        }
    }
}
