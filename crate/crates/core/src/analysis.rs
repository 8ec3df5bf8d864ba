//! State characterization: Pauli tomography, mapping qubit states back to
//! Fock space, Wigner functions and quadrature statistics.
//!
//! Phase-space convention: `ħ = 1`, `α = (x + ip)/√2`, vacuum quadrature
//! variance ½, and `W(x,p) = (1/π) Tr[ρ D(α) Π D(α)†]`, so the vacuum gives
//! `W = e^{−x²−p²}/π` and `∫∫ W dx dp = 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::Code;
use crate::encoder::EncodedOperator;
use crate::fock::FockState;
use crate::pauli::{PauliSum, PauliTerm};
use crate::sim::{ShotResult, Statevector};
use crate::{Error, Result, SCHEMA_VERSION};

/// Largest register handled by tomography (4^n coefficients, 3^n bases).
pub const MAX_TOMO_QUBITS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_statevector(psi: &Statevector) -> Self {
        let v = DVector::from_column_slice(psi.amps());
        Self {
            n_qubits: psi.n_qubits(),
            mat: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            mat: DMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        let mut e: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Clips negative eigenvalues to zero and renormalizes the trace.
    pub fn psd_project(&self) -> Self {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let clipped = eig.eigenvalues.map(|e| e.max(0.0));
        let total: f64 = clipped.iter().sum();
        let scale = if total > 0.0 { 1.0 / total } else { 0.0 };
        let d = DMatrix::from_diagonal(&clipped.map(|e| Complex64::new(e * scale, 0.0)));
        Self {
            n_qubits: self.n_qubits,
            mat: &eig.eigenvectors * d * eig.eigenvectors.adjoint(),
        }
    }

    /// `{schema_version, n_qubits, real, imag}` with row-major entry arrays.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..self.mat.nrows())
                .map(|i| (0..self.mat.ncols()).map(|j| f(&self.mat[(i, j)])).collect())
                .collect()
        };
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "n_qubits": self.n_qubits,
            "real": rows(|c| c.re),
            "imag": rows(|c| c.im),
        })
    }
}

/// Pauli labels on `n` qubits in lexicographic order over `I, X, Y, Z`
/// (leftmost symbol = highest qubit).
pub fn pauli_labels(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| ['I', 'X', 'Y', 'Z'].map(|c| format!("{s}{c}")))
            .collect();
    }
    out
}

/// Measurement settings: every label over `X, Y, Z`.
pub fn measurement_bases(n: usize) -> Vec<String> {
    pauli_labels(n).into_iter().filter(|l| !l.contains('I')).collect()
}

/// `tr(ρ P)` for every Pauli label, `II…I ≡ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub n_qubits: usize,
    pub values: BTreeMap<String, f64>,
}

impl PauliCoefficients {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.values.get(label).copied()
    }

    /// Labels in [`pauli_labels`] order with their values.
    pub fn ordered(&self) -> Vec<(String, f64)> {
        pauli_labels(self.n_qubits)
            .into_iter()
            .map(|l| {
                let v = self.values.get(&l).copied().unwrap_or(0.0);
                (l, v)
            })
            .collect()
    }
}

fn check_tomo_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_TOMO_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "tomography supports 1..={MAX_TOMO_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Exact coefficients `⟨ψ|P|ψ⟩`.
pub fn tomography_coeffs_exact(psi: &Statevector) -> Result<PauliCoefficients> {
    let n = psi.n_qubits();
    check_tomo_qubits(n)?;
    let mut values = BTreeMap::new();
    for label in pauli_labels(n) {
        let p = PauliSum::from_terms(n, [PauliTerm::from_label(&label)?])?;
        values.insert(label, crate::sim::expectation(&p, psi)?.re);
    }
    Ok(PauliCoefficients { n_qubits: n, values })
}

/// Coefficients estimated from one [`ShotResult`] per basis in
/// [`measurement_bases`]. A label with identity factors is read as a parity
/// marginal of the basis that puts `Z` on those qubits.
pub fn tomography_coeffs_from_shots(
    n_qubits: usize,
    shots: &BTreeMap<String, ShotResult>,
) -> Result<PauliCoefficients> {
    check_tomo_qubits(n_qubits)?;
    let mut values = BTreeMap::new();
    for label in pauli_labels(n_qubits) {
        if label.chars().all(|c| c == 'I') {
            values.insert(label, 1.0);
            continue;
        }
        let basis: String = label.chars().map(|c| if c == 'I' { 'Z' } else { c }).collect();
        let result = shots.get(&basis).ok_or_else(|| Error::MissingBasis(basis.clone()))?;
        if result.basis != basis {
            return Err(Error::MissingBasis(basis));
        }
        let mask = label
            .chars()
            .enumerate()
            .filter(|(_, c)| *c != 'I')
            .fold(0u64, |m, (pos, _)| m | 1 << (n_qubits - 1 - pos));
        values.insert(label, result.parity_expectation(mask));
    }
    Ok(PauliCoefficients { n_qubits, values })
}

/// Samples `psi` in every basis of [`measurement_bases`]; basis number `i`
/// uses seed `seed + i`.
pub fn sample_tomography(
    psi: &Statevector,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<String, ShotResult>> {
    check_tomo_qubits(psi.n_qubits())?;
    measurement_bases(psi.n_qubits())
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let r = crate::sim::sample(psi, &b, shots, seed.wrapping_add(i as u64))?;
            Ok((b, r))
        })
        .collect()
}

/// `ρ = 2^{-n} Σ_P c_P P` (linear inversion).
pub fn reconstruct(coeffs: &PauliCoefficients) -> Result<DensityMatrix> {
    let n = coeffs.n_qubits;
    check_tomo_qubits(n)?;
    let norm = 1.0 / (1u64 << n) as f64;
    let terms = coeffs
        .ordered()
        .into_iter()
        .map(|(l, v)| Ok(PauliTerm::from_label(&l)?.with_coeff(Complex64::new(v * norm, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityMatrix {
        n_qubits: n,
        mat: PauliSum::from_terms(n, terms)?.to_matrix()?,
    })
}

/// `⟨t|ρ|t⟩`.
pub fn state_fidelity(rho: &DensityMatrix, target: &Statevector) -> Result<f64> {
    if rho.n_qubits != target.n_qubits() {
        return Err(Error::QubitMismatch(rho.n_qubits, target.n_qubits()));
    }
    let t = DVector::from_column_slice(target.amps());
    Ok(t.dotc(&(&rho.mat * &t)).re)
}

/// Where each encoding slot lives in Fock space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockEmbedding {
    pub code: Code,
    pub photon_of_index: Vec<usize>,
}

impl FockEmbedding {
    pub fn standard(code: &Code) -> Self {
        Self {
            code: code.clone(),
            photon_of_index: (0..code.len()).collect(),
        }
    }

    pub fn even_photon(code: &Code) -> Self {
        Self {
            code: code.clone(),
            photon_of_index: (0..code.len()).map(|i| 2 * i).collect(),
        }
    }

    pub fn fock_dim(&self) -> usize {
        self.photon_of_index.iter().copied().max().unwrap_or(0) + 1
    }
}

impl From<&EncodedOperator> for FockEmbedding {
    fn from(e: &EncodedOperator) -> Self {
        Self {
            code: e.code.clone(),
            photon_of_index: e.photon_of_index.clone(),
        }
    }
}

/// `ρ_F[n(i), n(j)] = ρ[c_i, c_j]`, zero elsewhere.
pub fn qubit_to_fock(rho: &DensityMatrix, map: &FockEmbedding) -> Result<DMatrix<Complex64>> {
    if rho.n_qubits != map.code.n_qubits() {
        return Err(Error::QubitMismatch(rho.n_qubits, map.code.n_qubits()));
    }
    let dim = map.fock_dim();
    let mut out = DMatrix::zeros(dim, dim);
    for (i, &ni) in map.photon_of_index.iter().enumerate() {
        for (j, &nj) in map.photon_of_index.iter().enumerate() {
            out[(ni, nj)] = rho.mat[(map.code.word(i), map.code.word(j))];
        }
    }
    Ok(out)
}

/// Amplitude of Fock level `n(i)` is the amplitude of word `c_i`.
pub fn statevector_to_fock(psi: &Statevector, map: &FockEmbedding) -> Result<FockState> {
    if psi.n_qubits() != map.code.n_qubits() {
        return Err(Error::QubitMismatch(psi.n_qubits(), map.code.n_qubits()));
    }
    let dim = map.fock_dim();
    let mut amps = DVector::zeros(dim);
    for (i, &n) in map.photon_of_index.iter().enumerate() {
        amps[n] = psi.amps()[map.code.word(i)];
    }
    Ok(FockState { dim, amps })
}

/// Inverse of [`statevector_to_fock`] for states supported on the image.
pub fn fock_to_statevector(state: &FockState, map: &FockEmbedding) -> Result<Statevector> {
    let mut amps = vec![Complex64::new(0.0, 0.0); map.code.len()];
    for (i, &n) in map.photon_of_index.iter().enumerate() {
        if n < state.dim {
            amps[map.code.word(i)] = state.amps[n];
        }
    }
    Statevector::from_amps(amps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x_values: Vec<f64>,
    pub p_values: Vec<f64>,
    /// `w[i][j] = W(x_values[j], p_values[i])`.
    pub w: Vec<Vec<f64>>,
}

impl WignerGrid {
    fn cell_area(&self) -> f64 {
        step(&self.x_values) * step(&self.p_values)
    }

    /// Trapezoid-rule `∫∫ W dx dp`.
    pub fn integral(&self) -> f64 {
        self.integrate(|w| w)
    }

    /// `2π ∫∫ W² dx dp`, equal to `tr ρ²`.
    pub fn purity(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.integrate(|w| w * w)
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (nx, np) = (self.x_values.len(), self.p_values.len());
        let weight = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let mut acc = 0.0;
        for (i, row) in self.w.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                acc += weight(i, np) * weight(j, nx) * f(w);
            }
        }
        acc * self.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.w.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.w.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `x,p,w` rows, `x` fastest.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p,w\n");
        for (i, row) in self.w.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                writeln!(out, "{},{},{}", self.x_values[j], self.p_values[i], w).unwrap();
            }
        }
        out
    }
}

fn step(v: &[f64]) -> f64 {
    if v.len() < 2 {
        1.0
    } else {
        (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Precomputed `ln k!` for the displaced-parity matrix elements.
struct LnFactorial(Vec<f64>);

impl LnFactorial {
    fn new(n: usize) -> Self {
        let mut t = vec![0.0; n + 1];
        for k in 1..=n {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        Self(t)
    }
}

/// Associated Laguerre `L_j^{(k)}(x)` for `j = 0..=n` by the three-term
/// recurrence.
fn laguerre_column(n: usize, k: usize, x: f64) -> Vec<f64> {
    let k = k as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + k - x);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `π⟨n|D(α)ΠD(α)†|m⟩` for `m ≥ n`:
/// `(−1)^n √(n!/m!) (2α*)^{m−n} e^{−2|α|²} L_n^{(m−n)}(4|α|²)`.
fn parity_elements(dim: usize, alpha: Complex64, lnf: &LnFactorial) -> DMatrix<Complex64> {
    let r2 = alpha.norm_sqr();
    let r = r2.sqrt();
    let arg = alpha.arg();
    let mut k = DMatrix::zeros(dim, dim);
    for d in 0..dim {
        let lag = laguerre_column(dim - 1 - d, d, 4.0 * r2);
        for n in 0..dim - d {
            let m = n + d;
            let value = if d > 0 && r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let log_mag = 0.5 * (lnf.0[n] - lnf.0[m])
                    + if d > 0 { d as f64 * (2.0 * r).ln() } else { 0.0 }
                    - 2.0 * r2;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::from_polar(sign * log_mag.exp() * lag[n], -(d as f64) * arg)
            };
            k[(n, m)] = value;
            k[(m, n)] = value.conj();
        }
    }
    k
}

/// `W(x,p)` on a grid; `rho_f` must be Hermitian with unit trace.
pub fn wigner(rho_f: &DMatrix<Complex64>, x_values: &[f64], p_values: &[f64]) -> Result<WignerGrid> {
    if rho_f.nrows() != rho_f.ncols() {
        return Err(Error::DimensionMismatch(rho_f.nrows(), rho_f.ncols()));
    }
    let defect = (rho_f - rho_f.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let dim = rho_f.nrows();
    let lnf = LnFactorial::new(dim);
    let inv_pi = std::f64::consts::FRAC_1_PI;
    let w = p_values
        .par_iter()
        .map(|&p| {
            x_values
                .iter()
                .map(|&x| {
                    let alpha = Complex64::new(x, p) / std::f64::consts::SQRT_2;
                    let k = parity_elements(dim, alpha, &lnf);
                    // Tr[ρ K] with K_{nm} = ⟨n|DΠD†|m⟩.
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..dim {
                        for n in 0..dim {
                            acc += rho_f[(m, n)] * k[(n, m)];
                        }
                    }
                    inv_pi * acc.re
                })
                .collect()
        })
        .collect();
    Ok(WignerGrid {
        x_values: x_values.to_vec(),
        p_values: p_values.to_vec(),
        w,
    })
}

/// Covariance of `(x, p)` with `x = (b + b†)/√2`, `p = (b − b†)/(i√2)`.
/// Moments are taken in a space two levels larger so the truncation edge
/// does not distort `⟨b b†⟩`.
pub fn quadrature_covariance(rho_f: &DMatrix<Complex64>) -> Result<[[f64; 2]; 2]> {
    if rho_f.nrows() != rho_f.ncols() {
        return Err(Error::DimensionMismatch(rho_f.nrows(), rho_f.ncols()));
    }
    let dim = rho_f.nrows() + 2;
    let mut rho = DMatrix::zeros(dim, dim);
    rho.view_mut((0, 0), (dim - 2, dim - 2)).copy_from(rho_f);
    let b = crate::fock::annihilation(dim)?.mat;
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let x = (&b + b.adjoint()) * s;
    let p = (&b - b.adjoint()) * (s / Complex64::new(0.0, 1.0));
    let ev = |op: &DMatrix<Complex64>| (&rho * op).trace().re;
    let (mx, mp) = (ev(&x), ev(&p));
    let xx = ev(&(&x * &x)) - mx * mx;
    let pp = ev(&(&p * &p)) - mp * mp;
    let xp = 0.5 * ev(&(&x * &p + &p * &x)) - mx * mp;
    Ok([[xx, xp], [xp, pp]])
}

/// Eigen-decomposition of a 2×2 covariance: `(λ_min, λ_max, angle)` where
/// `angle ∈ (−π/2, π/2]` is the direction of the minimum-variance axis.
pub fn principal_axes(cov: &[[f64; 2]; 2]) -> (f64, f64, f64) {
    let (a, b, d) = (cov[0][0], cov[0][1], cov[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let (lo, hi) = (mean - rad, mean + rad);
    // Major-axis angle is ½atan2(2b, a−d); the minor axis is perpendicular.
    let major = 0.5 * (2.0 * b).atan2(a - d);
    let mut minor = major + std::f64::consts::FRAC_PI_2;
    if minor > std::f64::consts::FRAC_PI_2 {
        minor -= std::f64::consts::PI;
    }
    (lo, hi, minor)
}

/// `label,measured,exact` rows in [`pauli_labels`] order.
pub fn coefficients_csv(measured: &PauliCoefficients, exact: &PauliCoefficients) -> String {
    let mut out = String::from("label,measured,exact\n");
    for (label, v) in measured.ordered() {
        let e = exact.get(&label).unwrap_or(0.0);
        writeln!(out, "{label},{v},{e}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::gray;
    use crate::fock;
    use crate::sim::{run, sample, Gate};
    use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> Statevector {
        run(
            &[Gate::H { qubit: 0 }, Gate::Cnot { control: 0, target: 1 }],
            &Statevector::zero(2).unwrap(),
        )
        .unwrap()
    }

    fn random_state(n: usize, seed: u64) -> Statevector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..1 << n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Statevector::from_amps(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    /// Matrix exponential by scaling and squaring, for the Wigner oracle.
    fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let norm: f64 = a.iter().map(|v| v.norm()).sum();
        let sq = (norm.max(1.0).log2().ceil() as i32) + 3;
        let scaled = a / c(2f64.powi(sq), 0.);
        let n = a.nrows();
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / c(k as f64, 0.);
            sum += &term;
        }
        for _ in 0..sq {
            sum = &sum * &sum;
        }
        sum
    }

    /// `(1/π) Tr[ρ D Π D†]` with `D` built in a large truncated space.
    fn wigner_oracle(rho: &DMatrix<Complex64>, x: f64, p: f64) -> f64 {
        let big = 70;
        let b = fock::annihilation(big).unwrap().mat;
        let alpha = c(x, p) / 2f64.sqrt();
        let d = expm(&(b.adjoint() * alpha - &b * alpha.conj()));
        let parity = DMatrix::from_fn(big, big, |i, j| {
            if i != j {
                c(0., 0.)
            } else if i % 2 == 0 {
                c(1., 0.)
            } else {
                c(-1., 0.)
            }
        });
        let k = &d * parity * d.adjoint();
        let dim = rho.nrows();
        let mut acc = c(0., 0.);
        for m in 0..dim {
            for n in 0..dim {
                acc += rho[(m, n)] * k[(n, m)];
            }
        }
        acc.re / PI
    }

    #[test]
    fn coefficients_of_simple_states() {
        let zero = tomography_coeffs_exact(&Statevector::zero(2).unwrap()).unwrap();
        for (label, v) in zero.ordered() {
            let want = if ["II", "IZ", "ZI", "ZZ"].contains(&label.as_str()) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-15, "{label}");
        }
        let b = tomography_coeffs_exact(&bell()).unwrap();
        for (label, v) in b.ordered() {
            let want = match label.as_str() {
                "II" | "XX" | "ZZ" => 1.0,
                "YY" => -1.0,
                _ => 0.0,
            };
            assert!((v - want).abs() < 1e-15, "{label}");
        }
        assert_eq!(pauli_labels(2).len(), 16);
        assert_eq!(measurement_bases(2).len(), 9);
    }

    #[test]
    fn exact_round_trip() {
        for seed in 0..5 {
            let psi = random_state(2, seed);
            let rho = reconstruct(&tomography_coeffs_exact(&psi).unwrap()).unwrap();
            let want = DensityMatrix::from_statevector(&psi);
            assert!((&rho.mat - &want.mat).iter().all(|v| v.norm() <= 1e-12));
            assert!((state_fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_only_gives_maximally_mixed() {
        let mut values = BTreeMap::new();
        values.insert("II".to_string(), 1.0);
        let rho = reconstruct(&PauliCoefficients { n_qubits: 2, values }).unwrap();
        let mm = DensityMatrix::maximally_mixed(2);
        assert!((&rho.mat - &mm.mat).iter().all(|v| v.norm() < 1e-15));
        assert!((state_fidelity(&mm, &bell()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fidelity_is_quadratic_form() {
        let rho = DensityMatrix::from_statevector(&random_state(2, 9));
        let t = random_state(2, 10);
        let v = DVector::from_column_slice(t.amps());
        let want = (v.adjoint() * &rho.mat * &v)[(0, 0)].re;
        assert!((state_fidelity(&rho, &t).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn shot_estimates_within_binomial_bounds() {
        let psi = random_state(2, 3);
        let exact = tomography_coeffs_exact(&psi).unwrap();
        let shots = 50_000;
        let data = sample_tomography(&psi, shots, 100).unwrap();
        assert_eq!(data["XY"], sample(&psi, "XY", shots, 101).unwrap());
        let est = tomography_coeffs_from_shots(2, &data).unwrap();
        for (label, v) in est.ordered() {
            let e = exact.get(&label).unwrap();
            let sigma = ((1.0 - e * e).max(0.0) / shots as f64).sqrt();
            assert!((v - e).abs() <= 5.0 * sigma + 1e-12, "{label}: {v} vs {e}");
        }
        let mut partial = data.clone();
        partial.remove("XY");
        assert!(matches!(
            tomography_coeffs_from_shots(2, &partial),
            Err(Error::MissingBasis(_))
        ));
    }

    #[test]
    fn psd_projection() {
        let mut values = BTreeMap::new();
        values.insert("II".to_string(), 1.0);
        values.insert("ZZ".to_string(), 1.0);
        values.insert("XX".to_string(), 1.0);
        values.insert("YY".to_string(), 1.0);
        let raw = reconstruct(&PauliCoefficients { n_qubits: 2, values }).unwrap();
        assert!(raw.eigenvalues()[0] < -0.1);
        let proj = raw.psd_project();
        assert!(proj.eigenvalues()[0] >= -1e-12);
        assert!((proj.trace() - c(1., 0.)).norm() < 1e-12);
        let twice = proj.psd_project();
        assert!((&twice.mat - &proj.mat).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn fock_mapping() {
        let map = FockEmbedding::even_photon(&gray(2).unwrap());
        assert_eq!(map.fock_dim(), 7);
        let vac = DensityMatrix::from_statevector(&Statevector::basis(2, 0b00).unwrap());
        let rf = qubit_to_fock(&vac, &map).unwrap();
        assert_eq!(rf[(0, 0)], c(1., 0.));
        let top = DensityMatrix::from_statevector(&Statevector::basis(2, 0b11).unwrap());
        let rf = qubit_to_fock(&top, &map).unwrap();
        assert_eq!(rf[(4, 4)], c(1., 0.));
        assert!((rf.trace() - c(1., 0.)).norm() < 1e-15);

        let psi = random_state(2, 4);
        let f = statevector_to_fock(&psi, &map).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-12);
        assert_eq!(fock_to_statevector(&f, &map).unwrap(), psi);
        let rho = DensityMatrix::from_statevector(&psi);
        let rf = qubit_to_fock(&rho, &map).unwrap();
        assert!((rf - f.density_matrix()).iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn vacuum_wigner() {
        let rho = FockState::vacuum(5).density_matrix();
        let g = wigner(&rho, &[0.0, 0.7], &[0.0, -1.1]).unwrap();
        assert!((g.w[0][0] - FRAC_1_PI).abs() < 1e-9);
        let want = FRAC_1_PI * (-(0.7f64 * 0.7) - 1.1 * 1.1).exp();
        assert!((g.w[1][1] - want).abs() < 1e-12);
    }

    #[test]
    fn matches_displaced_parity_oracle() {
        let psi = random_state(3, 12);
        let f = FockState::from_amps(DVector::from_column_slice(&psi.amps()[..6])).unwrap();
        let rho = f.density_matrix();
        for (x, p) in [(0.0, 0.0), (0.4, -0.9), (-1.3, 0.2), (2.1, 1.7)] {
            let got = wigner(&rho, &[x], &[p]).unwrap().w[0][0];
            let want = wigner_oracle(&rho, x, p);
            assert!((got - want).abs() < 1e-9, "({x},{p}): {got} vs {want}");
        }
    }

    #[test]
    fn even_states_have_positive_origin_parity() {
        let s = fock::exact_squeezed_state(0.8, 0.4, 6).unwrap().state;
        let g = wigner(&s.density_matrix(), &[0.0], &[0.0]).unwrap();
        assert!((g.w[0][0] - FRAC_1_PI).abs() < 1e-9);
    }

    #[test]
    fn normalization_and_purity() {
        let s = fock::exact_squeezed_state(0.5, FRAC_PI_2, 6).unwrap().state;
        let grid = linspace(-5.0, 5.0, 201);
        let g = wigner(&s.density_matrix(), &grid, &grid).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-3);
        assert!((g.purity() - 1.0).abs() < 1e-3);
        assert!(g.to_csv().lines().count() == 201 * 201 + 1);
    }

    #[test]
    fn covariance_of_vacuum_and_squeezed_state() {
        let vac = quadrature_covariance(&FockState::vacuum(3).density_matrix()).unwrap();
        assert!((vac[0][0] - 0.5).abs() < 1e-14 && (vac[1][1] - 0.5).abs() < 1e-14);
        assert!(vac[0][1].abs() < 1e-14);

        let r = 0.5;
        for phi in [0.0, FRAC_PI_2, 1.2] {
            let full = fock::full_squeezed_state(r, phi, fock::FULL_REFERENCE_DIM).unwrap();
            let cov = quadrature_covariance(&full.density_matrix()).unwrap();
            let (lo, hi, angle) = principal_axes(&cov);
            assert!((lo - (-2.0 * r).exp() / 2.0).abs() < 1e-9);
            assert!((hi - (2.0 * r).exp() / 2.0).abs() < 1e-9);
            // The squeezed axis sits at φ/2 from x.
            let mut diff = angle - phi / 2.0;
            while diff > FRAC_PI_2 {
                diff -= PI;
            }
            while diff <= -FRAC_PI_2 {
                diff += PI;
            }
            assert!(diff.abs() < 1e-9, "phi {phi}: angle {angle}");
        }
    }

    #[test]
    fn density_json_shape() {
        let j = DensityMatrix::from_statevector(&bell()).to_json();
        assert_eq!(j["schema_version"], 1);
        assert_eq!(j["real"].as_array().unwrap().len(), 4);
        assert_eq!(j["imag"][0].as_array().unwrap().len(), 4);
    }
}
