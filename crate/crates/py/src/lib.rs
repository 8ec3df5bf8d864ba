//! Python bindings for `bosq`.
//!
//! Matrices cross the boundary as nested lists of `complex`, states as flat
//! lists of amplitudes (index = computational-basis word, qubit 0 lowest).

use std::collections::BTreeMap;

use bosq::analysis::{self, DensityMatrix};
use bosq::codes::{self, KfoldSearch};
use bosq::encoder::{self, LadderOp};
use bosq::fock::{self, FockState, TruncationConvention};
use bosq::pauli::{self, PauliTerm};
use bosq::sim::Statevector;
use bosq::squeeze::{self, SampledSettings, SqueezeModel, SweepConfig};
use bosq::transpile::{self, CircuitFile};
use bosq::Complex64;
use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Matrix = Vec<Vec<Complex64>>;

fn err(e: bosq::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &DMatrix<Complex64>) -> Matrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

fn from_rows(rows: &Matrix) -> PyResult<DMatrix<Complex64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

fn statevector(amps: Vec<Complex64>) -> PyResult<Statevector> {
    Statevector::from_amps(amps).map_err(err)
}

/// A weighted sum of Pauli strings. Labels put qubit `n−1` leftmost.
#[pyclass(name = "PauliSum", module = "bosq", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPauliSum {
    inner: pauli::PauliSum,
}

#[pymethods]
impl PyPauliSum {
    /// A single term, e.g. `PauliSum.from_label("XZ", 0.5)`.
    #[staticmethod]
    #[pyo3(signature = (label, coeff = Complex64::new(1.0, 0.0)))]
    fn from_label(label: &str, coeff: Complex64) -> PyResult<Self> {
        let term = PauliTerm::from_label(label).map_err(err)?.with_coeff(coeff);
        let inner = pauli::PauliSum::from_terms(term.n_qubits, [term]).map_err(err)?;
        Ok(Self { inner })
    }

    /// `|a⟩⟨b|` on `n_qubits` qubits.
    #[staticmethod]
    fn from_ketbra(a: usize, b: usize, n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: pauli::from_ketbra(a, b, n_qubits).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_matrix(rows: Matrix) -> PyResult<Self> {
        Ok(Self {
            inner: pauli::PauliSum::from_matrix(&from_rows(&rows)?).map_err(err)?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    /// `[(label, coeff), ...]` in canonical order.
    fn terms(&self) -> Vec<(String, Complex64)> {
        self.inner.iter().map(|t| (t.label(), t.coeff)).collect()
    }

    fn coeff(&self, label: &str) -> PyResult<Complex64> {
        self.inner.coeff_of_label(label).map_err(err)
    }

    fn simplified(&self) -> Self {
        Self {
            inner: self.inner.simplified(),
        }
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn is_hermitian(&self, tol: f64) -> bool {
        self.inner.is_hermitian(tol)
    }

    fn to_matrix(&self) -> PyResult<Matrix> {
        Ok(to_rows(&self.inner.to_matrix().map_err(err)?))
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn __matmul__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.multiply(&other.inner).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PauliSum({})", self.inner)
    }
}

/// A permutation code: Fock index `i` is stored as basis word `words[i]`.
#[pyclass(name = "Code", module = "bosq", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCode {
    inner: codes::Code,
}

#[pymethods]
impl PyCode {
    #[new]
    fn new(n_qubits: usize, words: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: codes::Code::new(n_qubits, words).map_err(err)?,
        })
    }

    #[staticmethod]
    fn binary(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: codes::Code::binary(n_qubits).map_err(err)?,
        })
    }

    #[staticmethod]
    fn gray(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: codes::gray(n_qubits).map_err(err)?,
        })
    }

    /// The code at position `index` of the dictionary order.
    #[staticmethod]
    fn unrank(n_qubits: usize, index: u128) -> PyResult<Self> {
        Ok(Self {
            inner: codes::unrank(n_qubits, index).map_err(err)?,
        })
    }

    fn rank(&self) -> Option<u128> {
        codes::rank(&self.inner)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn words(&self) -> Vec<usize> {
        self.inner.words().to_vec()
    }

    fn is_kfold(&self, k: usize) -> bool {
        codes::is_kfold(&self.inner, k)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Code({}, {})", self.inner.n_qubits(), self.inner)
    }
}

/// Encoded annihilation operator `b`.
#[pyfunction]
fn encode_b(code: &PyCode) -> PyResult<PyPauliSum> {
    Ok(PyPauliSum {
        inner: encoder::encode_b(&code.inner).map_err(err)?.op,
    })
}

/// Encoded `b^k`.
#[pyfunction]
fn encode_b_power(code: &PyCode, k: usize) -> PyResult<PyPauliSum> {
    Ok(PyPauliSum {
        inner: encoder::encode_b_power(&code.inner, k).map_err(err)?.op,
    })
}

/// `b²` on the even photon numbers `0, 2, 4, …` stored in the code slots.
#[pyfunction]
fn encode_even_b2(code: &PyCode) -> PyResult<PyPauliSum> {
    Ok(PyPauliSum {
        inner: encoder::encode_even_b2(&code.inner).map_err(err)?.op,
    })
}

/// `{terms: number of codes}` over every code on `n_qubits <= 3`.
#[pyfunction]
#[pyo3(signature = (n_qubits, k = 1))]
fn term_count_histogram(py: Python<'_>, n_qubits: usize, k: usize) -> PyResult<BTreeMap<usize, u64>> {
    py.detach(|| encoder::term_count_histogram(n_qubits, LadderOp::Power(k)))
        .map_err(err)
}

#[pyfunction]
fn count_unit_distance(py: Python<'_>, n_qubits: usize) -> PyResult<u64> {
    py.detach(|| codes::count_unit_distance(n_qubits)).map_err(err)
}

/// First k-fold code found, or `None` if none exists; raises when the node
/// budget runs out first.
#[pyfunction]
#[pyo3(signature = (n_qubits, k, budget = 5_000_000))]
fn find_kfold(py: Python<'_>, n_qubits: usize, k: usize, budget: u64) -> PyResult<Option<PyCode>> {
    match py.detach(|| codes::find_kfold(n_qubits, k, budget)).map_err(err)? {
        KfoldSearch::Found { code, .. } => Ok(Some(PyCode { inner: code })),
        KfoldSearch::Absent { .. } => Ok(None),
        KfoldSearch::BudgetExhausted { nodes } => Err(PyValueError::new_err(format!(
            "search budget exhausted after {nodes} nodes"
        ))),
    }
}

#[pyfunction]
fn gray_group_shape(n_qubits: usize, xi: usize) -> PyResult<bool> {
    codes::gray_group_shape(n_qubits, xi).map_err(err)
}

/// Two-qubit squeezing Hamiltonian `H_R + H_I` under the even-photon Gray code.
#[pyfunction]
fn squeeze_hamiltonian(phi: f64) -> PyResult<PyPauliSum> {
    Ok(PyPauliSum {
        inner: SqueezeModel::even_gray(phi).map_err(err)?.hamiltonian,
    })
}

/// Squeezed vacuum `S(re^{iφ})|0⟩` on `dim` Fock levels (unnormalized tail cut).
#[pyfunction]
#[pyo3(signature = (r, phi, dim = fock::FULL_REFERENCE_DIM))]
fn squeezed_state(r: f64, phi: f64, dim: usize) -> PyResult<Vec<Complex64>> {
    Ok(fock::full_squeezed_state(r, phi, dim).map_err(err)?.amps.iter().copied().collect())
}

/// Fidelity-versus-r sweep of the variational squeezing run; one dict per r.
#[pyfunction]
#[pyo3(signature = (phi = std::f64::consts::FRAC_PI_2, r_max = 2.0, points = 41, layers = 1, dt = 0.01, shots = None, seed = 7))]
#[allow(clippy::too_many_arguments)]
fn fidelity_sweep<'py>(
    py: Python<'py>,
    phi: f64,
    r_max: f64,
    points: usize,
    layers: usize,
    dt: f64,
    shots: Option<u64>,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = SweepConfig::grid(phi, r_max, points);
    cfg.n_layers = layers;
    cfg.dt = dt;
    cfg.sampled = shots.map(|s| SampledSettings::new(s, seed));
    let result = py.detach(|| squeeze::fidelity_sweep(&cfg)).map_err(err)?;
    result
        .rows
        .iter()
        .map(|row| {
            let d = PyDict::new(py);
            d.set_item("r", row.r)?;
            d.set_item("captured_weight", row.captured_weight)?;
            d.set_item("vqs", row.vqs)?;
            d.set_item("vqs_vs_squeezed", row.vqs_vs_squeezed)?;
            d.set_item("evolution_vs_squeezed", row.evolution_vs_squeezed)?;
            d.set_item("sampled", row.sampled)?;
            Ok(d)
        })
        .collect()
}

/// Register amplitudes of the variational state at squeezing `r`.
#[pyfunction]
#[pyo3(signature = (r, phi = std::f64::consts::FRAC_PI_2, layers = 1, dt = 0.01))]
fn vqs_state(py: Python<'_>, r: f64, phi: f64, layers: usize, dt: f64) -> PyResult<Vec<Complex64>> {
    let psi = py.detach(|| squeeze::vqs_state(phi, r, layers, dt)).map_err(err)?;
    Ok(psi.into_amps())
}

/// Normalized truncated squeezed state `|z⟩` on the two-qubit register.
#[pyfunction]
#[pyo3(signature = (r, phi = std::f64::consts::FRAC_PI_2))]
fn squeezed_target(r: f64, phi: f64) -> PyResult<Vec<Complex64>> {
    let model = SqueezeModel::even_gray(phi).map_err(err)?;
    Ok(model.squeezed_target_qubits(r).map_err(err)?.into_amps())
}

/// Pauli-basis tomography from `shots` per basis (`shots = 0`: exact).
/// Returns `(coefficients, rho)`.
#[pyfunction]
#[pyo3(signature = (amps, shots, seed = 7))]
fn tomography(py: Python<'_>, amps: Vec<Complex64>, shots: u64, seed: u64) -> PyResult<(BTreeMap<String, f64>, Matrix)> {
    let psi = statevector(amps)?;
    let coeffs = py
        .detach(|| {
            if shots == 0 {
                analysis::tomography_coeffs_exact(&psi)
            } else {
                let results = analysis::sample_tomography(&psi, shots, seed)?;
                analysis::tomography_coeffs_from_shots(psi.n_qubits(), &results)
            }
        })
        .map_err(err)?;
    let rho = analysis::reconstruct(&coeffs).map_err(err)?;
    Ok((coeffs.values, to_rows(&rho.mat)))
}

/// `⟨ψ|ρ|ψ⟩`.
#[pyfunction]
fn state_fidelity(rho: Matrix, amps: Vec<Complex64>) -> PyResult<f64> {
    let psi = statevector(amps)?;
    let rho = DensityMatrix {
        n_qubits: psi.n_qubits(),
        mat: from_rows(&rho)?,
    };
    analysis::state_fidelity(&rho, &psi).map_err(err)
}

/// Maps a two-qubit density matrix to Fock space through the even-photon
/// Gray code (slot `i` holds photon number `2i`).
#[pyfunction]
fn register_to_fock(rho: Matrix) -> PyResult<Matrix> {
    let mat = from_rows(&rho)?;
    let model = SqueezeModel::even_gray(0.0).map_err(err)?;
    let rho = DensityMatrix {
        n_qubits: model.n_qubits(),
        mat,
    };
    Ok(to_rows(&analysis::qubit_to_fock(&rho, &model.embedding).map_err(err)?))
}

/// Wigner function of a Fock-space density matrix; `w[i_p][j_x]`.
#[pyfunction]
fn wigner(py: Python<'_>, rho_fock: Matrix, x: Vec<f64>, p: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let mat = from_rows(&rho_fock)?;
    Ok(py.detach(|| analysis::wigner(&mat, &x, &p)).map_err(err)?.w)
}

/// `|ψ⟩⟨ψ|` for a Fock-space state vector.
#[pyfunction]
fn fock_density_matrix(amps: Vec<Complex64>) -> PyResult<Matrix> {
    let state = FockState::from_amps(amps.into()).map_err(err)?;
    Ok(to_rows(&state.density_matrix()))
}

/// `(λ_min, λ_max, minor-axis angle)` of the `(x, p)` covariance.
#[pyfunction]
fn quadrature_axes(rho_fock: Matrix) -> PyResult<(f64, f64, f64)> {
    let cov = analysis::quadrature_covariance(&from_rows(&rho_fock)?).map_err(err)?;
    Ok(analysis::principal_axes(&cov))
}

/// Truncated analytic squeezed state on levels `0..=n_max` (normalized).
#[pyfunction]
fn truncated_squeezed_state(r: f64, phi: f64, n_max: usize) -> PyResult<Vec<Complex64>> {
    let state = fock::exact_squeezed_state_with(r, phi, n_max, TruncationConvention::Normalized)
        .map_err(err)?
        .state;
    Ok(state.amps.iter().copied().collect())
}

/// Transpiles a circuit JSON document into the native gate set.
/// Returns a dict with the native JSON lines and the equivalence report.
#[pyfunction]
#[pyo3(signature = (circuit_json, tol = 1e-9, lower = false))]
fn transpile_circuit<'py>(py: Python<'py>, circuit_json: &str, tol: f64, lower: bool) -> PyResult<Bound<'py, PyDict>> {
    let file: CircuitFile =
        serde_json::from_str(circuit_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (gates, phase) = if lower {
        transpile::lower(&file.gates).map_err(err)?
    } else {
        (file.gates.clone(), 0.0)
    };
    let mut native = transpile::transpile(file.n_qubits, &gates).map_err(err)?;
    native.global_phase += phase;
    let eq = transpile::verify_native(&file.gates, &native, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("jsonl", native.to_jsonl())?;
    d.set_item("listing", native.listing())?;
    d.set_item("n_gates", native.gates.len())?;
    d.set_item("global_phase", native.global_phase)?;
    d.set_item("equivalent", eq.equivalent)?;
    d.set_item("deviation", eq.deviation)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "bosq")]
fn bosq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SCHEMA_VERSION", bosq::SCHEMA_VERSION)?;
    m.add_class::<PyPauliSum>()?;
    m.add_class::<PyCode>()?;
    m.add_function(wrap_pyfunction!(encode_b, m)?)?;
    m.add_function(wrap_pyfunction!(encode_b_power, m)?)?;
    m.add_function(wrap_pyfunction!(encode_even_b2, m)?)?;
    m.add_function(wrap_pyfunction!(term_count_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(count_unit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(find_kfold, m)?)?;
    m.add_function(wrap_pyfunction!(gray_group_shape, m)?)?;
    m.add_function(wrap_pyfunction!(squeeze_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(squeezed_state, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_squeezed_state, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(vqs_state, m)?)?;
    m.add_function(wrap_pyfunction!(squeezed_target, m)?)?;
    m.add_function(wrap_pyfunction!(tomography, m)?)?;
    m.add_function(wrap_pyfunction!(state_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(register_to_fock, m)?)?;
    m.add_function(wrap_pyfunction!(fock_density_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(wigner, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_axes, m)?)?;
    m.add_function(wrap_pyfunction!(transpile_circuit, m)?)?;
    Ok(())
}
