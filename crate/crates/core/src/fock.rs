//! Exact truncated Fock-space oracle for a single bosonic mode.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reference dimension used for "untruncated" comparisons.
pub const FULL_REFERENCE_DIM: usize = 40;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub dim: usize,
    pub mat: DMatrix<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub dim: usize,
    pub amps: DVector<Complex64>,
}

impl FockOperator {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        Ok(Self {
            dim: mat.nrows(),
            mat,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.adjoint(),
        }
    }

    /// Largest entry of `|H − H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, psi: &FockState) -> Result<FockState> {
        check_dims(self.dim, psi.dim)?;
        Ok(FockState {
            dim: self.dim,
            amps: &self.mat * &psi.amps,
        })
    }

    pub fn expectation(&self, psi: &FockState) -> Result<Complex64> {
        check_dims(self.dim, psi.dim)?;
        Ok(psi.amps.dotc(&(&self.mat * &psi.amps)))
    }
}

impl FockState {
    /// Normalizes `amps`; errors on a zero vector.
    pub fn from_amps(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("state has zero or non-finite norm".into()));
        }
        Ok(Self {
            dim: amps.len(),
            amps: amps / Complex64::new(norm, 0.0),
        })
    }

    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::IndexOutOfRange {
                index: n.to_string(),
                limit: dim.to_string(),
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(Self { dim, amps })
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::basis(dim.max(1), 0).expect("dim >= 1")
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Zero-pads (or truncates and renormalizes) to a new dimension.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        let mut amps = DVector::zeros(dim);
        for i in 0..dim.min(self.dim) {
            amps[i] = self.amps[i];
        }
        Self::from_amps(amps)
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum::<f64>()
            / self.amps.norm_squared()
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        &self.amps * self.amps.adjoint()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::DimensionMismatch(a, b))
    } else {
        Ok(())
    }
}

pub fn annihilation(dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("Fock dimension must be >= 2, got {dim}")));
    }
    let mut mat = DMatrix::zeros(dim, dim);
    for i in 0..dim - 1 {
        mat[(i, i + 1)] = Complex64::new(((i + 1) as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { dim, mat })
}

pub fn creation(dim: usize) -> Result<FockOperator> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number_operator(dim: usize) -> Result<FockOperator> {
    let b = annihilation(dim)?;
    Ok(FockOperator {
        dim,
        mat: b.mat.adjoint() * &b.mat,
    })
}

/// `H = ½[e^{−i(φ−π/2)} b² − e^{i(φ+π/2)} b†²]`, so that `e^{−iHr}` is the
/// squeezing operator with `z = r e^{iφ}`.
pub fn squeeze_hamiltonian(phi: f64, dim: usize) -> Result<FockOperator> {
    let b = annihilation(dim)?.mat;
    let b2 = &b * &b;
    let b2_dag = b2.adjoint();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let lower = Complex64::from_polar(0.5, -(phi - half_pi));
    let raise = Complex64::from_polar(0.5, phi + half_pi);
    let mat = b2 * lower - b2_dag * raise;
    Ok(FockOperator { dim, mat })
}

/// Unnormalized squeezed-vacuum amplitudes on levels `0..dim`.
///
/// `a_{2m} = (−e^{iφ} tanh r)^m √((2m)!) / (2^m m!) / √(cosh r)`, built by a
/// ratio recurrence so no factorials are formed.
pub fn squeezed_amplitudes(r: f64, phi: f64, dim: usize) -> DVector<Complex64> {
    let mut amps = DVector::zeros(dim);
    if dim == 0 {
        return amps;
    }
    let step = -Complex64::from_polar(r.tanh(), phi);
    let mut a = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
    let mut m = 0usize;
    while 2 * m < dim {
        amps[2 * m] = a;
        m += 1;
        let ratio = ((2 * m - 1) as f64 / (2 * m) as f64).sqrt();
        a *= step * ratio;
    }
    amps
}

/// How a truncated reference state is normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationConvention {
    /// Renormalize the kept components to unit norm.
    #[default]
    Normalized,
    /// Keep the raw amplitudes of the full state (norm² = captured weight).
    Unnormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSqueezedState {
    pub state: FockState,
    /// Weight of the full state captured by levels `0..=n_max`.
    pub captured_weight: f64,
}

/// Squeezed vacuum truncated at photon number `n_max` (even).
pub fn exact_squeezed_state(r: f64, phi: f64, n_max: usize) -> Result<TruncatedSqueezedState> {
    exact_squeezed_state_with(r, phi, n_max, TruncationConvention::Normalized)
}

pub fn exact_squeezed_state_with(
    r: f64,
    phi: f64,
    n_max: usize,
    convention: TruncationConvention,
) -> Result<TruncatedSqueezedState> {
    if !n_max.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n_max must be even, got {n_max}")));
    }
    let amps = squeezed_amplitudes(r, phi, n_max + 1);
    let captured_weight = amps.norm_squared();
    let state = match convention {
        TruncationConvention::Normalized => FockState::from_amps(amps)?,
        TruncationConvention::Unnormalized => FockState {
            dim: n_max + 1,
            amps,
        },
    };
    Ok(TruncatedSqueezedState {
        state,
        captured_weight,
    })
}

/// The squeezed vacuum on `dim` levels, renormalized (negligible loss for
/// the reference dimension at moderate `r`).
pub fn full_squeezed_state(r: f64, phi: f64, dim: usize) -> Result<FockState> {
    FockState::from_amps(squeezed_amplitudes(r, phi, dim))
}

/// `e^{−iHt} ψ₀` by Hermitian eigendecomposition.
pub fn propagate(h: &FockOperator, t: f64, psi0: &FockState) -> Result<FockState> {
    check_dims(h.dim, psi0.dim)?;
    Ok(FockState {
        dim: h.dim,
        amps: propagator(h, t)? * &psi0.amps,
    })
}

pub fn propagator(h: &FockOperator, t: f64) -> Result<DMatrix<Complex64>> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let eig = h.mat.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        h.dim,
        eig.eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t)),
    );
    let u = &eig.eigenvectors;
    Ok(u * DMatrix::from_diagonal(&phases) * u.adjoint())
}

/// `|⟨a|b⟩|²` for normalized states.
pub fn fidelity(a: &FockState, b: &FockState) -> Result<f64> {
    check_dims(a.dim, b.dim)?;
    Ok(a.amps.dotc(&b.amps).norm_sqr())
}

/// Fidelity after zero-padding the shorter state.
pub fn fidelity_padded(a: &FockState, b: &FockState) -> f64 {
    let n = a.dim.min(b.dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        acc += a.amps[i].conj() * b.amps[i];
    }
    acc.norm_sqr()
}

/// Squeezing magnitude at which the full state's mean photon number
/// `sinh² r` reaches `n`.
pub fn truncation_boundary(n: f64) -> f64 {
    n.sqrt().asinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Taylor-series matrix exponential, used as an independent oracle.
    fn expm_series(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let norm: f64 = a.iter().map(|v| v.norm()).sum();
        let squarings = (norm.max(1.0).log2().ceil() as u32) + 2;
        let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
        let n = a.nrows();
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &scaled / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn annihilation_matrix() {
        let b = annihilation(2).unwrap();
        assert_eq!(b.mat[(0, 1)], c(1., 0.));
        assert_eq!(b.mat[(1, 0)], c(0., 0.));
        assert!(annihilation(1).is_err());
        let n = number_operator(6).unwrap();
        for i in 0..6 {
            assert!((n.mat[(i, i)] - c(i as f64, 0.)).norm() < 1e-12);
        }
    }

    #[test]
    fn truncated_commutator() {
        let dim = 7;
        let b = annihilation(dim).unwrap().mat;
        let comm = &b * b.adjoint() - b.adjoint() * &b;
        for i in 0..dim {
            for j in 0..dim {
                let want = match (i == j, i == dim - 1) {
                    (true, true) => 1.0 - dim as f64,
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                assert!((comm[(i, j)] - c(want, 0.)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_hermitian_and_real_at_half_pi() {
        for phi in [0.0, 0.3, FRAC_PI_2, 2.5] {
            assert!(squeeze_hamiltonian(phi, 9).unwrap().hermiticity_defect() <= 1e-14);
        }
        let h = squeeze_hamiltonian(FRAC_PI_2, 9).unwrap();
        let b = annihilation(9).unwrap().mat;
        let b2 = &b * &b;
        let want = (&b2 + b2.adjoint()) * c(0.5, 0.);
        assert!((h.mat - want).iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn propagator_matches_series_and_analytic_state() {
        let dim = FULL_REFERENCE_DIM;
        for (r, phi) in [(0.2, FRAC_PI_2), (0.5, FRAC_PI_2), (0.5, 0.7)] {
            let h = squeeze_hamiltonian(phi, dim).unwrap();
            let series = expm_series(&(&h.mat * c(0., -r)));
            let evolved = propagate(&h, r, &FockState::vacuum(dim)).unwrap();
            let by_series = &series * FockState::vacuum(dim).amps;
            assert!((&evolved.amps - by_series).norm() < 1e-10);
            let exact = full_squeezed_state(r, phi, dim).unwrap();
            // The residual comes from the truncation edge at level 40.
            assert!((&evolved.amps - &exact.amps).norm() < 1e-6);
        }
    }

    #[test]
    fn taylor_coefficients_at_half_squeeze() {
        // |z⟩ ∝ exp(−(ν/2μ) b†²)|0⟩: compare with the series applied directly.
        let (r, phi): (f64, f64) = (0.5, FRAC_PI_2);
        let dim = 7;
        let nu = Complex64::from_polar(r.sinh(), phi);
        let mu = r.cosh();
        let bd = creation(FULL_REFERENCE_DIM).unwrap().mat;
        let gen = &bd * &bd * (-nu / (2.0 * mu));
        let raw = expm_series(&gen) * FockState::vacuum(FULL_REFERENCE_DIM).amps;
        let direct = FockState::from_amps(raw.rows(0, dim).into_owned()).unwrap();
        let ours = exact_squeezed_state(r, phi, dim - 1).unwrap().state;
        assert!(fidelity(&direct, &ours).unwrap() > 1.0 - 1e-12);
        for i in 0..dim {
            let ratio = ours.amps[i] - direct.amps[i];
            assert!(ratio.norm() < 1e-12);
        }
    }

    #[test]
    fn vacuum_at_zero_squeezing() {
        let s = exact_squeezed_state(0.0, 0.3, 6).unwrap();
        assert!((s.captured_weight - 1.0).abs() < 1e-15);
        assert!((s.state.amps[0] - c(1., 0.)).norm() < 1e-15);
        assert!(exact_squeezed_state(0.3, 0.0, 5).is_err());
    }

    #[test]
    fn odd_amplitudes_vanish() {
        for r in [0.1, 0.8, 1.9] {
            let s = full_squeezed_state(r, 1.1, 20).unwrap();
            for m in (1..20).step_by(2) {
                assert_eq!(s.amps[m], c(0., 0.));
            }
        }
    }

    #[test]
    fn mean_photon_number_matches_sinh_squared() {
        for r in [0.3f64, 1.0, 1.63] {
            let want = r.sinh().powi(2);
            // The tail decays like tanh(r)^n, so 10·sinh²r levels are not
            // enough for 1e-6 accuracy near r = 1.63.
            let dim = 400;
            let s = full_squeezed_state(r, 0.0, dim).unwrap();
            assert!((s.mean_photon_number() - want).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn truncation_boundary_is_six_photons() {
        let r0 = truncation_boundary(6.0);
        assert!((r0.sinh().powi(2) - 6.0).abs() < 1e-12);
        assert!((r0 - 1.63).abs() < 5e-3);
    }

    #[test]
    fn captured_weight_decreases() {
        let mut prev = 1.0 + 1e-15;
        for i in 0..=40 {
            let r = i as f64 * 0.05;
            let w = exact_squeezed_state(r, FRAC_PI_2, 6).unwrap().captured_weight;
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn captured_weight_equals_fidelity_with_full_state() {
        let r = 1.0;
        let trunc = exact_squeezed_state(r, FRAC_PI_2, 6).unwrap();
        let full = full_squeezed_state(r, FRAC_PI_2, 300).unwrap();
        let f = fidelity_padded(&trunc.state, &full);
        assert!((f - trunc.captured_weight).abs() < 1e-12);
        let raw = exact_squeezed_state_with(r, FRAC_PI_2, 6, TruncationConvention::Unnormalized)
            .unwrap();
        assert!((raw.state.norm().powi(2) - trunc.captured_weight).abs() < 1e-14);
    }

    #[test]
    fn propagation_basics() {
        let h = squeeze_hamiltonian(0.4, 7).unwrap();
        let psi = FockState::from_amps(DVector::from_fn(7, |i, _| c(i as f64 + 1.0, 0.5))).unwrap();
        let same = propagate(&h, 0.0, &psi).unwrap();
        assert!((&same.amps - &psi.amps).norm() < 1e-12);
        let later = propagate(&h, 1.7, &psi).unwrap();
        assert!((later.norm() - 1.0).abs() < 1e-12);
        let bad = FockOperator::new(annihilation(3).unwrap().mat).unwrap();
        assert!(matches!(
            propagate(&bad, 1.0, &FockState::vacuum(3)),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn fidelity_basics() {
        let a = FockState::basis(4, 1).unwrap();
        let b = FockState::basis(4, 2).unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert!(fidelity(&a, &FockState::vacuum(5)).is_err());
    }
}
