//! Qubit-space Pauli representations of bosonic ladder operators.
//!
//! Under a code `c`, Fock level `i` (or photon number `photon_of_index[i]`)
//! is stored in basis word `c_i`, and each transition `|i⟩_F⟨j|_F` becomes
//! `|c_i⟩⟨c_j|`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{self, Code};
use crate::pauli::{self, PauliSum, PauliTerm, DEFAULT_DROP_TOL};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedOperator {
    pub code: Code,
    /// Number of encoded Fock levels, `2^n`.
    pub fock_dim: usize,
    /// Photon number carried by encoding slot `i`.
    pub photon_of_index: Vec<usize>,
    pub op: PauliSum,
}

impl EncodedOperator {
    pub fn n_qubits(&self) -> usize {
        self.code.n_qubits()
    }

    /// Highest photon number representable by the mapping.
    pub fn max_photon(&self) -> usize {
        self.photon_of_index.iter().copied().max().unwrap_or(0)
    }
}

/// `√((i+1)(i+2)…(i+k))`, i.e. `√((i+k)!/i!)`, as a product of square roots.
pub fn ladder_weight(i: usize, k: usize) -> f64 {
    (i + 1..=i + k).map(|v| (v as f64).sqrt()).product()
}

/// `|c_i⟩⟨c_i|` as `2^{-n} Σ_α (-1)^{W(c_i & α)} Z^α`.
pub fn projector(code: &Code, i: usize) -> Result<PauliSum> {
    if i >= code.len() {
        return Err(Error::IndexOutOfRange {
            index: i.to_string(),
            limit: code.len().to_string(),
        });
    }
    let n = code.n_qubits();
    let ci = code.word(i) as u64;
    let norm = 1.0 / code.len() as f64;
    let terms = (0..code.len() as u64).map(|alpha| {
        let sign = if (ci & alpha).count_ones().is_multiple_of(2) { norm } else { -norm };
        PauliTerm {
            n_qubits: n,
            x_mask: 0,
            z_mask: alpha,
            coeff: Complex64::new(sign, 0.0),
        }
    });
    PauliSum::from_terms(n, terms)
}

/// Annihilation operator as `Σ_{i≥1} √i · X^{c_i ⊕ c_{i-1}} · P_i`.
pub fn encode_b(code: &Code) -> Result<EncodedOperator> {
    let n = code.n_qubits();
    let mut sum = PauliSum::zero(n);
    for i in 1..code.len() {
        let flip = PauliTerm {
            n_qubits: n,
            x_mask: (code.word(i) ^ code.word(i - 1)) as u64,
            z_mask: 0,
            coeff: Complex64::new((i as f64).sqrt(), 0.0),
        };
        for p in projector(code, i)?.iter() {
            sum.push(pauli::multiply(&flip, p)?)?;
        }
    }
    Ok(standard(code, sum.simplified()))
}

/// Annihilation operator through the sparse ket-bra route
/// `Σ √i |c_{i-1}⟩⟨c_i|`.
pub fn encode_b_ketbra(code: &Code) -> Result<EncodedOperator> {
    encode_b_power(code, 1)
}

/// `b^k = Σ_i √((i+k)!/i!) |i⟩⟨i+k|` on the `2^n` encoded levels.
pub fn encode_b_power(code: &Code, k: usize) -> Result<EncodedOperator> {
    if k == 0 || k >= code.len() {
        return Err(Error::InvalidArgument(format!(
            "power k = {k} outside 1..{}",
            code.len()
        )));
    }
    let pairs = (0..code.len() - k).map(|i| {
        (
            code.word(i),
            code.word(i + k),
            Complex64::new(ladder_weight(i, k), 0.0),
        )
    });
    let op = PauliSum::from_ketbras(code.n_qubits(), pairs, DEFAULT_DROP_TOL)?;
    Ok(standard(code, op))
}

/// `b²` restricted to even photon numbers: slot `i` holds `|2i⟩_F`, so
/// `b² = Σ_i √((2i+2)(2i+1)) |c_i⟩⟨c_{i+1}|`.
pub fn encode_even_b2(code: &Code) -> Result<EncodedOperator> {
    let pairs = (0..code.len() - 1).map(|i| {
        (
            code.word(i),
            code.word(i + 1),
            Complex64::new(ladder_weight(2 * i, 2), 0.0),
        )
    });
    let op = PauliSum::from_ketbras(code.n_qubits(), pairs, DEFAULT_DROP_TOL)?;
    Ok(EncodedOperator {
        code: code.clone(),
        fock_dim: code.len(),
        photon_of_index: (0..code.len()).map(|i| 2 * i).collect(),
        op,
    })
}

fn standard(code: &Code, op: PauliSum) -> EncodedOperator {
    EncodedOperator {
        code: code.clone(),
        fock_dim: code.len(),
        photon_of_index: (0..code.len()).collect(),
        op,
    }
}

pub fn term_count(e: &EncodedOperator) -> usize {
    e.op.simplified().len()
}

/// Which ladder operator a sweep encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderOp {
    /// `b^k`; `k = 1` is the annihilation operator itself.
    Power(usize),
    EvenB2,
}

impl LadderOp {
    pub fn encode(&self, code: &Code) -> Result<EncodedOperator> {
        match *self {
            LadderOp::Power(1) => encode_b(code),
            LadderOp::Power(k) => encode_b_power(code, k),
            LadderOp::EvenB2 => encode_even_b2(code),
        }
    }
}

/// Term-count histogram over every code on `n <= 3` qubits.
pub fn term_count_histogram(n: usize, op: LadderOp) -> Result<BTreeMap<usize, u64>> {
    if n > codes::MAX_EXHAUSTIVE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "exhaustive sweep limited to n <= {}, got {n}",
            codes::MAX_EXHAUSTIVE_QUBITS
        )));
    }
    let total = codes::code_space_size(n).expect("small code space") as u64;
    let counts: Vec<usize> = (0..total)
        .into_par_iter()
        .map(|i| {
            let code = codes::unrank(n, i as u128)?;
            Ok(term_count(&op.encode(&code)?))
        })
        .collect::<Result<_>>()?;
    let mut hist = BTreeMap::new();
    for c in counts {
        *hist.entry(c).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Squeezing generator `½[e^{-i(φ-π/2)} b² − e^{i(φ+π/2)} b†²]` split into
/// `(H_R, H_I)`: `H_R = cos φ · (i/2)(b² − b†²)`, `H_I = sin φ · ½(b² + b†²)`.
pub fn squeeze_hamiltonian_parts(b2: &PauliSum, phi: f64) -> Result<(PauliSum, PauliSum)> {
    let adj = b2.adjoint();
    let real_part = b2
        .add(&adj.scale(Complex64::new(-1.0, 0.0)))?
        .scale(Complex64::new(0.0, 0.5 * phi.cos()))
        .simplified();
    let imag_part = b2
        .add(&adj)?
        .scale(Complex64::new(0.5 * phi.sin(), 0.0))
        .simplified();
    Ok((real_part, imag_part))
}

pub fn squeeze_hamiltonian(b2: &PauliSum, phi: f64) -> Result<PauliSum> {
    let (h_r, h_i) = squeeze_hamiltonian_parts(b2, phi)?;
    Ok(h_r.add(&h_i)?.simplified())
}

/// Permutation matrix `Π_c` with `Π_c |i⟩ = |c_i⟩`.
pub fn permutation_matrix(code: &Code) -> DMatrix<Complex64> {
    let dim = code.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (i, &w) in code.words().iter().enumerate() {
        m[(w, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{gray, unrank, Code};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_coeff(s: &PauliSum, label: &str, want: Complex64) {
        let got = s.coeff_of_label(label).unwrap();
        assert!(
            (got - want).norm() < 1e-12,
            "{label}: got {got}, want {want}"
        );
    }

    /// Truncated Fock `b^k` on `dim` levels, written out directly.
    fn fock_power(dim: usize, k: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim.saturating_sub(k) {
            let w: f64 = (i + 1..=i + k).map(|v| v as f64).product::<f64>().sqrt();
            m[(i, i + k)] = c(w, 0.);
        }
        m
    }

    #[test]
    fn projector_worked_example() {
        // The projector onto the word 3 = |11⟩, used by the √2|1⟩⟨3| term.
        let code = Code::new(2, vec![0, 1, 3, 2]).unwrap();
        let p = projector(&code, 2).unwrap().simplified();
        assert_coeff(&p, "II", c(0.25, 0.));
        assert_coeff(&p, "IZ", c(-0.25, 0.));
        assert_coeff(&p, "ZI", c(-0.25, 0.));
        assert_coeff(&p, "ZZ", c(0.25, 0.));
        let m = p.to_matrix().unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == 3 && col == 3 { 1.0 } else { 0.0 };
                assert!((m[(r, col)] - c(want, 0.)).norm() < 1e-15);
            }
        }
        let p1 = projector(&code, 1).unwrap().simplified();
        assert_coeff(&p1, "IZ", c(-0.25, 0.));
        assert_coeff(&p1, "ZI", c(0.25, 0.));
        assert_coeff(&p1, "ZZ", c(-0.25, 0.));
        assert!(projector(&code, 4).is_err());
    }

    #[test]
    fn projectors_sum_to_identity() {
        let code = unrank(3, 12345).unwrap();
        let mut sum = PauliSum::zero(3);
        for i in 0..8 {
            sum = sum.add(&projector(&code, i).unwrap()).unwrap();
        }
        let s = sum.simplified();
        assert_eq!(s.len(), 1);
        assert_coeff(&s, "III", c(1., 0.));
    }

    #[test]
    fn single_qubit_b() {
        let b = encode_b(&Code::binary(1).unwrap()).unwrap();
        assert_eq!(term_count(&b), 2);
        assert_coeff(&b.op, "X", c(0.5, 0.));
        assert_coeff(&b.op, "Y", c(0., 0.5));
    }

    #[test]
    fn worked_example_b_coefficients() {
        let code = Code::new(2, vec![0, 1, 3, 2]).unwrap();
        let b = encode_b(&code).unwrap();
        let (s2, s3) = (2f64.sqrt(), 3f64.sqrt());
        assert_eq!(b.op.len(), 8);
        assert_coeff(&b.op, "IX", c((1. + s3) / 4., 0.));
        assert_coeff(&b.op, "IY", c(0., (1. - s3) / 4.));
        assert_coeff(&b.op, "XI", c(s2 / 4., 0.));
        assert_coeff(&b.op, "YI", c(0., s2 / 4.));
        assert_coeff(&b.op, "ZX", c((1. - s3) / 4., 0.));
        assert_coeff(&b.op, "ZY", c(0., (1. + s3) / 4.));
        assert_coeff(&b.op, "XZ", c(-s2 / 4., 0.));
        assert_coeff(&b.op, "YZ", c(0., -s2 / 4.));
    }

    #[test]
    fn gray3_b_is_minimal() {
        assert_eq!(term_count(&encode_b(&gray(3).unwrap()).unwrap()), 24);
    }

    #[test]
    fn structured_and_ketbra_routes_agree_on_all_two_qubit_codes() {
        for i in 0..24 {
            let code = unrank(2, i).unwrap();
            let a = encode_b(&code).unwrap().op;
            let b = encode_b_ketbra(&code).unwrap().op;
            assert_eq!(a.len(), b.len());
            for (u, v) in a.iter().zip(b.iter()) {
                assert_eq!(u.masks(), v.masks());
                assert!((u.coeff - v.coeff).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn power_one_reduces_to_b() {
        for i in [0u128, 7, 999, 40319] {
            let code = unrank(3, i).unwrap();
            let a = encode_b(&code).unwrap().op;
            let b = encode_b_power(&code, 1).unwrap().op;
            assert_eq!(a.len(), b.len());
            for (u, v) in a.iter().zip(b.iter()) {
                assert_eq!(u.masks(), v.masks());
                assert!((u.coeff - v.coeff).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn binary_b_squared_matrix() {
        let e = encode_b_power(&Code::binary(2).unwrap(), 2).unwrap();
        let m = e.op.to_matrix().unwrap();
        assert!((m[(0, 2)] - c(2f64.sqrt(), 0.)).norm() < 1e-12);
        assert!((m[(1, 3)] - c(6f64.sqrt(), 0.)).norm() < 1e-12);
        let nonzero = m.iter().filter(|v| v.norm() > 1e-12).count();
        assert_eq!(nonzero, 2);
        assert!(encode_b_power(&Code::binary(2).unwrap(), 4).is_err());
    }

    #[test]
    fn encoded_matrices_match_conjugated_fock_oracle() {
        for idx in [0u128, 1, 5, 17, 23] {
            let code = unrank(2, idx).unwrap();
            let pi = permutation_matrix(&code);
            for k in 1..4 {
                let e = encode_b_power(&code, k).unwrap();
                let want = &pi * fock_power(4, k) * pi.adjoint();
                let got = e.op.to_matrix().unwrap();
                assert!((got - want).iter().all(|v| v.norm() < 1e-12));
            }
        }
    }

    #[test]
    fn even_b2_worked_example() {
        let e = encode_even_b2(&gray(2).unwrap()).unwrap();
        assert_eq!(e.photon_of_index, vec![0, 2, 4, 6]);
        assert_eq!(e.op.len(), 8);
        let (s2, s12, s30) = (2f64.sqrt(), 12f64.sqrt(), 30f64.sqrt());
        assert_coeff(&e.op, "IX", c((s2 + s30) / 4., 0.));
        assert_coeff(&e.op, "XI", c(s12 / 4., 0.));
        assert_coeff(&e.op, "IY", c(0., (s2 - s30) / 4.));
        assert_coeff(&e.op, "YI", c(0., s12 / 4.));
        assert_coeff(&e.op, "ZX", c((s2 - s30) / 4., 0.));
        assert_coeff(&e.op, "ZY", c(0., (s2 + s30) / 4.));
        assert_coeff(&e.op, "XZ", c(-s12 / 4., 0.));
        assert_coeff(&e.op, "YZ", c(0., -s12 / 4.));

        // √2|00⟩⟨01| + √12|01⟩⟨11| + √30|11⟩⟨10|
        let m = e.op.to_matrix().unwrap();
        let mut want = DMatrix::zeros(4, 4);
        want[(0b00, 0b01)] = c(s2, 0.);
        want[(0b01, 0b11)] = c(s12, 0.);
        want[(0b11, 0b10)] = c(s30, 0.);
        assert!((m - want).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn even_b2_two_levels() {
        let e = encode_even_b2(&Code::binary(1).unwrap()).unwrap();
        let h = 2f64.sqrt() / 2.;
        assert_coeff(&e.op, "X", c(h, 0.));
        assert_coeff(&e.op, "Y", c(0., h));
    }

    #[test]
    fn squeeze_hamiltonian_matches_closed_forms() {
        let b2 = encode_even_b2(&gray(2).unwrap()).unwrap().op;
        let phi = 0.37;
        let (h_r, h_i) = squeeze_hamiltonian_parts(&b2, phi).unwrap();
        let (s2, s3, s30) = (2f64.sqrt(), 3f64.sqrt(), 30f64.sqrt());
        let (cp, sp) = (phi.cos(), phi.sin());
        assert_eq!(h_r.len(), 4);
        assert_coeff(&h_r, "IY", c(cp * (s30 - s2) / 4., 0.));
        assert_coeff(&h_r, "YI", c(-cp * s3 / 2., 0.));
        assert_coeff(&h_r, "ZY", c(-cp * (s30 + s2) / 4., 0.));
        assert_coeff(&h_r, "YZ", c(cp * s3 / 2., 0.));
        assert_eq!(h_i.len(), 4);
        assert_coeff(&h_i, "IX", c(sp * (s30 + s2) / 4., 0.));
        assert_coeff(&h_i, "XI", c(sp * s3 / 2., 0.));
        assert_coeff(&h_i, "ZX", c(-sp * (s30 - s2) / 4., 0.));
        assert_coeff(&h_i, "XZ", c(-sp * s3 / 2., 0.));
        assert!(squeeze_hamiltonian(&b2, phi).unwrap().is_hermitian(1e-14));
    }

    #[test]
    fn three_qubit_term_count_distribution() {
        let hist = term_count_histogram(3, LadderOp::Power(1)).unwrap();
        let want: BTreeMap<usize, u64> =
            [(24, 4032), (32, 14784), (40, 14784), (48, 6720)].into_iter().collect();
        assert_eq!(hist, want);
        assert!(term_count_histogram(4, LadderOp::Power(1)).is_err());
    }

    #[test]
    fn ladder_weights() {
        assert!((ladder_weight(0, 2) - 2f64.sqrt()).abs() < 1e-15);
        assert!((ladder_weight(1, 2) - 6f64.sqrt()).abs() < 1e-14);
        assert!((ladder_weight(3, 2) - 20f64.sqrt()).abs() < 1e-13);
        assert!(ladder_weight(4000, 90).is_finite());
    }
}
