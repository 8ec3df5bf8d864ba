//! Weighted Pauli strings in symplectic bitmask form.
//!
//! Bit `q` of `(x_mask, z_mask)` selects the factor on qubit `q`:
//! `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`. The coefficient
//! multiplies the Hermitian string itself, so a `Y` factor is stored as-is;
//! products fold the phases of `Y = iXZ` back into the coefficient.
//!
//! Basis word `w` is the computational basis state whose bit `q` is the
//! value of qubit `q`, and dense matrices are indexed by basis words.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Terms with `|coeff|` at or below this are dropped by [`PauliSum::simplified`].
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

/// Largest register [`PauliSum::to_matrix`] will densify by default.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Masks are `u64`; expansions enumerate `2^n` strings, so stay well below that.
pub const MAX_QUBITS: usize = 30;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[inline]
fn i_pow(e: u32) -> Complex64 {
    I_POW[(e & 3) as usize]
}

#[inline]
fn mask_for(n_qubits: usize) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub n_qubits: usize,
    pub x_mask: u64,
    pub z_mask: u64,
    pub coeff: Complex64,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, coeff: Complex64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let full = mask_for(n_qubits);
        if x_mask & !full != 0 || z_mask & !full != 0 {
            return Err(Error::InvalidArgument(format!(
                "masks ({x_mask:#b}, {z_mask:#b}) exceed {n_qubits} qubits"
            )));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
            coeff,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
            coeff: Complex64::new(1.0, 0.0),
        }
    }

    /// Parses a label such as `"XIZ"`, leftmost character on qubit `n-1`.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        check_qubits(n)?;
        let (mut x, mut z) = (0u64, 0u64);
        for (pos, ch) in label.chars().enumerate() {
            let q = n - 1 - pos;
            match ch.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= 1 << q,
                'Z' => z |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unexpected Pauli symbol {other:?} in {label:?}"
                    )))
                }
            }
        }
        Ok(Self {
            n_qubits: n,
            x_mask: x,
            z_mask: z,
            coeff: Complex64::new(1.0, 0.0),
        })
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    /// Label without the coefficient, qubit `n-1` first.
    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .rev()
            .map(|q| self.symbol(q))
            .collect()
    }

    pub fn symbol(&self, q: usize) -> char {
        match ((self.x_mask >> q) & 1, (self.z_mask >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    #[inline]
    pub fn masks(&self) -> (u64, u64) {
        (self.x_mask, self.z_mask)
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn support(&self) -> u64 {
        self.x_mask | self.z_mask
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            ..*self
        }
    }

    /// `self · other` as a single term.
    pub fn multiply(&self, other: &PauliTerm) -> Result<PauliTerm> {
        multiply(self, other)
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let sym = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        sym.is_multiple_of(2)
    }

    /// Action on a basis state: `σ|w⟩ = phase · |w ⊕ x⟩`, coefficient included.
    #[inline]
    pub fn act_on_basis(&self, word: usize) -> (usize, Complex64) {
        let w = word as u64;
        let e = (self.x_mask & self.z_mask).count_ones() + 2 * (self.z_mask & w).count_ones();
        ((w ^ self.x_mask) as usize, self.coeff * i_pow(e))
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:+.6}{:+.6}i) {}",
            self.coeff.re,
            self.coeff.im,
            self.label()
        )
    }
}

/// Matrix product of two terms, with the phase folded into the coefficient.
pub fn multiply(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch(a.n_qubits, b.n_qubits));
    }
    // σ(x,z) = i^{|x&z|} X^x Z^z, and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1.
    let x = a.x_mask ^ b.x_mask;
    let z = a.z_mask ^ b.z_mask;
    let e = (a.x_mask & a.z_mask).count_ones()
        + (b.x_mask & b.z_mask).count_ones()
        + 2 * (a.z_mask & b.x_mask).count_ones()
        + 3 * (x & z).count_ones();
    Ok(PauliTerm {
        n_qubits: a.n_qubits,
        x_mask: x,
        z_mask: z,
        coeff: a.coeff * b.coeff * i_pow(e),
    })
}

/// Coefficient pattern of `|a⟩⟨b|` over the `2^n` strings sharing `x = a ⊕ b`,
/// indexed by the z mask. Each entry has magnitude `2^{-n}`.
fn ketbra_phase(a: u64, b: u64, z: u64) -> u32 {
    let d = a ^ b;
    let same_neg = (z & !d & a).count_ones(); // (I - Z)/2 on |1⟩⟨1|
    let y_up = (z & d & !a).count_ones(); // |0⟩⟨1| = (X + iY)/2
    let y_down = (z & d & a).count_ones(); // |1⟩⟨0| = (X - iY)/2
    2 * same_neg + y_up + 3 * y_down
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Collects terms without combining them; call [`PauliSum::simplify`] for
    /// the canonical form.
    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        check_qubits(n_qubits)?;
        let terms: Vec<_> = terms.into_iter().collect();
        if let Some(t) = terms.iter().find(|t| t.n_qubits != n_qubits) {
            return Err(Error::QubitMismatch(n_qubits, t.n_qubits));
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PauliTerm> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the string `(x, z)`, summed over any uncombined duplicates.
    pub fn coeff_of(&self, x_mask: u64, z_mask: u64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.masks() == (x_mask, z_mask))
            .map(|t| t.coeff)
            .sum()
    }

    /// Coefficient of a labelled string such as `"ZY"`.
    pub fn coeff_of_label(&self, label: &str) -> Result<Complex64> {
        let t = PauliTerm::from_label(label)?;
        if t.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, t.n_qubits));
        }
        Ok(self.coeff_of(t.x_mask, t.z_mask))
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if term.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, term.n_qubits));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(PauliSum {
            n_qubits: self.n_qubits,
            terms,
        })
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coeff(t.coeff * factor))
                .collect(),
        }
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(PauliTerm::adjoint).collect(),
        }
    }

    /// Operator product, simplified at [`DEFAULT_DROP_TOL`].
    pub fn multiply(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut acc: HashMap<(u64, u64), Complex64> = HashMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let p = multiply(a, b)?;
                *acc.entry(p.masks()).or_default() += p.coeff;
            }
        }
        Ok(Self::from_accumulated(self.n_qubits, acc, DEFAULT_DROP_TOL))
    }

    /// Combines like terms, drops `|coeff| <= tol` and sorts by `(x_mask, z_mask)`.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut acc: HashMap<(u64, u64), Complex64> = HashMap::with_capacity(self.terms.len());
        for t in &self.terms {
            *acc.entry(t.masks()).or_default() += t.coeff;
        }
        Self::from_accumulated(self.n_qubits, acc, tol)
    }

    pub fn simplified(&self) -> PauliSum {
        self.simplify(DEFAULT_DROP_TOL)
    }

    fn from_accumulated(
        n_qubits: usize,
        acc: impl IntoIterator<Item = ((u64, u64), Complex64)>,
        tol: f64,
    ) -> PauliSum {
        let mut terms: Vec<PauliTerm> = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|((x, z), c)| PauliTerm {
                n_qubits,
                x_mask: x,
                z_mask: z,
                coeff: c,
            })
            .collect();
        terms.sort_unstable_by_key(|t| t.masks());
        PauliSum { n_qubits, terms }
    }

    /// Hermitian strings are self-adjoint, so the sum is Hermitian iff every
    /// combined coefficient is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.simplify(0.0).terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_matrix_capped(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > cap {
            return Err(Error::DenseCapExceeded {
                n_qubits: self.n_qubits,
                cap,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            for col in 0..dim {
                let (row, v) = t.act_on_basis(col);
                m[(row, col)] += v;
            }
        }
        Ok(m)
    }

    /// Pauli decomposition of a dense `2^n × 2^n` matrix via `tr(σ† M) / 2^n`.
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<PauliSum> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "matrix of shape {}x{} is not a qubit operator",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        let scale = 1.0 / dim as f64;
        let mut acc = Vec::new();
        for x in 0..dim as u64 {
            for z in 0..dim as u64 {
                let probe = PauliTerm {
                    n_qubits: n,
                    x_mask: x,
                    z_mask: z,
                    coeff: Complex64::new(1.0, 0.0),
                };
                let mut s = Complex64::new(0.0, 0.0);
                for col in 0..dim {
                    let (row, v) = probe.act_on_basis(col);
                    s += v.conj() * m[(row, col)];
                }
                acc.push(((x, z), s * scale));
            }
        }
        Ok(Self::from_accumulated(n, acc, 0.0))
    }

    /// Expansion of `|a⟩⟨b|` into its `2^n` Pauli strings.
    pub fn from_ketbra(a: usize, b: usize, n_qubits: usize) -> Result<PauliSum> {
        from_ketbra(a, b, n_qubits)
    }

    /// Sums `Σ w·|a⟩⟨b|` by accumulating per shared x mask, simplified at `tol`.
    ///
    /// Costs `O(#pairs · 2^n)`, which is what makes the `b^k` sweeps tractable.
    pub fn from_ketbras(
        n_qubits: usize,
        pairs: impl IntoIterator<Item = (usize, usize, Complex64)>,
        tol: f64,
    ) -> Result<PauliSum> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let norm = 1.0 / dim as f64;
        let mut by_x: BTreeMap<u64, Vec<Complex64>> = BTreeMap::new();
        for (a, b, w) in pairs {
            for word in [a, b] {
                if word >= dim {
                    return Err(Error::WordOutOfRange { word, n_qubits });
                }
            }
            let (a, b) = (a as u64, b as u64);
            let row = by_x
                .entry(a ^ b)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim]);
            let w = w * norm;
            for (z, slot) in row.iter_mut().enumerate() {
                *slot += w * i_pow(ketbra_phase(a, b, z as u64));
            }
        }
        let mut terms = Vec::new();
        for (x, row) in by_x {
            for (z, c) in row.into_iter().enumerate() {
                if c.norm() > tol {
                    terms.push(PauliTerm {
                        n_qubits,
                        x_mask: x,
                        z_mask: z as u64,
                        coeff: c,
                    });
                }
            }
        }
        Ok(PauliSum { n_qubits, terms })
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Expansion of the transition operator `|a⟩⟨b|` as the tensor product of
/// the per-bit cases `|0⟩⟨0| = (I+Z)/2`, `|1⟩⟨1| = (I-Z)/2`,
/// `|1⟩⟨0| = (X-iY)/2` and `|0⟩⟨1| = (X+iY)/2`.
pub fn from_ketbra(a: usize, b: usize, n_qubits: usize) -> Result<PauliSum> {
    check_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    for word in [a, b] {
        if word >= dim {
            return Err(Error::WordOutOfRange { word, n_qubits });
        }
    }
    let (a, b) = (a as u64, b as u64);
    let norm = 1.0 / dim as f64;
    let terms = (0..dim as u64)
        .map(|z| PauliTerm {
            n_qubits,
            x_mask: a ^ b,
            z_mask: z,
            coeff: i_pow(ketbra_phase(a, b, z)) * norm,
        })
        .collect();
    Ok(PauliSum { n_qubits, terms })
}
