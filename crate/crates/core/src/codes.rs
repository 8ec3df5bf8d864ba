//! Permutation codes assigning Fock level `i` to basis word `c_i`.
//!
//! Codes of `n` qubits are permutations of `0..2^n`, ordered
//! lexicographically; the code at rank 0 is the binary code. Unit-distance
//! codes (consecutive words at Hamming distance 1) are exactly the 1-fold
//! codes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest register for which whole-space enumeration is permitted.
pub const MAX_EXHAUSTIVE_QUBITS: usize = 3;

/// Codes are materialized as `2^n` words, so keep `n` modest.
pub const MAX_CODE_QUBITS: usize = 16;

#[inline]
pub fn hamming(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Code {
    n: usize,
    words: Vec<usize>,
}

impl Code {
    /// Validates that `words` is a permutation of `0..2^n`.
    pub fn new(n: usize, words: Vec<usize>) -> Result<Self> {
        check_n(n)?;
        let dim = 1usize << n;
        if words.len() != dim {
            return Err(Error::InvalidCode(format!(
                "expected {dim} words for {n} qubits, got {}",
                words.len()
            )));
        }
        let mut seen = vec![false; dim];
        for &w in &words {
            if w >= dim || std::mem::replace(&mut seen[w], true) {
                return Err(Error::InvalidCode(format!(
                    "word {w} is out of range or repeated"
                )));
            }
        }
        Ok(Self { n, words })
    }

    /// The natural encoding `c_i = i`.
    pub fn binary(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            n,
            words: (0..1usize << n).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of encoded levels, `2^n`.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    pub fn word(&self, index: usize) -> usize {
        self.words[index]
    }

    /// Inverse map: basis word to Fock index.
    pub fn index_of_word(&self) -> Vec<usize> {
        let mut inv = vec![0; self.words.len()];
        for (i, &w) in self.words.iter().enumerate() {
            inv[w] = i;
        }
        inv
    }

    pub fn classify(&self) -> CodeClass {
        let kfold_for: BTreeSet<usize> = (1..self.len()).filter(|&k| is_kfold(self, k)).collect();
        CodeClass {
            is_unit_distance: kfold_for.contains(&1),
            kfold_for,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeClass {
    pub is_unit_distance: bool,
    pub kfold_for: BTreeSet<usize>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_CODE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} outside 1..={MAX_CODE_QUBITS}"
        )));
    }
    Ok(())
}

/// `m!` if it fits in a `u128`.
fn factorial(m: usize) -> Option<u128> {
    (1..=m as u128).try_fold(1u128, |acc, v| acc.checked_mul(v))
}

/// Number of codes on `n` qubits, `(2^n)!`, if representable.
pub fn code_space_size(n: usize) -> Option<u128> {
    factorial(1usize << n)
}

/// The `index`-th permutation of `0..2^n` in dictionary order, decoded from
/// the factorial number system.
///
/// For `n >= 6` the code space exceeds `u128`, so every `u128` index is
/// valid and only the trailing positions are ever permuted.
pub fn unrank(n: usize, index: u128) -> Result<Code> {
    check_n(n)?;
    let dim = 1usize << n;
    if let Some(total) = factorial(dim) {
        if index >= total {
            return Err(Error::IndexOutOfRange {
                index: index.to_string(),
                limit: total.to_string(),
            });
        }
    }
    let mut pool: Vec<usize> = (0..dim).collect();
    let mut rest = index;
    let mut words = Vec::with_capacity(dim);
    for pos in 0..dim {
        let digit = match factorial(dim - 1 - pos) {
            Some(f) => {
                let d = (rest / f) as usize;
                rest %= f;
                d
            }
            None => 0,
        };
        words.push(pool.remove(digit));
    }
    Ok(Code { n, words })
}

/// Dictionary-order rank of a code, if it fits in a `u128`.
pub fn rank(code: &Code) -> Option<u128> {
    let dim = code.len();
    let mut pool: Vec<usize> = (0..dim).collect();
    let mut acc = 0u128;
    for (pos, &w) in code.words.iter().enumerate() {
        let digit = pool.iter().position(|&p| p == w).expect("valid code");
        pool.remove(digit);
        if digit > 0 {
            let f = factorial(dim - 1 - pos)?;
            acc = acc.checked_add(f.checked_mul(digit as u128)?)?;
        }
    }
    Some(acc)
}

/// Reflected Gray code from `G_n = (0·G_{n-1}, 1·reverse(G_{n-1}))`, `G_1 = (0, 1)`.
pub fn gray(n: usize) -> Result<Code> {
    check_n(n)?;
    let mut words = vec![0usize, 1];
    for bit in 1..n {
        let top = 1usize << bit;
        let reflected: Vec<usize> = words.iter().rev().map(|w| w | top).collect();
        words.extend(reflected);
    }
    Ok(Code { n, words })
}

/// True iff every pair of codewords `k` positions apart differs in one bit.
pub fn is_kfold(code: &Code, k: usize) -> bool {
    if k == 0 || k >= code.len() {
        return false;
    }
    code.words
        .iter()
        .zip(&code.words[k..])
        .all(|(&a, &b)| hamming(a, b) == 1)
}

/// Exact size of the unit-distance subset, by exhaustive backtracking.
pub fn count_unit_distance(n: usize) -> Result<u64> {
    check_n(n)?;
    if n > MAX_EXHAUSTIVE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration limited to n <= {MAX_EXHAUSTIVE_QUBITS}, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut used = vec![false; dim];

    fn extend(last: usize, placed: usize, n: usize, used: &mut [bool]) -> u64 {
        if placed == used.len() {
            return 1;
        }
        let mut total = 0;
        for bit in 0..n {
            let next = last ^ (1 << bit);
            if !used[next] {
                used[next] = true;
                total += extend(next, placed + 1, n, used);
                used[next] = false;
            }
        }
        total
    }

    let mut total = 0;
    for start in 0..dim {
        used[start] = true;
        total += extend(start, 1, n, &mut used);
        used[start] = false;
    }
    Ok(total)
}

/// Outcome of a k-fold search. Budget exhaustion is not a proof of absence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KfoldSearch {
    Found { code: Code, nodes: u64 },
    Absent { nodes: u64 },
    BudgetExhausted { nodes: u64 },
}

impl KfoldSearch {
    pub fn code(&self) -> Option<&Code> {
        match self {
            KfoldSearch::Found { code, .. } => Some(code),
            _ => None,
        }
    }

    pub fn nodes(&self) -> u64 {
        match self {
            KfoldSearch::Found { nodes, .. }
            | KfoldSearch::Absent { nodes }
            | KfoldSearch::BudgetExhausted { nodes } => *nodes,
        }
    }
}

/// Finds a k-fold code, trying the binary and Gray codes before searching.
pub fn find_kfold(n: usize, k: usize, node_budget: u64) -> Result<KfoldSearch> {
    check_n(n)?;
    for seed in [Code::binary(n)?, gray(n)?] {
        if is_kfold(&seed, k) {
            return Ok(KfoldSearch::Found {
                code: seed,
                nodes: 0,
            });
        }
    }
    search_kfold(n, k, node_budget)
}

/// Lowest-word-first depth-first search, so the first hit is the
/// dictionary-order minimum among k-fold codes.
///
/// Once position `i - k` is fixed, position `i` can only hold one of the
/// `n` Hamming neighbours of that word, which keeps the branching factor
/// at most `n` past the first `k` slots.
pub fn search_kfold(n: usize, k: usize, node_budget: u64) -> Result<KfoldSearch> {
    check_n(n)?;
    let dim = 1usize << n;
    if k == 0 || k >= dim {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..{dim} for {n} qubits"
        )));
    }

    struct Search {
        n: usize,
        k: usize,
        words: Vec<usize>,
        used: Vec<bool>,
        nodes: u64,
        budget: u64,
    }

    enum Step {
        Done,
        Exhausted,
        Budget,
    }

    impl Search {
        fn place(&mut self, pos: usize) -> Step {
            if pos == self.words.len() {
                return Step::Done;
            }
            let dim = self.used.len();
            let mut candidates: Vec<usize> = if pos < self.k {
                (0..dim).filter(|&w| !self.used[w]).collect()
            } else {
                let anchor = self.words[pos - self.k];
                (0..self.n)
                    .map(|bit| anchor ^ (1 << bit))
                    .filter(|&w| !self.used[w])
                    .collect()
            };
            candidates.sort_unstable();
            for w in candidates {
                if self.nodes >= self.budget {
                    return Step::Budget;
                }
                self.nodes += 1;
                self.words[pos] = w;
                self.used[w] = true;
                match self.place(pos + 1) {
                    Step::Done => return Step::Done,
                    Step::Budget => return Step::Budget,
                    Step::Exhausted => {}
                }
                self.used[w] = false;
            }
            Step::Exhausted
        }
    }

    let mut s = Search {
        n,
        k,
        words: vec![0; dim],
        used: vec![false; dim],
        nodes: 0,
        budget: node_budget,
    };
    Ok(match s.place(0) {
        Step::Done => KfoldSearch::Found {
            code: Code { n, words: s.words },
            nodes: s.nodes,
        },
        Step::Exhausted => KfoldSearch::Absent { nodes: s.nodes },
        Step::Budget => KfoldSearch::BudgetExhausted { nodes: s.nodes },
    })
}

/// Checks the group-shape property of `G_n` under stride `2^xi`.
pub fn gray_group_shape(n: usize, xi: usize) -> Result<bool> {
    Ok(gray_group_shape_witness(n, xi)?.is_some())
}

/// For each residue class `j ≡ g (mod 2^xi)` of `G_n`, finds a set `F` of
/// `xi` bit positions such that consecutive members differ in exactly one
/// bit outside `F` and in at most one bit inside `F`. Returns the mask of
/// `F` per group, or `None` if some group admits no such set.
pub fn gray_group_shape_witness(n: usize, xi: usize) -> Result<Option<Vec<u64>>> {
    if xi >= n {
        return Err(Error::InvalidArgument(format!(
            "xi = {xi} must be below n = {n}"
        )));
    }
    let code = gray(n)?;
    let stride = 1usize << xi;
    let subsets: Vec<u64> = (0u64..1 << n).filter(|m| m.count_ones() as usize == xi).collect();
    let mut witness = Vec::with_capacity(stride);
    for g in 0..stride {
        let diffs: Vec<u64> = code
            .words
            .iter()
            .skip(g)
            .step_by(stride)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[0] ^ w[1]) as u64)
            .collect();
        let fixed = subsets.iter().copied().find(|&f| {
            diffs
                .iter()
                .all(|&d| (d & !f).count_ones() == 1 && (d & f).count_ones() <= 1)
        });
        match fixed {
            Some(f) => witness.push(f),
            None => return Ok(None),
        }
    }
    Ok(Some(witness))
}

/// First unit-distance code in dictionary order (no seeding).
pub fn first_unit_distance(n: usize, node_budget: u64) -> Result<KfoldSearch> {
    search_kfold(n, 1, node_budget)
}
