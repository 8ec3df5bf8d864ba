//! Encoding a single truncated bosonic mode onto a qubit register.
//!
//! The crate covers the whole pipeline from operator encoding to state
//! characterization:
//!
//! * [`pauli`]: weighted Pauli strings in symplectic bitmask form.
//! * [`codes`]: permutation codes, Gray codes, k-fold codes and their search.
//! * [`encoder`]: Pauli expansions of `b`, `b^k` and the even-photon `b²`.
//! * [`fock`]: the exact truncated-Fock oracle (ladder matrices, squeezing).
//! * [`sim`]: a dense statevector simulator with Hadamard-test circuits.
//! * [`vqs`]: McLachlan variational time evolution with a Hamiltonian ansatz.
//! * [`squeeze`]: the squeezed-vacuum experiment wired end to end.
//! * [`analysis`]: tomography, Fock-space mapping and Wigner functions.
//! * [`transpile`]: lowering to the `{X2P, X2M, Y2P, Y2M, Rz, CZ}` gate set.

pub mod analysis;
pub mod codes;
pub mod encoder;
mod error;
pub mod fock;
pub mod pauli;
pub mod plot;
pub mod sim;
pub mod squeeze;
pub mod transpile;
pub mod vqs;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version tag written into every serialized artifact.
pub const SCHEMA_VERSION: u32 = 1;
