use bosq::analysis::{reconstruct, statevector_to_fock, tomography_coeffs_exact, DensityMatrix};
use bosq::codes::{code_space_size, unrank};
use bosq::encoder::{encode_b, permutation_matrix};
use bosq::fock::{self, FockOperator, FockState};
use bosq::sim::Statevector;
use bosq::squeeze::SqueezeModel;
use bosq::transpile::{random_circuit, transpile, verify_native};
use bosq::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The even-photon sector `{0, 2, …, 2(m−1)}` of a Fock operator.
fn even_sector(op: &FockOperator, m: usize) -> FockOperator {
    FockOperator::new(DMatrix::from_fn(m, m, |r, col| op.mat[(2 * r, 2 * col)])).unwrap()
}

#[test]
fn register_evolution_matches_fock_propagation() {
    for phi in [0.0, 0.7, std::f64::consts::FRAC_PI_2] {
        let model = SqueezeModel::even_gray(phi).unwrap();
        let evolution = model.truncated_evolution().unwrap();
        let h_even = even_sector(&fock::squeeze_hamiltonian(phi, 2 * 4 - 1).unwrap(), 4);
        for t in [0.0, 0.3, 1.0, 1.63, 2.0] {
            let on_register = statevector_to_fock(&evolution.state(t), &model.embedding).unwrap();
            let in_fock = fock::propagate(&h_even, t, &FockState::vacuum(4)).unwrap();
            for (level, amp) in in_fock.amps.iter().enumerate() {
                let got = on_register.amps[2 * level];
                assert!((got - amp).norm() < 1e-10, "phi={phi} t={t} level {}: {got} vs {amp}", 2 * level);
            }
        }
    }
}

#[test]
fn small_squeezing_matches_the_analytic_state() {
    // For r well below the truncation boundary the register evolution and the
    // analytic squeezed vacuum agree up to the tiny captured-weight loss.
    let model = SqueezeModel::even_gray(0.4).unwrap();
    let psi = model.truncated_evolution().unwrap().state(0.2);
    let f = model
        .fidelity_to_squeezed(0.2, &psi, fock::TruncationConvention::Normalized)
        .unwrap();
    assert!(f > 1.0 - 1e-6, "{f}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoded_b_equals_permuted_fock_matrix(n in 1usize..=4, seed in any::<u64>()) {
        let index = (seed as u128) % code_space_size(n).unwrap();
        let code = unrank(n, index).unwrap();
        let dim = 1usize << n;
        let mut b = DMatrix::zeros(dim, dim);
        for i in 1..dim {
            b[(i - 1, i)] = c((i as f64).sqrt(), 0.0);
        }
        let pi = permutation_matrix(&code);
        let want = &pi * b * pi.adjoint();
        let got = encode_b(&code).unwrap().op.to_matrix().unwrap();
        prop_assert!((got - want).iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn tomography_round_trip(n in 1usize..=3, amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
        let raw: Vec<Complex64> = amps.iter().take(1 << n).map(|&(re, im)| c(re, im)).collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let psi = Statevector::from_amps(raw.iter().map(|a| a / norm).collect()).unwrap();
        let rho = reconstruct(&tomography_coeffs_exact(&psi).unwrap()).unwrap();
        let want = DensityMatrix::from_statevector(&psi);
        prop_assert!((rho.mat - want.mat).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn three_qubit_transpile_is_equivalent(seed in any::<u64>(), len in 0usize..40) {
        let circuit = random_circuit(3, len, seed);
        let native = transpile(3, &circuit).unwrap();
        prop_assert!(verify_native(&circuit, &native, 1e-9).unwrap().equivalent);
    }
}
