//! Single-mode squeezing on the even-photon Gray-coded register: model setup,
//! fidelity references and the fidelity-versus-`r` sweep.
//!
//! The register holds Fock levels `{0, 2, 4, 6}` on two qubits. Since the
//! Hamiltonian is time independent, evolving to time `t` realizes the
//! squeezed state of magnitude `r = t`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{fock_to_statevector, statevector_to_fock, FockEmbedding};
use crate::codes::{gray, Code};
use crate::encoder::{encode_even_b2, squeeze_hamiltonian, EncodedOperator};
use crate::fock::{self, FockState, TruncationConvention};
use crate::pauli::PauliSum;
use crate::sim::Statevector;
use crate::vqs::{
    run_evolution, ExactEvolution, FidelityReference, MvMode, VqsConfig, VqsRun, DEFAULT_DT,
    DEFAULT_SAMPLED_LAMBDA,
};
use crate::{Error, Result};

/// Qubits of the even-photon register.
pub const REGISTER_QUBITS: usize = 2;

#[derive(Clone, Debug)]
pub struct SqueezeModel {
    pub phi: f64,
    pub b2: EncodedOperator,
    pub embedding: FockEmbedding,
    pub hamiltonian: PauliSum,
}

impl SqueezeModel {
    /// Even-photon `b²` on the 2-qubit Gray code with squeezing angle `phi`.
    pub fn even_gray(phi: f64) -> Result<Self> {
        Self::with_code(&gray(REGISTER_QUBITS)?, phi)
    }

    pub fn with_code(code: &Code, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("phi must be finite, got {phi}")));
        }
        let b2 = encode_even_b2(code)?;
        let hamiltonian = squeeze_hamiltonian(&b2.op, phi)?;
        let embedding = FockEmbedding::from(&b2);
        Ok(Self {
            phi,
            b2,
            embedding,
            hamiltonian,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    /// Largest photon number represented.
    pub fn n_max(&self) -> usize {
        self.embedding.fock_dim() - 1
    }

    /// Fock vacuum on the register.
    pub fn vacuum(&self) -> Result<Statevector> {
        Statevector::basis(self.n_qubits(), self.embedding.code.word(0))
    }

    /// `e^{−iHt}|0⟩` of the truncated model.
    pub fn truncated_evolution(&self) -> Result<ExactEvolution> {
        ExactEvolution::new(&self.hamiltonian, &self.vacuum()?)
    }

    /// The analytic squeezed state truncated to `n_max`, in Fock space.
    pub fn squeezed_target(&self, r: f64, convention: TruncationConvention) -> Result<FockState> {
        Ok(fock::exact_squeezed_state_with(r, self.phi, self.n_max(), convention)?.state)
    }

    /// Normalized truncated squeezed state on the register.
    pub fn squeezed_target_qubits(&self, r: f64) -> Result<Statevector> {
        let z = self.squeezed_target(r, TruncationConvention::Normalized)?;
        fock_to_statevector(&z, &self.embedding)
    }

    /// Weight of the full squeezed state inside the truncated space.
    pub fn captured_weight(&self, r: f64) -> Result<f64> {
        Ok(fock::exact_squeezed_state(r, self.phi, self.n_max())?.captured_weight)
    }

    /// `|⟨z|ψ⟩|²` with `ψ` mapped back to Fock space.
    pub fn fidelity_to_squeezed(
        &self,
        r: f64,
        psi: &Statevector,
        convention: TruncationConvention,
    ) -> Result<f64> {
        let z = self.squeezed_target(r, convention)?;
        let f = statevector_to_fock(psi, &self.embedding)?;
        let overlap: Complex64 = z.amps.iter().zip(f.amps.iter()).map(|(a, b)| a.conj() * b).sum();
        Ok(overlap.norm_sqr())
    }
}

/// Fidelity against the truncated analytic squeezed state with `r = t`.
pub struct SqueezedStateReference<'a> {
    pub model: &'a SqueezeModel,
    pub convention: TruncationConvention,
}

impl FidelityReference for SqueezedStateReference<'_> {
    fn fidelity(&self, t: f64, psi: &Statevector) -> Result<f64> {
        self.model.fidelity_to_squeezed(t, psi, self.convention)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSettings {
    pub shots: u64,
    pub seed: u64,
    pub lambda: f64,
}

impl SampledSettings {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            lambda: DEFAULT_SAMPLED_LAMBDA,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub phi: f64,
    pub r_values: Vec<f64>,
    pub n_layers: usize,
    pub dt: f64,
    pub convention: TruncationConvention,
    pub sampled: Option<SampledSettings>,
}

impl SweepConfig {
    /// `n_points` values on `[0, r_max]`, one layer, `Δt = 0.01`, noiseless.
    pub fn grid(phi: f64, r_max: f64, n_points: usize) -> Self {
        Self {
            phi,
            r_values: crate::analysis::linspace(0.0, r_max, n_points),
            n_layers: 1,
            dt: DEFAULT_DT,
            convention: TruncationConvention::Normalized,
            sampled: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    /// `P(r)`: overlap of the normalized truncation with the full state.
    pub captured_weight: f64,
    /// VQS against the exact evolution of the truncated model.
    pub vqs: f64,
    /// VQS against the truncated analytic squeezed state.
    pub vqs_vs_squeezed: f64,
    /// Exact truncated evolution against the truncated analytic state.
    pub evolution_vs_squeezed: f64,
    /// Shot-sampled VQS against the exact truncated evolution.
    pub sampled: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub run: VqsRun,
    pub sampled_run: Option<VqsRun>,
}

impl SweepResult {
    pub fn csv(&self) -> String {
        sweep_csv(&self.rows)
    }

    /// First `r` where the VQS curve falls below the exact truncated
    /// evolution curve by more than `tol` (both measured against the
    /// truncated analytic state).
    pub fn first_dip(&self, tol: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|row| row.evolution_vs_squeezed - row.vqs_vs_squeezed > tol)
            .map(|row| row.r)
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "r,captured_weight,vqs,vqs_vs_squeezed,evolution_vs_squeezed,sampled\n",
    );
    for row in rows {
        write!(
            out,
            "{},{},{},{},{},",
            row.r, row.captured_weight, row.vqs, row.vqs_vs_squeezed, row.evolution_vs_squeezed
        )
        .unwrap();
        if let Some(s) = row.sampled {
            write!(out, "{s}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parameters at time `t`: the Euler iterate, with a fractional final step
/// when `t` falls between grid times.
pub fn theta_at(run: &VqsRun, t: f64) -> Result<Vec<f64>> {
    let dt = run.config.dt;
    let last = run.trajectory.len() - 1;
    let pos = t / dt;
    if t < 0.0 || pos > last as f64 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside the trajectory [0, {}]",
            run.trajectory[last].t
        )));
    }
    let k = (pos + 1e-9).floor().min(last as f64) as usize;
    let frac = (pos - k as f64).max(0.0);
    if k == last || frac < 1e-9 {
        return Ok(run.trajectory[k].theta.clone());
    }
    let (a, b) = (&run.trajectory[k].theta, &run.trajectory[k + 1].theta);
    Ok(a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect())
}

/// Runs the VQS evolution once up to `max(r_values)` and evaluates every
/// fidelity curve at the requested `r`.
pub fn fidelity_sweep(config: &SweepConfig) -> Result<SweepResult> {
    if config.r_values.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument("r values must be finite and >= 0".into()));
    }
    let model = SqueezeModel::even_gray(config.phi)?;
    let psi0 = model.vacuum()?;
    let exact = model.truncated_evolution()?;
    let r_max = config.r_values.iter().copied().fold(0.0, f64::max);
    let t_final = (r_max / config.dt - 1e-9).ceil().max(0.0) * config.dt;

    let mut vqs_config = VqsConfig::analytic(config.n_layers, t_final);
    vqs_config.dt = config.dt;
    let run = run_evolution(&model.hamiltonian, &psi0, &vqs_config, &exact)?;

    let sampled_run = match &config.sampled {
        Some(s) => {
            let cfg = VqsConfig {
                mode: MvMode::CircuitSampled {
                    shots: s.shots,
                    seed: s.seed,
                },
                lambda: s.lambda,
                ..vqs_config.clone()
            };
            Some(run_evolution(&model.hamiltonian, &psi0, &cfg, &exact)?)
        }
        None => None,
    };

    let state_at = |run: &VqsRun, r: f64| -> Result<Statevector> {
        run.ansatz.state(&theta_at(run, r)?, &psi0)
    };
    let rows = config
        .r_values
        .iter()
        .map(|&r| {
            let psi = state_at(&run, r)?;
            let target = exact.state(r);
            let sampled = match &sampled_run {
                Some(sr) => Some(target.inner(&state_at(sr, r)?)?.norm_sqr()),
                None => None,
            };
            Ok(SweepRow {
                r,
                captured_weight: model.captured_weight(r)?,
                vqs: target.inner(&psi)?.norm_sqr(),
                vqs_vs_squeezed: model.fidelity_to_squeezed(r, &psi, config.convention)?,
                evolution_vs_squeezed: model.fidelity_to_squeezed(r, &target, config.convention)?,
                sampled,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        rows,
        run,
        sampled_run,
    })
}

/// The VQS state at squeezing magnitude `r` (noiseless, analytic M/V).
pub fn vqs_state(phi: f64, r: f64, n_layers: usize, dt: f64) -> Result<Statevector> {
    let mut cfg = SweepConfig::grid(phi, r, 1);
    cfg.r_values = vec![r];
    cfg.n_layers = n_layers;
    cfg.dt = dt;
    let result = fidelity_sweep(&cfg)?;
    result
        .run
        .ansatz
        .state(&theta_at(&result.run, r)?, &SqueezeModel::even_gray(phi)?.vacuum()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{propagate, squeeze_hamiltonian as fock_h};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn register_hamiltonian_matches_fock_model() {
        // H on {0,2,4,6} equals the Fock squeezing Hamiltonian restricted to
        // even levels of a space big enough that b² never hits the edge.
        for phi in [0.0, FRAC_PI_2, 0.7] {
            let m = SqueezeModel::even_gray(phi).unwrap();
            assert_eq!(m.n_max(), 6);
            let hq = m.hamiltonian.to_matrix().unwrap();
            let hf = fock_h(phi, 7).unwrap().mat;
            for (i, &ni) in m.embedding.photon_of_index.iter().enumerate() {
                for (j, &nj) in m.embedding.photon_of_index.iter().enumerate() {
                    let a = hq[(m.embedding.code.word(i), m.embedding.code.word(j))];
                    assert!((a - hf[(ni, nj)]).norm() < 1e-12, "phi {phi} ({ni},{nj})");
                }
            }
        }
    }

    #[test]
    fn truncated_evolution_matches_fock_propagator() {
        let m = SqueezeModel::even_gray(FRAC_PI_2).unwrap();
        let exact = m.truncated_evolution().unwrap();
        let h = fock_h(FRAC_PI_2, 7).unwrap();
        for r in [0.3, 1.0, 1.9] {
            let f = propagate(&h, r, &FockState::vacuum(7)).unwrap();
            let q = statevector_to_fock(&exact.state(r), &m.embedding).unwrap();
            assert!((fock::fidelity(&f, &q).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn squeezed_reference_at_zero_is_vacuum() {
        let m = SqueezeModel::even_gray(FRAC_PI_2).unwrap();
        let vac = m.vacuum().unwrap();
        assert_eq!(vac.amps()[0], Complex64::new(1.0, 0.0));
        let reference = SqueezedStateReference {
            model: &m,
            convention: TruncationConvention::Normalized,
        };
        assert!((reference.fidelity(0.0, &vac).unwrap() - 1.0).abs() < 1e-15);
        let target = m.squeezed_target_qubits(0.7).unwrap();
        assert!((m.fidelity_to_squeezed(0.7, &target, TruncationConvention::Normalized).unwrap() - 1.0).abs() < 1e-12);
        // The unnormalized convention scales by the captured weight.
        let un = m.fidelity_to_squeezed(0.7, &target, TruncationConvention::Unnormalized).unwrap();
        assert!((un - m.captured_weight(0.7).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn theta_interpolation_is_a_partial_euler_step() {
        let cfg = SweepConfig::grid(FRAC_PI_2, 0.05, 2);
        let res = fidelity_sweep(&cfg).unwrap();
        assert_eq!(res.run.trajectory.len(), 6);
        let t0 = theta_at(&res.run, 0.02).unwrap();
        assert_eq!(t0, res.run.trajectory[2].theta);
        let mid = theta_at(&res.run, 0.025).unwrap();
        for j in 0..mid.len() {
            let a = res.run.trajectory[2].theta[j];
            let b = res.run.trajectory[3].theta[j];
            assert!((mid[j] - 0.5 * (a + b)).abs() < 1e-15);
        }
        assert!(theta_at(&res.run, 0.06).is_err());
    }

    #[test]
    fn sweep_at_zero_is_perfect() {
        let res = fidelity_sweep(&SweepConfig::grid(FRAC_PI_2, 0.0, 1)).unwrap();
        let row = &res.rows[0];
        assert_eq!(row.r, 0.0);
        for f in [row.captured_weight, row.vqs, row.vqs_vs_squeezed, row.evolution_vs_squeezed] {
            assert!((f - 1.0).abs() < 1e-15);
        }
        assert_eq!(res.csv().lines().count(), 2);
    }

    #[test]
    fn short_sweep_tracks_exact_evolution() {
        let res = fidelity_sweep(&SweepConfig::grid(FRAC_PI_2, 0.5, 6)).unwrap();
        for row in &res.rows {
            assert!(row.vqs > 0.999, "{row:?}");
            assert!(row.captured_weight <= 1.0 && row.captured_weight > 0.99);
        }
        for w in res.rows.windows(2) {
            assert!(w[1].captured_weight <= w[0].captured_weight);
        }
    }

    #[test]
    fn sampled_curve_is_reproducible() {
        let mut cfg = SweepConfig::grid(FRAC_PI_2, 0.1, 3);
        cfg.sampled = Some(SampledSettings::new(2_000, 5));
        let a = fidelity_sweep(&cfg).unwrap();
        let b = fidelity_sweep(&cfg).unwrap();
        assert_eq!(a.csv(), b.csv());
        let s = a.rows.last().unwrap().sampled.unwrap();
        assert!(s > 0.9 && s <= 1.0 + 1e-12);
    }
}
