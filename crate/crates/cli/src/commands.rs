//! One function per subcommand. Each writes its files through an
//! [`OutputDir`] and finishes with a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use bosq::analysis::{
    self, coefficients_csv, linspace, principal_axes, quadrature_covariance, qubit_to_fock,
    reconstruct, sample_tomography, state_fidelity, tomography_coeffs_exact,
    tomography_coeffs_from_shots, DensityMatrix, WignerGrid,
};
use bosq::codes::{self, Code, KfoldSearch};
use bosq::encoder::{term_count, term_count_histogram, LadderOp};
use bosq::fock::{self, TruncationConvention};
use bosq::plot::{heatmap_svg, line_plot_svg, Series};
use bosq::sim::{Gate, Statevector};
use bosq::squeeze::{fidelity_sweep, vqs_state, SampledSettings, SqueezeModel, SweepConfig};
use bosq::transpile::{lower, transpile as transpile_circuit, verify_native, CircuitFile};
use bosq::Complex64;
use nalgebra::DMatrix;
use serde_json::json;

use crate::{
    CliError, CliResult, CodesArgs, Command, OutputDir, Outcome, TermsweepArgs, TomoArgs,
    TranspileArgs, VqsArgs, WignerArgs,
};

/// `b` → `b¹`, `b3` → `b³`, `even-b2` → even-photon `b²`.
pub fn parse_op(s: &str) -> CliResult<LadderOp> {
    match s {
        "b" => Ok(LadderOp::Power(1)),
        "even-b2" => Ok(LadderOp::EvenB2),
        _ => s
            .strip_prefix('b')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .map(LadderOp::Power)
            .ok_or_else(|| CliError::Usage(format!("unknown operator {s:?} (use b, b2, b3, ..., even-b2)"))),
    }
}

fn words(code: &Code) -> String {
    code.words().iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn codes(args: &CodesArgs, config: &Command, out_dir: &Path) -> CliResult<Outcome> {
    if !args.exhaustive && !args.unit_distance && args.kfold.is_none() {
        return Err(CliError::Usage(
            "codes needs at least one of --exhaustive, --unit-distance, --kfold".into(),
        ));
    }
    if args.list && !args.exhaustive {
        return Err(CliError::Usage("--list requires --exhaustive".into()));
    }
    let op = parse_op(&args.op)?;
    let mut out = OutputDir::create(out_dir)?;
    let mut summary = serde_json::Map::new();
    let mut report = Vec::new();

    if args.exhaustive {
        let hist = term_count_histogram(args.n, op)?;
        let mut csv = String::from("terms,count\n");
        for (terms, count) in &hist {
            writeln!(csv, "{terms},{count}").unwrap();
        }
        out.write("codes_histogram.csv", &csv)?;
        report.push(format!("term-count histogram (n={}, op={}):", args.n, args.op));
        report.extend(hist.iter().map(|(t, c)| format!("  {t} terms: {c} codes")));
        summary.insert("histogram".into(), json!(hist));
        if args.list {
            let total = codes::code_space_size(args.n).expect("n <= 3") as u64;
            let mut csv = String::from("rank,words,terms\n");
            for rank in 0..total {
                let code = codes::unrank(args.n, rank as u128)?;
                let t = term_count(&op.encode(&code)?);
                writeln!(csv, "{rank},{},{t}", words(&code)).unwrap();
            }
            out.write("codes_list.csv", &csv)?;
        }
    }

    if args.unit_distance {
        let count = codes::count_unit_distance(args.n)?;
        out.write("unit_distance.csv", &format!("n,count\n{},{count}\n", args.n))?;
        report.push(format!("unit-distance codes (n={}): {count}", args.n));
        summary.insert("unit_distance".into(), json!(count));
    }

    if let Some(k) = args.kfold {
        match codes::find_kfold(args.n, k, args.budget)? {
            KfoldSearch::Found { code, nodes } => {
                let terms = if k < code.len() {
                    Some(term_count(&LadderOp::Power(k).encode(&code)?))
                } else {
                    None
                };
                let mut csv = String::from("index,word\n");
                for (i, w) in code.words().iter().enumerate() {
                    writeln!(csv, "{i},{w}").unwrap();
                }
                out.write("kfold.csv", &csv)?;
                report.push(format!(
                    "{k}-fold code (n={}) found after {nodes} nodes: {}",
                    args.n,
                    words(&code)
                ));
                summary.insert(
                    "kfold".into(),
                    json!({"k": k, "found": true, "nodes": nodes, "words": code.words(), "terms": terms}),
                );
            }
            KfoldSearch::Absent { nodes } => {
                report.push(format!("no {k}-fold code exists for n={} ({nodes} nodes)", args.n));
                summary.insert("kfold".into(), json!({"k": k, "found": false, "nodes": nodes}));
            }
            KfoldSearch::BudgetExhausted { nodes } => {
                return Err(CliError::Budget(format!(
                    "{k}-fold search for n={} exhausted its budget of {} nodes ({nodes} visited)",
                    args.n, args.budget
                )));
            }
        }
    }
    out.finish(config, serde_json::Value::Object(summary), report)
}

/// Code families compared in the term sweep.
pub const FAMILIES: [&str; 5] = ["binary", "C5", "gray", "D0", "kfold"];

/// Term count of `b^k` for one family at `n` qubits; `None` when the family
/// has no member (too few codes, `k` beyond the space, or a search that
/// found nothing within budget).
pub fn family_terms(family: &str, n: usize, k: usize, budget: u64) -> CliResult<Option<usize>> {
    if k >= 1usize << n {
        return Ok(None);
    }
    let code = match family {
        "binary" => Some(Code::binary(n)?),
        "C5" => match codes::code_space_size(n) {
            Some(size) if size <= 5 => None,
            _ => Some(codes::unrank(n, 5)?),
        },
        "gray" => Some(codes::gray(n)?),
        "D0" => codes::first_unit_distance(n, budget)?.code().cloned(),
        "kfold" => codes::find_kfold(n, k, budget)?.code().cloned(),
        other => return Err(CliError::Usage(format!("unknown family {other}"))),
    };
    match code {
        Some(c) => Ok(Some(term_count(&LadderOp::Power(k).encode(&c)?))),
        None => Ok(None),
    }
}

pub fn termsweep(args: &TermsweepArgs, config: &Command, out_dir: &Path) -> CliResult<Outcome> {
    if args.k == 0 || args.n_min == 0 || args.n_min > args.n_max || args.n_max > 9 {
        return Err(CliError::Usage(format!(
            "need k >= 1 and 1 <= n_min <= n_max <= 9, got k={} n={}..{}",
            args.k, args.n_min, args.n_max
        )));
    }
    let mut out = OutputDir::create(out_dir)?;
    let mut csv = String::from("n,code_label,terms\n");
    let mut table: BTreeMap<&str, Vec<(usize, Option<usize>)>> = BTreeMap::new();
    for n in args.n_min..=args.n_max {
        for fam in FAMILIES {
            let terms = family_terms(fam, n, args.k, args.budget)?;
            let cell = terms.map(|t| t.to_string()).unwrap_or_default();
            writeln!(csv, "{n},{fam},{cell}").unwrap();
            table.entry(fam).or_default().push((n, terms));
        }
    }
    out.write("termsweep.csv", &csv)?;
    if args.svg {
        let series: Vec<Series> = FAMILIES
            .iter()
            .map(|fam| {
                let pts = table[fam]
                    .iter()
                    .map(|&(n, t)| (n as f64, t.map_or(f64::NAN, |t| t as f64)))
                    .collect();
                Series::new(fam, pts)
            })
            .collect();
        let svg = line_plot_svg(
            &format!("Terms of encoded b^{}", args.k),
            "qubits n",
            "Pauli terms",
            &series,
            &[],
        );
        out.write("termsweep.svg", &svg)?;
    }
    let report = vec![format!(
        "term sweep for b^{} over n = {}..={} written",
        args.k, args.n_min, args.n_max
    )];
    let summary = json!(table
        .iter()
        .map(|(fam, rows)| (fam.to_string(), rows.iter().map(|r| r.1).collect::<Vec<_>>()))
        .collect::<BTreeMap<_, _>>());
    out.finish(config, summary, report)
}

fn convention(s: &str) -> TruncationConvention {
    if s == "unnormalized" {
        TruncationConvention::Unnormalized
    } else {
        TruncationConvention::Normalized
    }
}

pub fn vqs(args: &VqsArgs, config: &Command, out_dir: &Path) -> CliResult<Outcome> {
    if args.points == 0 || !(args.r_max >= 0.0) || !(args.dt > 0.0) || args.layers == 0 {
        return Err(CliError::Usage("need points >= 1, r_max >= 0, dt > 0, layers >= 1".into()));
    }
    let mut sweep = SweepConfig::grid(args.phi, args.r_max, args.points);
    sweep.n_layers = args.layers;
    sweep.dt = args.dt;
    sweep.convention = convention(&args.convention);
    sweep.sampled = args.shots.map(|shots| SampledSettings {
        lambda: args.lambda,
        ..SampledSettings::new(shots, args.seed)
    });
    let result = fidelity_sweep(&sweep)?;

    let mut out = OutputDir::create(out_dir)?;
    out.write("vqs_fidelity.csv", &result.csv())?;
    out.write("vqs_trajectory.csv", &result.run.trajectory_csv())?;
    if let Some(run) = &result.sampled_run {
        out.write("vqs_trajectory_sampled.csv", &run.trajectory_csv())?;
    }
    let model = SqueezeModel::even_gray(args.phi)?;
    let r0 = fock::truncation_boundary(model.n_max() as f64);
    if args.svg {
        let col = |f: fn(&bosq::squeeze::SweepRow) -> f64| -> Vec<(f64, f64)> {
            result.rows.iter().map(|row| (row.r, f(row))).collect()
        };
        let mut series = vec![
            Series {
                dashed: true,
                ..Series::new("truncated exact P(r)", col(|r| r.captured_weight))
            },
            Series::new("VQS", col(|r| r.vqs)),
            Series::new("VQS vs truncated |z>", col(|r| r.vqs_vs_squeezed)),
            Series::new("exact evolution vs |z>", col(|r| r.evolution_vs_squeezed)),
        ];
        if result.sampled_run.is_some() {
            series.push(Series::new("sampled VQS", col(|r| r.sampled.unwrap_or(f64::NAN))));
        }
        let svg = line_plot_svg("Fidelity vs r", "r = |z|", "fidelity", &series, &[(r0, "r0")]);
        out.write("vqs_fidelity.svg", &svg)?;
    }
    let min_on = |hi: f64| {
        result
            .rows
            .iter()
            .filter(|row| row.r <= hi + 1e-12)
            .map(|row| row.vqs)
            .fold(f64::INFINITY, f64::min)
    };
    let dip = result.first_dip(1e-4);
    let summary = json!({
        "r0": r0,
        "min_vqs_r_le_1": min_on(1.0),
        "min_vqs_r_le_r0": min_on(r0),
        "first_dip": dip,
        "steps": result.run.trajectory.len() - 1,
    });
    let report = vec![
        format!("min F(VQS) on [0, 1]: {:.6}", min_on(1.0)),
        format!("min F(VQS) on [0, r0={r0:.4}]: {:.6}", min_on(r0)),
        format!("first dip below exact evolution: {dip:?}"),
    ];
    out.finish(config, summary, report)
}

/// Tomography of the VQS state at `r`: measured coefficients and the linear
/// inversion estimate.
fn measure_state(
    psi: &Statevector,
    shots: u64,
    seed: u64,
) -> CliResult<(analysis::PauliCoefficients, DensityMatrix)> {
    let data = sample_tomography(psi, shots, seed)?;
    let coeffs = tomography_coeffs_from_shots(psi.n_qubits(), &data)?;
    let rho = reconstruct(&coeffs)?;
    Ok((coeffs, rho))
}

pub fn tomo(args: &TomoArgs, config: &Command, out_dir: &Path) -> CliResult<Outcome> {
    if args.shots == 0 {
        return Err(CliError::Usage("tomography needs --shots > 0".into()));
    }
    let model = SqueezeModel::even_gray(args.phi)?;
    let psi = vqs_state(args.phi, args.r, args.layers, args.dt)?;
    let exact = tomography_coeffs_exact(&psi)?;
    let (measured, rho) = measure_state(&psi, args.shots, args.seed)?;
    let target = model.squeezed_target_qubits(args.r)?;
    let fid = state_fidelity(&rho, &target)?;
    let fid_vqs = state_fidelity(&rho, &psi)?;
    let psd = rho.psd_project();
    let fid_psd = state_fidelity(&psd, &target)?;

    let mut out = OutputDir::create(out_dir)?;
    out.write("tomo_coefficients.csv", &coefficients_csv(&measured, &exact))?;
    out.write_json("tomo_rho.json", &rho.to_json())?;
    out.write_json("tomo_rho_psd.json", &psd.to_json())?;
    let summary = json!({
        "fidelity_vs_squeezed": fid,
        "fidelity_vs_vqs_state": fid_vqs,
        "fidelity_psd_vs_squeezed": fid_psd,
        "min_eigenvalue": rho.eigenvalues()[0],
    });
    let report = vec![
        format!("tr(rho |z><z|) = {fid:.6}"),
        format!("tr(rho |psi_vqs><psi_vqs|) = {fid_vqs:.6}"),
    ];
    out.finish(config, summary, report)
}

fn panel_summary(g: &WignerGrid, rho_f: &DMatrix<Complex64>) -> CliResult<serde_json::Value> {
    let cov = quadrature_covariance(rho_f)?;
    let (lo, hi, angle) = principal_axes(&cov);
    let w00 = analysis::wigner(rho_f, &[0.0], &[0.0])?.w[0][0];
    Ok(json!({
        "w_origin": w00,
        "min": g.min(),
        "max": g.max(),
        "integral": g.integral(),
        "purity": g.purity(),
        "min_variance": lo,
        "max_variance": hi,
        "squeezed_axis_deg": angle.to_degrees(),
    }))
}

pub fn wigner(args: &WignerArgs, config: &Command, out_dir: &Path) -> CliResult<Outcome> {
    if args.grid < 2 || !(args.extent > 0.0) {
        return Err(CliError::Usage("need --grid >= 2 and --extent > 0".into()));
    }
    let model = SqueezeModel::even_gray(args.phi)?;
    let psi = vqs_state(args.phi, args.r, args.layers, args.dt)?;
    let rho_q = if args.shots > 0 {
        measure_state(&psi, args.shots, args.seed)?.1
    } else {
        DensityMatrix::from_statevector(&psi)
    };
    let panels = [
        ("reconstructed", qubit_to_fock(&rho_q, &model.embedding)?),
        (
            "truncated",
            fock::exact_squeezed_state(args.r, args.phi, model.n_max())?.state.density_matrix(),
        ),
        (
            "full",
            fock::full_squeezed_state(args.r, args.phi, fock::FULL_REFERENCE_DIM)?.density_matrix(),
        ),
    ];
    let axis = linspace(-args.extent, args.extent, args.grid);
    let mut out = OutputDir::create(out_dir)?;
    let mut summary = serde_json::Map::new();
    let mut report = Vec::new();
    for (name, rho_f) in &panels {
        let g = analysis::wigner(rho_f, &axis, &axis)?;
        out.write(&format!("wigner_{name}.csv"), &g.to_csv())?;
        let title = format!("W(x,p): {name}, r = {}", args.r);
        out.write(&format!("wigner_{name}.svg"), &heatmap_svg(&g, &title))?;
        let s = panel_summary(&g, rho_f)?;
        report.push(format!(
            "{name}: W(0,0)={:.6} min={:.3e} integral={:.6} min variance={:.6}",
            s["w_origin"].as_f64().unwrap_or(f64::NAN),
            g.min(),
            g.integral(),
            s["min_variance"].as_f64().unwrap_or(f64::NAN)
        ));
        summary.insert(name.to_string(), s);
    }
    out.finish(config, serde_json::Value::Object(summary), report)
}

/// Reads a circuit file; a gate whose `kind` is not a known gate is
/// reported as unsupported rather than as malformed input.
pub fn parse_circuit(text: &str) -> CliResult<CircuitFile> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(gates) = value.get("gates").and_then(|g| g.as_array()) {
        for gate in gates {
            if serde_json::from_value::<Gate>(gate.clone()).is_err() {
                let kind = gate.get("kind").and_then(|k| k.as_str()).unwrap_or_default();
                if !GATE_KINDS.contains(&kind) {
                    return Err(bosq::Error::UnsupportedGate(format!("{kind:?}")).into());
                }
            }
        }
    }
    Ok(serde_json::from_value(value)?)
}

const GATE_KINDS: [&str; 12] = [
    "RX",
    "RY",
    "RZ",
    "H",
    "X",
    "Y",
    "Z",
    "CZ",
    "CNOT",
    "PAULI_EXP",
    "CONTROLLED_PAULI",
    "ANTI_CONTROLLED_PAULI",
];

pub fn transpile(args: &TranspileArgs, config: &Command, out_dir: &Path) -> CliResult<Outcome> {
    let text = std::fs::read_to_string(&args.input).map_err(|source| CliError::Io {
        path: args.input.clone(),
        source,
    })?;
    let file = parse_circuit(&text)?;
    if file.schema_version != bosq::SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "unsupported circuit schema_version {}",
            file.schema_version
        )));
    }
    let (gates, phase) = if args.lower {
        lower(&file.gates)?
    } else {
        (file.gates.clone(), 0.0)
    };
    let mut native = transpile_circuit(file.n_qubits, &gates)?;
    native.global_phase = wrap(native.global_phase + phase);
    let eq = verify_native(&file.gates, &native, args.tol)?;

    let mut out = OutputDir::create(out_dir)?;
    out.write("transpiled.jsonl", &native.to_jsonl())?;
    let counts: BTreeMap<&str, usize> = ["X2P", "X2M", "Y2P", "Y2M", "RZ", "CZ"]
        .into_iter()
        .map(|k| (k, native.count(k)))
        .collect();
    let report_json = json!({
        "schema_version": bosq::SCHEMA_VERSION,
        "equivalent": eq.equivalent,
        "deviation": eq.deviation,
        "global_phase": native.global_phase,
        "source_gates": file.gates.len(),
        "native_gates": native.gates.len(),
        "counts": counts,
    });
    out.write_json("transpile_report.json", &report_json)?;
    if !eq.equivalent {
        return Err(CliError::Core(bosq::Error::InvalidArgument(format!(
            "transpiled circuit deviates by {:.3e} (> {})",
            eq.deviation, args.tol
        ))));
    }
    let report = vec![
        format!(
            "{} source gates -> {} native gates, deviation {:.3e}, global phase {:.6}",
            file.gates.len(),
            native.gates.len(),
            eq.deviation,
            native.global_phase
        ),
    ];
    out.finish(config, report_json, report)
}

fn wrap(phi: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let w = phi.rem_euclid(2.0 * pi);
    if w > pi {
        w - 2.0 * pi
    } else {
        w + 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_kind_list_matches_the_gate_enum() {
        let p = bosq::pauli::PauliTerm::from_label("XZ").unwrap();
        let gates = [
            Gate::Rx { qubit: 0, theta: 0.1 },
            Gate::Ry { qubit: 0, theta: 0.1 },
            Gate::Rz { qubit: 0, theta: 0.1 },
            Gate::H { qubit: 0 },
            Gate::X { qubit: 0 },
            Gate::Y { qubit: 0 },
            Gate::Z { qubit: 0 },
            Gate::Cz { a: 0, b: 1 },
            Gate::Cnot { control: 0, target: 1 },
            Gate::PauliExp { pauli: p, theta: 0.1 },
            Gate::ControlledPauli { control: 2, pauli: p },
            Gate::AntiControlledPauli { control: 2, pauli: p },
        ];
        for (g, kind) in gates.iter().zip(GATE_KINDS) {
            assert_eq!(serde_json::to_value(g).unwrap()["kind"], kind);
        }
    }

    #[test]
    fn ops() {
        assert_eq!(parse_op("b").unwrap(), LadderOp::Power(1));
        assert_eq!(parse_op("b3").unwrap(), LadderOp::Power(3));
        assert_eq!(parse_op("even-b2").unwrap(), LadderOp::EvenB2);
        assert!(parse_op("b0").is_err());
        assert!(parse_op("c").is_err());
    }
}
