//! The `bosq` command line: each subcommand runs one experiment, writes its
//! results (CSV / JSON / JSON lines / SVG) into an output directory and
//! records a manifest from which `bosq replay` reproduces the run.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub mod commands;

/// Default output directory when neither `--out-dir` nor the environment
/// variable is set.
pub const DEFAULT_OUT_DIR: &str = "bosq-out";
pub const OUT_DIR_ENV: &str = "BOSQ_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_UNSUPPORTED: i32 = 5;

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  1  file I/O error
  2  invalid arguments or input
  3  search budget exhausted
  4  non-finite dynamics
  5  unsupported gate";

#[derive(Debug, Parser)]
#[command(name = "bosq", version, about = "Bosonic Fock-space encodings on qubit registers", after_help = EXIT_HELP)]
pub struct Cli {
    /// Directory for result files and manifests.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Term counts of encoded ladder operators; unit-distance and k-fold searches.
    Codes(CodesArgs),
    /// Term counts of b^k across code families for a range of register sizes.
    Termsweep(TermsweepArgs),
    /// Variational squeezing simulation and the fidelity-versus-r sweep.
    Vqs(VqsArgs),
    /// Shot-based two-qubit tomography of the variational squeezed state.
    Tomo(TomoArgs),
    /// Wigner functions of the reconstructed, truncated and full squeezed states.
    Wigner(WignerArgs),
    /// Rewrite a circuit into the native gate set and check equivalence.
    Transpile(TranspileArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Codes(_) => "codes",
            Command::Termsweep(_) => "termsweep",
            Command::Vqs(_) => "vqs",
            Command::Tomo(_) => "tomo",
            Command::Wigner(_) => "wigner",
            Command::Transpile(_) => "transpile",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CodesArgs {
    /// Register size in qubits.
    #[arg(long)]
    pub n: usize,
    /// Encoded operator: b, b2, b3, ... or even-b2.
    #[arg(long, default_value = "b")]
    pub op: String,
    /// Enumerate every code (n <= 3) and write the term-count histogram.
    #[arg(long)]
    pub exhaustive: bool,
    /// With --exhaustive, also write one row per code.
    #[arg(long)]
    pub list: bool,
    /// Count unit-distance codes.
    #[arg(long)]
    pub unit_distance: bool,
    /// Search for a k-fold code.
    #[arg(long)]
    pub kfold: Option<usize>,
    /// Node budget of the k-fold search.
    #[arg(long, default_value_t = 5_000_000)]
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TermsweepArgs {
    /// Ladder power (b^k) and fold of the k-fold family.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Node budget for each k-fold and unit-distance search.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: u64,
    /// Also write an SVG line plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct VqsArgs {
    /// Squeezing angle (number, `pi`, `pi/2`, `-pi/4`, ...).
    #[arg(long, default_value = "pi/2", value_parser = parse_angle)]
    pub phi: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r_max: f64,
    /// Number of r values on [0, r_max].
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Add a shot-sampled VQS curve with this many shots per circuit.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Tikhonov regularization of the sampled run.
    #[arg(long, default_value_t = 1e-6)]
    pub lambda: f64,
    /// Normalization of the truncated analytic reference state.
    #[arg(long, default_value = "normalized", value_parser = parse_convention)]
    pub convention: String,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TomoArgs {
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle)]
    pub phi: f64,
    /// Shots per measurement basis.
    #[arg(long, default_value_t = 50_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct WignerArgs {
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle)]
    pub phi: f64,
    /// Shots per basis for the reconstructed panel; 0 uses the exact state.
    #[arg(long, default_value_t = 50_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 121)]
    pub grid: usize,
    /// Half-width of the square phase-space window.
    #[arg(long, default_value_t = 4.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TranspileArgs {
    /// Circuit JSON: {"schema_version": 1, "n_qubits": n, "gates": [...]}.
    #[arg(long)]
    pub input: PathBuf,
    /// Rewrite Pauli exponentials and controlled Paulis before transpiling.
    #[arg(long)]
    pub lower: bool,
    /// Equivalence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `*_manifest.json` written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
}

pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(format!("angle must be finite: {s}")) };
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.as_str()),
    };
    let pi = std::f64::consts::PI;
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| format!("bad angle: {s}"))?),
        None => (body, 1.0),
    };
    let mult = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(m) => m.trim_end_matches('*').parse::<f64>().map_err(|_| format!("bad angle: {s}"))?,
        None => return Err(format!("bad angle: {s}")),
    };
    if den == 0.0 {
        return Err(format!("bad angle: {s}"));
    }
    Ok(sign * mult * pi / den)
}

fn parse_convention(s: &str) -> Result<String, String> {
    match s {
        "normalized" | "unnormalized" => Ok(s.to_string()),
        _ => Err(format!("convention must be normalized or unnormalized, got {s}")),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Budget(String),
    #[error(transparent)]
    Core(#[from] bosq::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bosq::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Core(e) => match e {
                E::NonFinite { .. } => EXIT_NUMERIC,
                E::UnsupportedGate(_) => EXIT_UNSUPPORTED,
                E::Io(_) => EXIT_OTHER,
                _ => EXIT_USAGE,
            },
            CliError::Io { .. } => EXIT_OTHER,
            CliError::Json(_) => EXIT_USAGE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command produced: files written (relative to the output
/// directory) and a short report for the terminal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<String>,
    pub report: Vec<String>,
}

/// Everything needed to re-run a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: Command,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

/// Collects output files for one command run.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `<command>_manifest.json` and returns the outcome.
    pub fn finish(
        mut self,
        config: &Command,
        summary: serde_json::Value,
        report: Vec<String>,
    ) -> CliResult<Outcome> {
        let name = format!("{}_manifest.json", config.name());
        let manifest = Manifest {
            schema_version: bosq::SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            outputs: self.files.clone(),
            summary,
        };
        self.write_json(&name, &manifest)?;
        Ok(Outcome {
            files: self.files,
            report,
        })
    }
}

/// Runs one command into `out_dir`.
pub fn run(command: &Command, out_dir: &Path) -> CliResult<Outcome> {
    match command {
        Command::Codes(a) => commands::codes(a, command, out_dir),
        Command::Termsweep(a) => commands::termsweep(a, command, out_dir),
        Command::Vqs(a) => commands::vqs(a, command, out_dir),
        Command::Tomo(a) => commands::tomo(a, command, out_dir),
        Command::Wigner(a) => commands::wigner(a, command, out_dir),
        Command::Transpile(a) => commands::transpile(a, command, out_dir),
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.manifest).map_err(|source| CliError::Io {
                path: a.manifest.clone(),
                source,
            })?;
            let manifest: Manifest = serde_json::from_str(&text)?;
            if manifest.schema_version != bosq::SCHEMA_VERSION {
                return Err(CliError::Usage(format!(
                    "unsupported manifest schema_version {}",
                    manifest.schema_version
                )));
            }
            run(&manifest.config, out_dir)
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code. Reports go to stdout, errors to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command, &cli.out_dir) {
        Ok(outcome) => {
            for line in &outcome.report {
                println!("{line}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
