//! Command-line front end: state construction and I/O, measure
//! computation, protocol runs, random-state sweeps, and classicality
//! checks. All randomness is seeded; reruns with the same arguments
//! produce identical outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nonclassical::error::Error;
use nonclassical::experiment::{run_experiment, rows_to_csv, ExperimentConfig};
use nonclassical::io;
use nonclassical::optimize::OptimizerConfig;
use nonclassical::protocol::{self, system_ancilla_cut};
use nonclassical::quantumness::{self, BoundKind, QuantumnessEstimate};
use nonclassical::sampling::{
    default_m, haar_unitary, EnsembleKind, EnsembleSpec, RngStream,
};
use nonclassical::state::{mutual_information, Bipartition, DensityMatrix, ProductBasis};
use nonclassical::{zoo, Result};

const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_BUDGET_EXHAUSTED: u8 = 3;
const EXIT_RESOURCE_CAP: u8 = 4;

/// Largest total qudit dimension accepted by the sweep command.
const MAX_SWEEP_D: usize = 16;
/// Cap on the environment size m, scaled down as d grows.
const MAX_SWEEP_DM: usize = 4096;

#[derive(Parser)]
#[command(name = "nonclassical", version, about = "Activation of nonclassical correlations into entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    Req,
    Qneg,
    MutualInfo,
    Negativity,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Thm2,
    Thm3,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(clap::Args, Clone, Copy)]
struct OptimizerArgs {
    /// Seed for optimizer restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random restarts.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Objective evaluation budget per restart.
    #[arg(long = "max-evals", default_value_t = 5000)]
    max_evals: usize,
    /// Early-exit objective tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl OptimizerArgs {
    fn to_config(self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_evals_per_restart: self.max_evals,
            objective_tol: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute a correlation measure of a state file.
    Measure {
        state: PathBuf,
        #[arg(value_enum)]
        measure: MeasureKind,
        #[command(flatten)]
        opt: OptimizerArgs,
        /// Use the exhaustive two-qubit grid oracle (exact to ~2e-3).
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the activation protocol against a chosen adversary.
    Activate {
        state: PathBuf,
        /// identity | file:PATH | haar:SEED | worst
        #[arg(long, default_value = "identity")]
        adversary: String,
        #[command(flatten)]
        opt: OptimizerArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a random-state ensemble and write per-sample rows.
    Experiment {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        d: usize,
        /// Environment size; defaults to ceil((log2 d)^4), capped.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
        /// Use the grid oracle for two-qubit samples.
        #[arg(long)]
        grid: bool,
        /// Write 0 into wall_time_s so reruns are byte-identical.
        #[arg(long = "redact-timing")]
        redact_timing: bool,
        /// Size of the worker thread pool (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide whether a state is strictly classically correlated.
    Classify {
        state: PathBuf,
        /// Classicality threshold in bits for the fallback test.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct a named state and write it as a state file.
    MakeState {
        /// bell | maxent:D | classical:P1,P2,.. | werner:P | mix2 |
        /// thm2:D:M:SEED | thm3:D:M:SEED
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn json_matrix(m: &nonclassical::state::CMatrix) -> String {
    let mut s = String::from("[");
    for r in 0..m.nrows() {
        if r > 0 {
            s.push_str(", ");
        }
        s.push('[');
        for c in 0..m.ncols() {
            if c > 0 {
                s.push_str(", ");
            }
            let z = m[(r, c)];
            let _ = write!(s, "[{}, {}]", io::fmt_f64(z.re), io::fmt_f64(z.im));
        }
        s.push(']');
    }
    s.push(']');
    s
}

fn json_basis(basis: &ProductBasis) -> String {
    let mut s = String::from("{\"locals\": [");
    for (i, u) in basis.locals().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&json_matrix(u));
    }
    s.push_str("]}");
    s
}

fn json_f64_list(xs: &[f64]) -> String {
    let mut s = String::from("[");
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&io::fmt_f64(*x));
    }
    s.push(']');
    s
}

fn json_usize_list(xs: &[usize]) -> String {
    let mut s = String::from("[");
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{x}");
    }
    s.push(']');
    s
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_atomic(path, text)
            .map_err(|e| Error::BadStateFile(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ResourceCap(_) => EXIT_RESOURCE_CAP,
        _ => EXIT_INVALID_INPUT,
    }
}

fn first_vs_rest_cut(rho: &DensityMatrix) -> Result<Bipartition> {
    Bipartition::new(&[0], rho.n_subsystems())
}

fn cmd_measure(
    state: &Path,
    measure: MeasureKind,
    opt: OptimizerArgs,
    grid: bool,
    out: Option<&Path>,
) -> Result<u8> {
    let rho = io::read_state(state)?;
    let cfg = opt.to_config();
    let use_grid = grid && rho.dims() == [2, 2];
    let (name, est): (&str, Option<QuantumnessEstimate>) = match measure {
        MeasureKind::Req => (
            "req",
            Some(if use_grid {
                quantumness::req_grid_certified(&rho, 3.0)?
            } else {
                quantumness::req(&rho, &cfg)?
            }),
        ),
        MeasureKind::Qneg => (
            "qneg",
            Some(if use_grid {
                quantumness::negativity_of_quantumness_grid_certified(&rho, 3.0)?
            } else {
                quantumness::negativity_of_quantumness(&rho, &cfg)?
            }),
        ),
        MeasureKind::MutualInfo => ("mutual_info", None),
        MeasureKind::Negativity => ("negativity", None),
    };
    let mut code = 0;
    let text = match est {
        Some(est) => {
            if est.bound_kind == BoundKind::UpperBound && !est.report.converged {
                code = EXIT_BUDGET_EXHAUSTED;
            }
            format!(
                "{{\"measure\": \"{name}\", \"value\": {}, \"bound_kind\": \"{}\", \"best_basis\": {}, \"diagnostics\": {{\"restarts_used\": {}, \"evaluations\": {}, \"converged\": {}}}}}\n",
                io::fmt_f64(est.value),
                est.bound_kind.label(),
                json_basis(&est.best_basis),
                est.report.restarts_used,
                est.report.evaluations,
                est.report.converged,
            )
        }
        None => {
            let cut = first_vs_rest_cut(&rho)?;
            let value = match measure {
                MeasureKind::MutualInfo => mutual_information(&rho, &cut)?,
                MeasureKind::Negativity => protocol::negativity(&rho, &cut)?,
                _ => unreachable!(),
            };
            format!(
                "{{\"measure\": \"{name}\", \"value\": {}, \"bound_kind\": \"exact\", \"best_basis\": null, \"diagnostics\": null}}\n",
                io::fmt_f64(value)
            )
        }
    };
    emit(out, &text)?;
    Ok(code)
}

fn parse_adversary(spec: &str, rho: &DensityMatrix) -> Result<Option<ProductBasis>> {
    if spec == "identity" {
        return Ok(Some(ProductBasis::identity(rho.dims())));
    }
    if spec == "worst" {
        return Ok(None);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return Ok(Some(io::read_basis(Path::new(path))?));
    }
    if let Some(seed) = spec.strip_prefix("haar:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::BadStateFile(format!("bad haar seed in adversary '{spec}'")))?;
        let mut rng = RngStream::new(seed, 0).rng();
        let locals = rho.dims().iter().map(|&d| haar_unitary(d, &mut rng)).collect();
        return Ok(Some(ProductBasis::new(locals)?));
    }
    Err(Error::BadStateFile(format!(
        "adversary must be identity, file:PATH, haar:SEED, or worst, got '{spec}'"
    )))
}

/// Entry threshold below which the full output matrix is embedded in the
/// report instead of a spectral digest.
const MAX_EMBEDDED_ENTRIES: usize = 4096;

fn cmd_activate(state: &Path, adversary: &str, opt: OptimizerArgs, out: Option<&Path>) -> Result<u8> {
    let rho = io::read_state(state)?;
    let mut code = 0;
    let (basis, worst_basis_json) = match parse_adversary(adversary, &rho)? {
        Some(b) => (b, String::from("null")),
        None => {
            let est = quantumness::req(&rho, &opt.to_config())?;
            if !est.report.converged {
                code = EXIT_BUDGET_EXHAUSTED;
            }
            let j = json_basis(&est.best_basis);
            (est.best_basis, j)
        }
    };
    let outcome = protocol::run_activation(&rho, &basis)?;
    let final_dim = outcome.final_state.dim();
    let body = if final_dim * final_dim <= MAX_EMBEDDED_ENTRIES {
        format!(
            "\"final_state\": {{\"dims\": {}, \"matrix\": {}}}",
            json_usize_list(outcome.final_state.dims()),
            json_matrix(outcome.final_state.data())
        )
    } else {
        format!(
            "\"final_state_digest\": {{\"dims\": {}, \"spectrum\": {}}}",
            json_usize_list(outcome.final_state.dims()),
            json_f64_list(&outcome.final_state.eigenvalues())
        )
    };
    let n = rho.n_subsystems();
    let cut = system_ancilla_cut(n);
    let text = format!(
        "{{\"adversary\": \"{adversary}\", \"dims\": {}, \"e_distillable\": {}, \"negativity\": {}, \"negativity_check\": {}, \"minimizing_basis\": {worst_basis_json}, {body}}}\n",
        json_usize_list(rho.dims()),
        io::fmt_f64(outcome.e_distillable),
        io::fmt_f64(outcome.negativity_value),
        io::fmt_f64(protocol::negativity(&outcome.final_state, &cut)?),
    );
    emit(out, &text)?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    kind: KindArg,
    d: usize,
    m: Option<usize>,
    samples: usize,
    opt: OptimizerArgs,
    grid: bool,
    redact_timing: bool,
    threads: Option<usize>,
    format: FormatArg,
    out: &Path,
) -> Result<u8> {
    if d > MAX_SWEEP_D {
        return Err(Error::ResourceCap(format!(
            "d = {d} exceeds the sweep cap {MAX_SWEEP_D}"
        )));
    }
    let m_cap = (MAX_SWEEP_DM / (d * d)).max(1);
    let m = match m {
        Some(m) => {
            if m > m_cap {
                return Err(Error::ResourceCap(format!(
                    "m = {m} exceeds the cap {m_cap} for d = {d}"
                )));
            }
            m
        }
        None => default_m(d)?.clamp(1, m_cap),
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::BadStateFile(format!("thread pool: {e}")))?;
    }
    let spec = EnsembleSpec {
        kind: match kind {
            KindArg::Thm2 => EnsembleKind::SeparableThm2,
            KindArg::Thm3 => EnsembleKind::LowrankThm3,
        },
        d,
        m,
        samples,
        seed: opt.seed,
    };
    let cfg = ExperimentConfig {
        optimizer: opt.to_config(),
        grid,
        redact_timing,
    };
    let rows = run_experiment(&spec, &cfg)?;
    let text = match format {
        FormatArg::Csv => rows_to_csv(&rows),
        FormatArg::Json => {
            let mut s = String::from("[");
            for (i, r) in rows.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(
                    s,
                    "{{\"kind\": \"{}\", \"d\": {}, \"m\": {}, \"sample_index\": {}, \"seed\": {}, \"S_rho\": {}, \"S_dephased_best\": {}, \"Q_estimate\": {}, \"bound_kind\": \"{}\", \"mutual_information\": {}, \"negativity_Q_estimate\": {}, \"wall_time_s\": {}}}",
                    r.kind,
                    r.d,
                    r.m,
                    r.sample_index,
                    r.seed,
                    io::fmt_f64(r.s_rho),
                    io::fmt_f64(r.s_dephased_best),
                    io::fmt_f64(r.q_estimate),
                    r.bound_kind.label(),
                    io::fmt_f64(r.mutual_information),
                    io::fmt_f64(r.negativity_q_estimate),
                    io::fmt_f64(r.wall_time_s),
                );
            }
            s.push_str("]\n");
            s
        }
    };
    io::write_atomic(out, &text)
        .map_err(|e| Error::BadStateFile(format!("{}: {e}", out.display())))?;
    write_manifest(out, opt.seed)?;
    Ok(0)
}

/// RunManifest next to the report: enough to reproduce every row.
fn write_manifest(report_path: &Path, seed: u64) -> Result<()> {
    let argv: Vec<String> = std::env::args().collect();
    let argv_json = {
        let mut s = String::from("[");
        for (i, a) in argv.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{}", serde_json::Value::String(a.clone()));
        }
        s.push(']');
        s
    };
    let digest = io::file_digest(report_path)
        .map_err(|e| Error::BadStateFile(format!("{}: {e}", report_path.display())))?;
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = format!(
        "{{\"command\": \"experiment\", \"argv\": {argv_json}, \"seed\": {seed}, \"version\": \"{}\", \"input_digests\": {{\"report\": \"{digest}\"}}, \"timestamp\": {timestamp}}}\n",
        nonclassical::VERSION
    );
    let manifest_path = report_path.with_extension("manifest.json");
    io::write_atomic(&manifest_path, &text)
        .map_err(|e| Error::BadStateFile(format!("{}: {e}", manifest_path.display())))
}

fn cmd_classify(state: &Path, tol: f64, out: Option<&Path>) -> Result<u8> {
    let rho = io::read_state(state)?;
    let verdict = quantumness::is_classical(&rho, tol)?;
    let cert = match &verdict.certificate {
        Some(b) => json_basis(b),
        None => String::from("null"),
    };
    let text = format!(
        "{{\"is_classical\": {}, \"method\": \"{}\", \"residual\": {}, \"certificate\": {cert}}}\n",
        verdict.is_classical,
        verdict.method.label(),
        io::fmt_f64(verdict.residual),
    );
    emit(out, &text)?;
    Ok(0)
}

fn parse_make_state(kind: &str) -> Result<DensityMatrix> {
    let parts: Vec<&str> = kind.split(':').collect();
    let bad = |msg: &str| Error::BadStateFile(format!("make-state '{kind}': {msg}"));
    match parts[0] {
        "bell" => Ok(zoo::bell()),
        "mix2" => Ok(zoo::mix2()),
        "maxent" => {
            let d: usize = parts
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("expected maxent:D"))?;
            Ok(zoo::maximally_entangled(d)?.to_density())
        }
        "werner" => {
            let p: f64 = parts
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("expected werner:P"))?;
            zoo::werner(2, p)
        }
        "classical" => {
            let probs: Vec<f64> = parts
                .get(1)
                .map(|s| s.split(',').map(|x| x.parse::<f64>()).collect())
                .transpose()
                .ok()
                .flatten()
                .ok_or_else(|| bad("expected classical:P1,P2,.."))?;
            let d = (probs.len() as f64).sqrt().round() as usize;
            if d * d != probs.len() || d < 2 {
                return Err(bad("spectrum length must be a square d*d with d >= 2"));
            }
            zoo::classical_diagonal(&probs, &[d, d])
        }
        "thm2" | "thm3" => {
            let (d, m, seed) = match (parts.get(1), parts.get(2), parts.get(3)) {
                (Some(d), Some(m), Some(s)) => match (d.parse(), m.parse(), s.parse()) {
                    (Ok(d), Ok(m), Ok(s)) => (d, m, s),
                    _ => return Err(bad("expected thmN:D:M:SEED")),
                },
                _ => return Err(bad("expected thmN:D:M:SEED")),
            };
            let spec = EnsembleSpec {
                kind: if parts[0] == "thm2" {
                    EnsembleKind::SeparableThm2
                } else {
                    EnsembleKind::LowrankThm3
                },
                d,
                m,
                samples: 1,
                seed,
            };
            spec.validate()?;
            spec.generate(0)
        }
        _ => Err(bad("unknown kind")),
    }
}

fn cmd_make_state(kind: &str, out: &Path) -> Result<u8> {
    let rho = parse_make_state(kind)?;
    io::write_state(out, &rho)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Measure { state, measure, opt, grid, out } => {
            cmd_measure(&state, measure, opt, grid, out.as_deref())
        }
        Command::Activate { state, adversary, opt, out } => {
            cmd_activate(&state, &adversary, opt, out.as_deref())
        }
        Command::Experiment {
            kind, d, m, samples, opt, grid, redact_timing, threads, format, out,
        } => cmd_experiment(
            kind, d, m, samples, opt, grid, redact_timing, threads, format, &out,
        ),
        Command::Classify { state, tol, out } => cmd_classify(&state, tol, out.as_deref()),
        Command::MakeState { kind, out } => cmd_make_state(&kind, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
