//! `ftflow` command-line front end.
//!
//! Each subcommand reads files or flags, runs one stage of the pipeline and
//! writes a versioned JSON document (`-o -` for stdout, `-o PATH` for a file)
//! or a short human-readable summary.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ftflow_core::canon::{canonicalize, CanonicalForm};
use ftflow_core::circuit::{circuit_metrics, parse_circuit};
use ftflow_core::codes::{build_lookup, code_by_name, monte_carlo_with_workers, NoiseModel};
use ftflow_core::layers::{build_layers, ga_optimize, greedy_optimize, Layering};
use ftflow_core::msd::{brute_force, dp_schedule, greedy_schedule, random_baseline, Catalog, Demand, Objective};
use ftflow_core::oracle::{verify_canonical_form, MAX_ORACLE_QUBITS};
use ftflow_core::resources::{correctable_weight, estimate, RegimeThresholds, Variant, WorkloadProfile};
use serde_json::{json, Value};

pub use config::{load_config, RunConfig, DEFAULT_SEED};

/// Version tag written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the default protocol catalog file.
pub const CATALOG_ENV: &str = "FTFLOW_CATALOG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] ftflow_core::Error),
    #[error("{0}: {1}")]
    Json(String, serde_json::Error),
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ftflow_core::Error as E;
        match self {
            CliError::VerificationFailed => EXIT_VERIFY_FAILED,
            CliError::Core(E::Guard(_) | E::Infeasible(_)) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ftflow", version, about = "Fault-tolerant compilation and resource toolkit")]
struct Cli {
    /// Flat TOML file with shared settings (seed, GA parameters, catalog, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite a Clifford+T circuit as pi/8 rotations followed by a Clifford.
    Transpile {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Reduce the T-depth of a canonical form by merging layers.
    Optimize {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Ga)]
        method: Method,
        /// Starting layering of the pi/8 rotations.
        #[arg(long, value_enum, default_value_t = Start::Sequential)]
        start: Start,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Plan distillation rounds for a magic-state demand.
    Schedule {
        #[arg(long, value_enum, default_value_t = Algo::Dp)]
        algo: Algo,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        /// Weight of tile-time in the balanced objective.
        #[arg(long)]
        weight: Option<f64>,
        /// Magic states required.
        #[arg(short = 'M', long = "states")]
        states: u64,
        /// Raw magic-state error rate.
        #[arg(long, default_value_t = 0.0)]
        p_raw: f64,
        /// Maximum number of rounds searched (default: the demand).
        #[arg(short = 'L', long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Physical-resource estimate for a workload.
    Estimate {
        /// Code distance (default: smallest meeting the target).
        #[arg(long)]
        distance: Option<u32>,
        #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
        variant: VariantArg,
        /// Physical error rate.
        #[arg(long, default_value_t = 1e-4)]
        p: f64,
        #[arg(long)]
        t_count: u64,
        #[arg(long)]
        t_depth: u64,
        /// Error budget per magic state (default: 0.01 / t_count).
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        streaming_ratio: Option<f64>,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Monte Carlo logical failure rate of a lookup decoder.
    Decode {
        #[arg(long, value_enum)]
        code: CodeArg,
        #[arg(long, value_enum, default_value_t = NoiseArg::Bitflip)]
        noise: NoiseArg,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest error weight in the lookup table (default: (d-1)/2).
        #[arg(long)]
        max_weight: Option<usize>,
        /// Worker threads (default: all cores); results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Check a canonical form against its source circuit with dense matrices.
    Verify {
        circuit: PathBuf,
        canonical: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Ga,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Start {
    Sequential,
    Asap,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Brute,
    Dp,
    Greedy,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Tiles,
    Latency,
    Balanced,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    #[value(name = "ancilla_reuse", alias = "ancilla-reuse")]
    AncillaReuse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CodeArg {
    Rep3,
    Rep5,
    Surface3,
    Surface5,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    Bitflip,
    Depolarizing,
}

/// Runs the tool on `argv` (including the program name) and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ftflow: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Transpile { input, output } => transpile(&input, output.as_deref()),
        Command::Optimize {
            input,
            method,
            start,
            beta,
            seed,
            output,
        } => optimize(&cfg, &input, method, start, beta, seed, output.as_deref()),
        Command::Schedule {
            algo,
            objective,
            weight,
            states,
            p_raw,
            max_rounds,
            catalog,
            seed,
            output,
        } => {
            let objective = resolve_objective(&cfg, objective, weight)?;
            let catalog = resolve_catalog(&cfg, catalog.as_deref())?;
            let demand = Demand::new(states, p_raw)?;
            let max_rounds = max_rounds.unwrap_or(states as usize);
            let seed = seed.unwrap_or(cfg.seed);
            let schedule = match algo {
                Algo::Brute => brute_force(&catalog, &demand, max_rounds, objective)?,
                Algo::Dp => dp_schedule(&catalog, &demand, max_rounds, objective)?,
                Algo::Greedy => greedy_schedule(&catalog, &demand)?,
                Algo::Random => random_baseline(&catalog, &demand, seed)?,
            };
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "algo": format!("{algo:?}").to_lowercase(),
                "objective": objective,
                "demand": demand,
                "max_rounds": max_rounds,
                "seed": seed,
                "schedule": schedule,
            });
            let m = &schedule.metrics;
            let summary = format!(
                "rounds: [{}]\ndelivered {} states, tile-time {}, steps {}, peak tiles {}, expected latency {:.3}",
                schedule.rounds.join(", "),
                m.states_delivered,
                m.tile_time,
                m.total_steps,
                m.peak_tiles,
                m.expected_latency
            );
            emit(output.as_deref(), &doc, &summary)
        }
        Command::Estimate {
            distance,
            variant,
            p,
            t_count,
            t_depth,
            target,
            streaming_ratio,
            output,
        } => {
            let w = WorkloadProfile {
                t_count,
                t_depth,
                p_phys: p,
                target_logical_error: target.unwrap_or(0.01 / t_count.max(1) as f64),
            };
            let thresholds = RegimeThresholds {
                streaming_ratio: streaming_ratio
                    .or(cfg.streaming_ratio)
                    .unwrap_or(RegimeThresholds::default().streaming_ratio),
            };
            let variant = match variant {
                VariantArg::Standard => Variant::Standard,
                VariantArg::AncillaReuse => Variant::AncillaReuse,
            };
            let r = estimate(distance, variant, &w, &thresholds)?;
            let mut doc = serde_json::to_value(&r).map_err(|e| CliError::Json("report".into(), e))?;
            doc["schema_version"] = json!(SCHEMA_VERSION);
            doc["workload"] = serde_json::to_value(w).map_err(|e| CliError::Json("workload".into(), e))?;
            let summary = format!(
                "distance {} ({:?}): {} physical qubits, logical error {:.3e} per round\n\
                 protocol {} ({}), {} d^3 per state, output error {:.3e}",
                r.distance,
                r.variant,
                r.physical_qubits,
                r.logical_error_per_round,
                r.recommendation.protocol,
                r.recommendation.regime,
                r.recommendation.cost_per_state_d3,
                r.distilled_output_error
            );
            emit(output.as_deref(), &doc, &summary)
        }
        Command::Decode {
            code,
            noise,
            p,
            shots,
            seed,
            max_weight,
            workers,
            output,
        } => {
            let name = format!("{code:?}").to_lowercase();
            let c = code_by_name(&name)?;
            let max_weight = max_weight.unwrap_or(correctable_weight(c.distance as u32) as usize);
            let dec = build_lookup(&c, max_weight)?;
            let noise = match noise {
                NoiseArg::Bitflip => NoiseModel::Bitflip(p),
                NoiseArg::Depolarizing => NoiseModel::Depolarizing(p),
            };
            let seed = seed.unwrap_or(cfg.seed);
            let workers = workers.unwrap_or_else(rayon_default_workers);
            let r = monte_carlo_with_workers(&c, &dec, noise, shots, seed, workers)?;
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "code": name,
                "noise": noise,
                "max_weight": max_weight,
                "table_entries": dec.len(),
                "result": r,
            });
            let summary = format!(
                "{name}, {noise:?}: {} failures in {} shots, p_L = {:.5} (95% Wilson [{:.5}, {:.5}])",
                r.counts.failures(),
                r.shots,
                r.p_logical,
                r.wilson_95.0,
                r.wilson_95.1
            );
            emit(output.as_deref(), &doc, &summary)
        }
        Command::Verify { circuit, canonical, tol } => {
            verify(&circuit, &canonical, tol.or(cfg.tolerance).unwrap_or(1e-9))
        }
    }
}

fn rayon_default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn read_canonical(path: &Path) -> Result<CanonicalForm> {
    let mut value: Value =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Json(path.display().to_string(), e))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("metrics");
    }
    Ok(CanonicalForm::from_json(value)?)
}

/// Writes `doc` as JSON to stdout (`-`) or a file; prints `summary` otherwise.
fn emit(output: Option<&str>, doc: &Value, summary: &str) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Json("output".into(), e))?;
    match output {
        Some("-") => say(&text),
        Some(path) => {
            std::fs::write(path, text + "\n").map_err(|e| CliError::Io(path.to_string(), e))?;
            say(&format!("{summary}\nwrote {path}"))
        }
        None => say(summary),
    }
}

/// Prints a line to stdout; a closed pipe is not an error.
fn say(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io("stdout".into(), e)),
        _ => Ok(()),
    }
}

fn transpile(input: &Path, output: Option<&str>) -> Result<()> {
    let gc = parse_circuit(&read(input)?)?;
    let cf = canonicalize(&gc)?;
    let metrics = circuit_metrics(&cf.to_rotation_circuit());
    let mut doc = cf.to_json();
    doc["metrics"] = json!({
        "gate_count": gc.gates().len(),
        "t_count": metrics.t_count,
        "naive_t_depth": metrics.naive_t_depth,
        "clifford_rotations": cf.clifford_trace.len(),
    });
    let summary = format!(
        "{} qubits, {} gates -> {} pi/8 rotations (naive T-depth {}), {} Clifford rotations",
        gc.num_qubits(),
        gc.gates().len(),
        metrics.t_count,
        metrics.naive_t_depth,
        cf.clifford_trace.len()
    );
    emit(output, &doc, &summary)
}

fn optimize(
    cfg: &RunConfig,
    input: &Path,
    method: Method,
    start: Start,
    beta: Option<f64>,
    seed: Option<u64>,
    output: Option<&str>,
) -> Result<()> {
    let cf = read_canonical(input)?;
    let ga_cfg = cfg.ga_config(seed, beta)?;
    let asap = build_layers(cf.n, cf.pi8.clone())?;
    let initial = match start {
        Start::Sequential => Layering::sequential(cf.n, cf.pi8.clone())?,
        Start::Asap => asap.clone(),
    };
    let (layering, report) = match method {
        Method::Greedy => {
            let (l, merges) = greedy_optimize(&initial, ga_cfg.beta);
            let report = json!({
                "initial_t_depth": initial.depth(),
                "final_t_depth": l.depth(),
                "rounds": merges.len(),
                "merges_per_round": merges,
            });
            (l, report)
        }
        Method::Ga => {
            let (l, r) = ga_optimize(&initial, &ga_cfg)?;
            (l, serde_json::to_value(r).map_err(|e| CliError::Json("report".into(), e))?)
        }
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "method": format!("{method:?}").to_lowercase(),
        "start": format!("{start:?}").to_lowercase(),
        "asap_t_depth": asap.depth(),
        "report": report,
        "ga_config": if matches!(method, Method::Ga) { json!(ga_cfg) } else { json!({ "beta": ga_cfg.beta }) },
        "layering": layering,
    });
    let summary = format!(
        "T-depth {} -> {} ({} pi/8 rotations, ASAP depth {})",
        initial.depth(),
        layering.depth(),
        cf.t_count(),
        asap.depth()
    );
    emit(output, &doc, &summary)
}

fn verify(circuit: &Path, canonical: &Path, tol: f64) -> Result<()> {
    let gc = parse_circuit(&read(circuit)?)?;
    let cf = read_canonical(canonical)?;
    if gc.num_qubits() > MAX_ORACLE_QUBITS {
        let ok = cf.n == gc.num_qubits() && cf.t_count() == gc.t_count();
        say(&format!(
            "{} qubits exceeds the dense limit of {MAX_ORACLE_QUBITS}; structural check only: {}",
            gc.num_qubits(),
            if ok { "PASS" } else { "FAIL" }
        ))?;
        return if ok { Ok(()) } else { Err(CliError::VerificationFailed) };
    }
    let r = verify_canonical_form(&gc, &cf, tol)?;
    say(&format!(
        "fidelity {:.12} (tol {tol:e}); unitary {}, tableau {}, measurement bases {}: {}",
        r.fidelity,
        ok_word(r.unitary_ok),
        ok_word(r.tableau_ok),
        ok_word(r.bases_ok),
        if r.passed() { "PASS" } else { "FAIL" }
    ))?;
    if r.passed() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "mismatch"
    }
}

fn resolve_objective(cfg: &RunConfig, flag: Option<ObjectiveArg>, weight: Option<f64>) -> Result<Objective> {
    let name = match flag {
        Some(ObjectiveArg::Tiles) => "tiles".to_string(),
        Some(ObjectiveArg::Latency) => "latency".to_string(),
        Some(ObjectiveArg::Balanced) => "balanced".to_string(),
        None => cfg.objective.clone().unwrap_or_else(|| "tiles".into()),
    };
    match name.as_str() {
        "tiles" => Ok(Objective::Tiles),
        "latency" => Ok(Objective::Latency),
        "balanced" => Ok(Objective::Balanced(weight.or(cfg.balance_weight).unwrap_or(0.5))),
        other => Err(CliError::Invalid(format!("unknown objective `{other}`"))),
    }
}

fn resolve_catalog(cfg: &RunConfig, flag: Option<&Path>) -> Result<Catalog> {
    let env = std::env::var_os(CATALOG_ENV).map(PathBuf::from);
    match flag.map(Path::to_path_buf).or_else(|| cfg.catalog.clone()).or(env) {
        Some(path) => Ok(Catalog::from_toml(&read(&path)?)?),
        None => Ok(Catalog::builtin()),
    }
}
