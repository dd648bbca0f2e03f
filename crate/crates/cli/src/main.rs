//! `npcfid`: command-line front end for proxy-fidelity evaluation, layout
//! ranking, oracle comparison and experiment reproduction.
//!
//! Exit codes: 0 success, 1 unreadable input or bad arguments, 2 validation
//! failure, 3 internal error, 4 circuit too large for the oracle.

mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use npcfid::analysis::experiments::{run_experiments, ExperimentConfig, Figure};
use npcfid::analysis::{
    gen_bv_circuit, gen_ghz_circuit, gen_id_circuit, gen_random_circuit, noiseless_calibration,
    rank_layouts, route, sweep_csv, synthetic_calibration, Reference, SweepChannel,
};
use npcfid::calibration::{load_calibration, Calibration};
use npcfid::circuit::{
    parse_json_ir, parse_qasm, serialize_json_ir, validate_with_template, CompiledCircuit,
    SwapTemplate,
};
use npcfid::npc::{self, trace_csv, EvalOptions, QubitScope};
use npcfid::oracle::{
    logical_state_fidelity, per_qubit_state_fidelity, simulate_ideal, simulate_noisy,
    DensityMatrix, IdealRun, OracleConfig, DEFAULT_CAP,
};
use npcfid::parallel::ExecMode;

use error::CliError;

const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");
const RANKING_SCHEMA: &str = include_str!("../schemas/ranking.schema.json");
const COMPARISON_SCHEMA: &str = include_str!("../schemas/comparison.schema.json");

// ---------------------------------------------------------------------------
// Arguments
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "npcfid",
    version,
    about = "Calibration-driven fidelity estimation for compiled quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scope {
    All,
    Measured,
}

impl From<Scope> for QubitScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::All => QubitScope::All,
            Scope::Measured => QubitScope::Measured,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Channel {
    Depolarizing,
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemaName {
    Report,
    Ranking,
    Comparison,
}

#[derive(Debug, Args)]
struct Common {
    /// Qubits whose proxy fidelities enter the circuit product.
    #[arg(long, value_enum, default_value = "all")]
    scope: Scope,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SWAP decomposition template (JSON); defaults to three CZ-based CNOTs.
    #[arg(long)]
    template: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Maximum number of simulated physical qubits.
    #[arg(long, env = "NPCFID_ORACLE_CAP", default_value_t = DEFAULT_CAP)]
    oracle_cap: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Proxy fidelity report for one circuit.
    Eval {
        circuit: PathBuf,
        calibration: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rank the circuits in a directory (ordered by filename) by every metric.
    Rank {
        dir: PathBuf,
        calibration: PathBuf,
        /// Score each circuit with the oracle and report Spearman ρ against
        /// the state-fidelity ranking.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        oracle_args: OracleArgs,
        #[command(flatten)]
        common: Common,
        /// Evaluate circuits one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Proxy fidelity next to the oracle's state fidelity.
    CompareOracle {
        circuit: PathBuf,
        calibration: PathBuf,
        #[command(flatten)]
        oracle_args: OracleArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Negativity and proxy fidelity along a single-channel sweep (CSV).
    Fig5 {
        #[arg(long, value_enum)]
        channel: Channel,
        /// Comma-separated rotation angles in radians.
        #[arg(long, value_delimiter = ',', default_values_t = [std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2])]
        theta: Vec<f64>,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the figure analogues on the synthetic device.
    Experiment {
        /// Output directory for fig*.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of fig5, fig6a, fig6b, fig7, fig8.
        #[arg(long, value_delimiter = ',')]
        figures: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        oracle_args: OracleArgs,
        #[arg(long, default_value_t = 60)]
        random_circuits: usize,
        #[arg(long, default_value_t = 30)]
        bv_circuits: usize,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
        #[arg(long)]
        sequential: bool,
    },
    /// Generate benchmark circuits (JSON IR) or a synthetic calibration.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Print a published JSON schema.
    Schema {
        #[arg(value_enum)]
        name: SchemaName,
    },
}

#[derive(Debug, Args)]
struct Placement {
    /// Route onto the device of this calibration.
    #[arg(long)]
    route_on: Option<PathBuf>,
    /// Comma-separated physical qubits for the logical qubits (with --route-on).
    #[arg(long, value_delimiter = ',')]
    layout: Vec<usize>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    Random {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        placement: Placement,
    },
    Bv {
        #[arg(long)]
        secret: String,
        #[command(flatten)]
        placement: Placement,
    },
    Ghz {
        #[arg(long)]
        qubits: usize,
        #[command(flatten)]
        placement: Placement,
    },
    Id {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        placement: Placement,
    },
    /// Synthetic 8-qubit device calibration.
    Calibration {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// All error rates and durations zero.
        #[arg(long)]
        noiseless: bool,
    },
}

// ---------------------------------------------------------------------------
// Input and output
// ---------------------------------------------------------------------------

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(&path.display().to_string(), e))
}

fn load_circuit(path: &Path) -> Result<CompiledCircuit, CliError> {
    let text = read(path)?;
    let is_json = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => true,
        Some("qasm") => false,
        _ => text.trim_start().starts_with('{'),
    };
    let name = path.display().to_string();
    if is_json {
        parse_json_ir(&text).map_err(|e| CliError::input(&name, e))
    } else {
        parse_qasm(&text).map_err(|e| CliError::input(&name, e))
    }
}

fn load_cal(path: &Path) -> Result<Calibration, CliError> {
    let (cal, report) = load_calibration(&read(path)?)
        .map_err(|e| CliError::input(&path.display().to_string(), e))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cal)
}

fn load_template(path: Option<&Path>) -> Result<SwapTemplate, CliError> {
    match path {
        None => Ok(SwapTemplate::default()),
        Some(p) => SwapTemplate::from_json(&read(p)?)
            .map_err(|e| CliError::input(&p.display().to_string(), e)),
    }
}

fn validate(
    circuit: &CompiledCircuit,
    cal: &Calibration,
    template: &SwapTemplate,
) -> Result<(), CliError> {
    let issues = validate_with_template(circuit, cal, template);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(
            issues.iter().map(ToString::to_string).collect(),
        ))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Internal(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_eval(circuit: &Path, calibration: &Path, common: &Common) -> Result<(), CliError> {
    let c = load_circuit(circuit)?;
    let cal = load_cal(calibration)?;
    let template = load_template(common.template.as_deref())?;
    validate(&c, &cal, &template)?;
    let options = EvalOptions {
        scope: common.scope.into(),
        template,
    };
    let (trajectories, report) = npc::evaluate_detailed(&c, &cal, &options)?;
    let text = match common.format {
        Format::Json => report.to_json(),
        Format::Csv => trace_csv(&trajectories, &report),
    };
    emit(common.out.as_deref(), &text)
}

fn circuit_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::input(&dir.display().to_string(), e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("qasm" | "json")
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_rank(
    dir: &Path,
    calibration: &Path,
    oracle: bool,
    cap: usize,
    common: &Common,
    sequential: bool,
) -> Result<(), CliError> {
    let cal = load_cal(calibration)?;
    let template = load_template(common.template.as_deref())?;
    let files = circuit_files(dir)?;
    if files.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no .qasm or .json circuits",
            dir.display()
        )));
    }
    if files.len() == 1 {
        eprintln!("warning: a single circuit ranks trivially; rank correlations are undefined");
    }
    let circuits = files
        .iter()
        .map(|p| load_circuit(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut issues = Vec::new();
    for (path, c) in files.iter().zip(&circuits) {
        if let Err(CliError::Validation(list)) = validate(c, &cal, &template) {
            issues.extend(list.into_iter().map(|i| format!("{}: {i}", path.display())));
        }
    }
    if !issues.is_empty() {
        return Err(CliError::Validation(issues));
    }
    let ids: Vec<String> = files
        .iter()
        .map(|p| {
            p.file_name()
                .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
        })
        .collect();
    let reference = if oracle {
        Reference::Oracle(OracleConfig {
            cap,
            template: template.clone(),
        })
    } else {
        Reference::None
    };
    let options = EvalOptions {
        scope: common.scope.into(),
        template,
    };
    let mode = if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let result = rank_layouts(&circuits, Some(&ids), &cal, &reference, &options, mode)?;
    if oracle && result.rho_vs_reference.values().any(Option::is_none) {
        eprintln!("warning: some rank correlations are undefined (constant rankings)");
    }
    let text = match common.format {
        Format::Json => to_json(&result),
        Format::Csv => result.to_csv(),
    };
    emit(common.out.as_deref(), &text)
}

#[derive(Debug, Serialize)]
struct QubitComparison {
    logical: usize,
    proxy: f64,
    oracle: f64,
    abs_diff: f64,
}

#[derive(Debug, Serialize)]
struct Comparison {
    proxy_fidelity: f64,
    oracle_fidelity: f64,
    abs_diff: f64,
    active_qubits: usize,
    /// Present when the ideal output is a product state over the logical
    /// qubits (basis states included).
    per_qubit: Option<Vec<QubitComparison>>,
}

fn is_product_output(ideal: &IdealRun) -> Result<bool, CliError> {
    let rho =
        DensityMatrix::from_pure(&ideal.state).map_err(|e| CliError::Internal(e.to_string()))?;
    for &physical in &ideal.final_layout {
        let q = ideal
            .active
            .binary_search(&physical)
            .expect("logical qubits are active");
        let reduced = rho
            .partial_trace(&[q])
            .map_err(|e| CliError::Internal(e.to_string()))?;
        if reduced.purity() < 1.0 - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn cmd_compare_oracle(
    circuit: &Path,
    calibration: &Path,
    cap: usize,
    common: &Common,
) -> Result<(), CliError> {
    let c = load_circuit(circuit)?;
    let cal = load_cal(calibration)?;
    let template = load_template(common.template.as_deref())?;
    validate(&c, &cal, &template)?;
    let options = EvalOptions {
        scope: common.scope.into(),
        template: template.clone(),
    };
    let report = npc::evaluate(&c, &cal, &options)?;
    let cfg = OracleConfig { cap, template };
    let noisy = simulate_noisy(&c, &cal, &cfg)?;
    let ideal = simulate_ideal(&c, &cfg)?;
    let oracle_fidelity = logical_state_fidelity(&noisy, &ideal)?;
    let per_qubit = if is_product_output(&ideal)? {
        let oracle = per_qubit_state_fidelity(&noisy, &ideal)?;
        Some(
            report
                .per_qubit
                .iter()
                .zip(&oracle)
                .enumerate()
                .map(|(logical, (&proxy, &oracle))| QubitComparison {
                    logical,
                    proxy,
                    oracle,
                    abs_diff: (proxy - oracle).abs(),
                })
                .collect(),
        )
    } else {
        None
    };
    let cmp = Comparison {
        proxy_fidelity: report.circuit,
        oracle_fidelity,
        abs_diff: (report.circuit - oracle_fidelity).abs(),
        active_qubits: noisy.active.len(),
        per_qubit,
    };
    let text = match common.format {
        Format::Json => to_json(&cmp),
        Format::Csv => {
            let mut s = String::from("qubit,proxy,oracle,abs_diff\n");
            s.push_str(&format!(
                "circuit,{:.12},{:.12},{:.12}\n",
                cmp.proxy_fidelity, cmp.oracle_fidelity, cmp.abs_diff
            ));
            for q in cmp.per_qubit.iter().flatten() {
                s.push_str(&format!(
                    "{},{:.12},{:.12},{:.12}\n",
                    q.logical, q.proxy, q.oracle, q.abs_diff
                ));
            }
            s
        }
    };
    emit(common.out.as_deref(), &text)
}

fn cmd_fig5(
    channel: Channel,
    thetas: &[f64],
    steps: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let channel = match channel {
        Channel::Depolarizing => SweepChannel::Depolarizing,
        Channel::Thermal => SweepChannel::thermal_default(),
    };
    let mut rows = Vec::new();
    for &theta in thetas {
        rows.extend(npcfid::analysis::fig5_sweep(theta, channel, steps)?);
    }
    emit(out, &sweep_csv(&rows, None))
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    out: &Path,
    figures: &[String],
    seed: u64,
    cap: usize,
    random_circuits: usize,
    bv_circuits: usize,
    repetitions: usize,
    sequential: bool,
) -> Result<(), CliError> {
    let selected: Vec<Figure> = if figures.is_empty() {
        Figure::ALL.to_vec()
    } else {
        figures
            .iter()
            .map(|f| {
                Figure::parse(f).ok_or_else(|| CliError::Input(format!("unknown figure {f:?}")))
            })
            .collect::<Result<_, _>>()?
    };
    let cfg = ExperimentConfig {
        seed,
        oracle: OracleConfig::with_cap(cap),
        mode: if sequential {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        },
        random_circuits,
        bv_circuits,
        ranking_repetitions: repetitions,
        ..ExperimentConfig::default()
    };
    let summary = run_experiments(&cfg, &selected, out)?;
    emit(None, &to_json(&summary))
}

fn place(circuit: CompiledCircuit, placement: &Placement) -> Result<CompiledCircuit, CliError> {
    match &placement.route_on {
        None if placement.layout.is_empty() => Ok(circuit),
        None => Err(CliError::Input("--layout requires --route-on".into())),
        Some(path) => {
            let cal = load_cal(path)?;
            let layout: Vec<usize> = if placement.layout.is_empty() {
                (0..circuit.num_logical).collect()
            } else {
                placement.layout.clone()
            };
            Ok(route(&circuit, &cal, &layout)?)
        }
    }
}

fn cmd_gen(what: &GenCommand, out: Option<&Path>) -> Result<(), CliError> {
    let text = match what {
        GenCommand::Random {
            qubits,
            depth,
            seed,
            placement,
        } => serialize_json_ir(&place(
            gen_random_circuit(*qubits, *depth, *seed)?,
            placement,
        )?),
        GenCommand::Bv { secret, placement } => {
            serialize_json_ir(&place(gen_bv_circuit(secret)?, placement)?)
        }
        GenCommand::Ghz { qubits, placement } => {
            serialize_json_ir(&place(gen_ghz_circuit(*qubits)?, placement)?)
        }
        GenCommand::Id {
            qubits,
            layers,
            seed,
            placement,
        } => serialize_json_ir(&place(gen_id_circuit(*qubits, *layers, *seed)?, placement)?),
        GenCommand::Calibration { seed, noiseless } => {
            if *noiseless {
                noiseless_calibration().to_json()
            } else {
                synthetic_calibration(*seed).to_json()
            }
        }
    };
    emit(out, &text)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval {
            circuit,
            calibration,
            common,
        } => cmd_eval(&circuit, &calibration, &common),
        Command::Rank {
            dir,
            calibration,
            oracle,
            oracle_args,
            common,
            sequential,
        } => cmd_rank(
            &dir,
            &calibration,
            oracle,
            oracle_args.oracle_cap,
            &common,
            sequential,
        ),
        Command::CompareOracle {
            circuit,
            calibration,
            oracle_args,
            common,
        } => cmd_compare_oracle(&circuit, &calibration, oracle_args.oracle_cap, &common),
        Command::Fig5 {
            channel,
            theta,
            steps,
            out,
        } => cmd_fig5(channel, &theta, steps, out.as_deref()),
        Command::Experiment {
            out,
            figures,
            seed,
            oracle_args,
            random_circuits,
            bv_circuits,
            repetitions,
            sequential,
        } => cmd_experiment(
            &out,
            &figures,
            seed,
            oracle_args.oracle_cap,
            random_circuits,
            bv_circuits,
            repetitions,
            sequential,
        ),
        Command::Gen { what, out } => cmd_gen(&what, out.as_deref()),
        Command::Schema { name } => emit(
            None,
            match name {
                SchemaName::Report => REPORT_SCHEMA,
                SchemaName::Ranking => RANKING_SCHEMA,
                SchemaName::Comparison => COMPARISON_SCHEMA,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
