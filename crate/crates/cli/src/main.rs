//! Command line front end. Structured results go to stdout as JSON;
//! per-trial and per-n series can additionally be written as CSV.
//!
//! Exit codes: 0 success, 1 validation error, 2 retry cap exceeded,
//! 3 I/O error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use qsprep_core::bounds::{self, SampleCase};
use qsprep_core::cascade::{self, ScalingExperiment};
use qsprep_core::circuit::{
    build_complex_circuit, build_concat_circuit, build_full_network, depth_lower_bound,
    GroupingSchedule,
};
use qsprep_core::encoding::{parse_vector_file, resize, uniform_vector, AmplitudeVector};
use qsprep_core::prep::{self, C0Policy, Engine, Mode, PPlusModel, PrepConfig};
use qsprep_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "qsprep", version, about = "Low-depth probabilistic state preparation toolkit")]
struct Cli {
    /// Cap on worker threads (default: QSPREP_THREADS, else all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit the metadata block so identical runs print identical bytes
    #[arg(long, global = true)]
    no_meta: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one preparation instance and report its cost counters
    Prepare(PrepareArgs),
    /// Runtime scaling experiment over a range of cascade sizes
    Runtime(RuntimeArgs),
    /// Runtime exponent as a function of the qubit-count exponent
    Tradeoff(TradeoffArgs),
    /// Empirical checks of the probability and cutoff lower bounds
    Bounds(BoundsArgs),
    /// Print a circuit in the text format
    Emit(EmitArgs),
    /// Backward light cone of one qubit under a grouping schedule
    Lightcone(LightconeArgs),
    /// Measured cost counters next to the claimed asymptotic entries
    Table1(Table1Args),
}

#[derive(Args, Serialize)]
struct PrepareArgs {
    /// seq | para | gpara | tradeoff
    #[arg(long, default_value = "seq")]
    mode: String,
    /// Data qubit count; the vector has 2^n entries
    #[arg(long)]
    n: Option<usize>,
    /// const:<k> | power:<beta_q> | supra
    #[arg(long, default_value = "const:1")]
    c0: String,
    /// Tradeoff leaf size in qubits
    #[arg(long, default_value_t = 1)]
    nu: usize,
    /// exact | cascade
    #[arg(long, default_value = "exact")]
    engine: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vector file, one `re im` pair per line; default is the uniform vector
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000_000)]
    retry_cap: u64,
}

#[derive(Args, Serialize)]
struct RuntimeArgs {
    #[arg(long, default_value = "const:1")]
    c0: String,
    /// half | analytic | fixed:<p>
    #[arg(long, default_value = "half")]
    pplus: String,
    /// seq | para | gpara | tradeoff
    #[arg(long, default_value = "para")]
    mode: String,
    #[arg(long)]
    nmin: usize,
    #[arg(long)]
    nmax: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-n series (n, N, mean_tstp, std_tstp) here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TradeoffArgs {
    /// Comma-separated qubit-count exponents beta_q
    #[arg(long, default_value = "1.0,1.2,1.4,1.6,1.8")]
    betaq: String,
    #[arg(long, default_value = "half")]
    pplus: String,
    #[arg(long, default_value_t = 4)]
    nmin: usize,
    #[arg(long, default_value_t = 10)]
    nmax: usize,
    #[arg(long, default_value_t = 400)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[command(subcommand)]
    #[serde(skip)]
    action: Option<BoundsAction>,
    /// 4 (projection probability) or 5 (cutoff guarantee)
    #[arg(long)]
    result: Option<u8>,
    /// Sampling model: 1 uniform modulus, 2 Gaussian
    #[arg(long, default_value_t = 1)]
    case: u8,
    /// Data dimension N
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    epsth: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial dump destination
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum BoundsAction {
    /// Product lower bound on whole-tree pass success, per cascade size
    Hoeffding {
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
}

#[derive(Args, Serialize)]
struct EmitArgs {
    /// concat | complex | full-seq | full-para
    #[arg(long)]
    what: String,
    #[arg(long)]
    n: usize,
    /// Expand to single-qubit and cnot gates first
    #[arg(long)]
    decompose: bool,
    /// Leaf copies for full-para
    #[arg(long, default_value_t = 2)]
    copies: usize,
    /// Destination file; default stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct LightconeArgs {
    /// Schedule file: one layer per line, groups `;`-separated
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    qubit: usize,
}

#[derive(Args, Serialize)]
struct Table1Args {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum CliError {
    Core(CoreError),
    Io(std::io::Error),
    Invalid(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::RetryCapExceeded { .. }) => 2,
            CliError::Core(_) | CliError::Invalid(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
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
    if let Err(e) = setup_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn setup_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("QSPREP_THREADS") {
            Ok(s) => Some(
                s.parse::<usize>()
                    .map_err(|_| invalid(format!("QSPREP_THREADS is not a number: {s:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(invalid("thread cap must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Prepare(a) => cmd_prepare(cli, a),
        Cmd::Runtime(a) => cmd_runtime(cli, a),
        Cmd::Tradeoff(a) => cmd_tradeoff(cli, a),
        Cmd::Bounds(a) => cmd_bounds(cli, a),
        Cmd::Emit(a) => cmd_emit(a),
        Cmd::Lightcone(a) => cmd_lightcone(cli, a),
        Cmd::Table1(a) => cmd_table1(cli, a),
    }
}

/// Print the standard JSON envelope: optional metadata, the resolved
/// configuration, and the report.
fn print_output(
    cli: &Cli,
    subcommand: &str,
    config: serde_json::Value,
    report: serde_json::Value,
) -> Result<(), CliError> {
    let mut out = serde_json::Map::new();
    if !cli.no_meta {
        out.insert(
            "meta".into(),
            json!({
                "tool": "qsprep",
                "version": env!("CARGO_PKG_VERSION"),
                "unix_time": std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            }),
        );
    }
    let mut cfg = config;
    cfg.as_object_mut()
        .expect("config is an object")
        .insert("subcommand".into(), json!(subcommand));
    out.insert("config".into(), cfg);
    out.insert("report".into(), report);
    println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(out)).unwrap());
    Ok(())
}

fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn write_csv(path: &PathBuf, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn parse_mode(s: &str) -> Result<Mode, CliError> {
    match s {
        "seq" => Ok(Mode::Sequential),
        "para" => Ok(Mode::Parallel),
        "gpara" => Ok(Mode::BatchedWholeTree),
        "tradeoff" => Ok(Mode::Tradeoff),
        _ => Err(invalid(format!("unknown mode {s:?}, expected seq|para|gpara|tradeoff"))),
    }
}

fn parse_c0(s: &str) -> Result<C0Policy, CliError> {
    if s == "supra" {
        return Ok(C0Policy::Supra);
    }
    if let Some(k) = s.strip_prefix("const:") {
        let k = k.parse::<u64>().map_err(|_| invalid(format!("bad copy count in {s:?}")))?;
        if k == 0 {
            return Err(invalid("copy count must be positive"));
        }
        return Ok(C0Policy::Constant(k));
    }
    if let Some(b) = s.strip_prefix("power:") {
        let b = b.parse::<f64>().map_err(|_| invalid(format!("bad exponent in {s:?}")))?;
        if !(1.0..=2.0).contains(&b) {
            return Err(invalid("qubit-count exponent must sit in [1, 2]"));
        }
        return Ok(C0Policy::Power(b));
    }
    Err(invalid(format!("unknown copy policy {s:?}, expected const:<k>|power:<b>|supra")))
}

fn parse_pplus(s: &str) -> Result<PPlusModel, CliError> {
    match s {
        "half" => Ok(PPlusModel::WorstCaseHalf),
        "analytic" => Ok(PPlusModel::Analytic),
        _ => {
            if let Some(p) = s.strip_prefix("fixed:") {
                let p = p.parse::<f64>().map_err(|_| invalid(format!("bad probability in {s:?}")))?;
                if !(0.0 < p && p <= 1.0) {
                    return Err(invalid("fixed probability must sit in (0, 1]"));
                }
                return Ok(PPlusModel::Fixed(p));
            }
            Err(invalid(format!("unknown probability model {s:?}, expected half|analytic|fixed:<p>")))
        }
    }
}

fn cmd_prepare(cli: &Cli, a: &PrepareArgs) -> Result<(), CliError> {
    let cfg = PrepConfig {
        mode: parse_mode(&a.mode)?,
        c0_policy: parse_c0(&a.c0)?,
        n_u: a.nu,
        engine: match a.engine.as_str() {
            "exact" => Engine::ExactStatevector,
            "cascade" => Engine::ClassicalCascade,
            other => return Err(invalid(format!("unknown engine {other:?}, expected exact|cascade"))),
        },
        seed: a.seed,
        p_plus_model: PPlusModel::Analytic,
        retry_cap: a.retry_cap,
        tradeoff_leaf_cost: None,
    };

    let v = match &a.input {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let entries = parse_vector_file(&text)?;
            let u = AmplitudeVector::from_unnormalized(entries)?;
            let v = resize(&u);
            if let Some(n) = a.n {
                if v.num_qubits() != n {
                    return Err(invalid(format!(
                        "--n {n} disagrees with the {}-entry input vector",
                        v.len()
                    )));
                }
            }
            v
        }
        None => {
            let n = a.n.ok_or_else(|| invalid("either --n or --input is required"))?;
            if n == 0 {
                return Err(invalid("--n must be positive"));
            }
            uniform_vector(n)
        }
    };

    let r = prep::prepare(&v, &cfg)?;

    // decomposed depth of each merge block plus their serial chain
    let leaf_qubits = if cfg.mode == Mode::Tradeoff { a.nu } else { 1 };
    let mut block_depths = Vec::new();
    let mut total = 0usize;
    for level in leaf_qubits..v.num_qubits() {
        let d = build_concat_circuit(level)?.decompose().depth();
        block_depths.push(json!({ "half_qubits": level, "decomposed_depth": d }));
        total += d;
    }

    let report = json!({
        "decoded_vector": r.decoded.entries().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "t_stp": r.t_stp,
        "restarts": r.restarts,
        "peak_copies": r.peak_parallel_copies,
        "peak_qubits": r.peak_qubits,
        "total_qubit_touches": r.total_qubit_touches,
        "depth_report": {
            "merge_blocks": block_depths,
            "serial_chain_depth": total,
        },
    });
    print_output(cli, "prepare", serde_json::to_value(a).unwrap(), report)
}

fn scaling_experiment(
    c0: &str,
    pplus: &str,
    mode: &str,
    nmin: usize,
    nmax: usize,
    trials: usize,
    seed: u64,
) -> Result<ScalingExperiment, CliError> {
    if nmin == 0 || nmin > nmax {
        return Err(invalid("need 0 < nmin <= nmax"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    Ok(ScalingExperiment {
        c0_policy: parse_c0(c0)?,
        p_plus_model: parse_pplus(pplus)?,
        mode: parse_mode(mode)?,
        seed,
        ..ScalingExperiment::new((nmin..=nmax).collect(), trials)
    })
}

fn per_n_csv(path: &PathBuf, per_n: &[cascade::PerN]) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = per_n
        .iter()
        .map(|p| {
            vec![p.n.to_string(), p.big_n.to_string(), fmt17(p.mean_tstp), fmt17(p.std_tstp)]
        })
        .collect();
    write_csv(path, &["n", "N", "mean_tstp", "std_tstp"], &rows)
}

fn cmd_runtime(cli: &Cli, a: &RuntimeArgs) -> Result<(), CliError> {
    let exp = scaling_experiment(&a.c0, &a.pplus, &a.mode, a.nmin, a.nmax, a.trials, a.seed)?;
    let fit = cascade::run_scaling(&exp)?;
    if let Some(path) = &a.csv {
        per_n_csv(path, &fit.per_n)?;
    }
    print_output(cli, "runtime", serde_json::to_value(a).unwrap(), serde_json::to_value(&fit).unwrap())
}

fn cmd_tradeoff(cli: &Cli, a: &TradeoffArgs) -> Result<(), CliError> {
    let betas: Vec<f64> = a
        .betaq
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("bad exponent {s:?}"))))
        .collect::<Result<_, _>>()?;
    if betas.is_empty() {
        return Err(invalid("need at least one exponent"));
    }
    let template =
        scaling_experiment("const:1", &a.pplus, "para", a.nmin, a.nmax, a.trials, a.seed)?;
    let curve = cascade::tradeoff_curve(&betas, &template)?;
    if let Some(path) = &a.csv {
        let mut rows = Vec::new();
        for (bq, fit) in &curve {
            for p in &fit.per_n {
                rows.push(vec![
                    fmt17(*bq),
                    p.n.to_string(),
                    p.big_n.to_string(),
                    fmt17(p.mean_tstp),
                    fmt17(p.std_tstp),
                ]);
            }
        }
        write_csv(path, &["beta_q", "n", "N", "mean_tstp", "std_tstp"], &rows)?;
    }
    let report: Vec<serde_json::Value> = curve
        .iter()
        .map(|(bq, fit)| json!({ "beta_q": bq, "fit": fit }))
        .collect();
    print_output(cli, "tradeoff", serde_json::to_value(a).unwrap(), json!(report))
}

fn cmd_bounds(cli: &Cli, a: &BoundsArgs) -> Result<(), CliError> {
    if let Some(BoundsAction::Hoeffding { nmax }) = &a.action {
        let reports: Vec<_> = (2..=*nmax).map(cascade::hoeffding_bound).collect();
        return print_output(
            cli,
            "bounds hoeffding",
            json!({ "nmax": nmax }),
            serde_json::to_value(&reports).unwrap(),
        );
    }
    let result = a.result.ok_or_else(|| invalid("--result 4|5 is required"))?;
    let n = a.n.ok_or_else(|| invalid("--n is required"))?;
    match result {
        4 => {
            let case = match a.case {
                1 => SampleCase::UniformCase1,
                2 => SampleCase::GaussianCase2,
                other => return Err(invalid(format!("unknown case {other}, expected 1|2"))),
            };
            let rep = bounds::verify_result4(case, n, a.trials, a.delta, a.seed)?;
            if let Some(path) = &a.csv {
                let rows: Vec<Vec<String>> = bounds::result4_trials(case, n, a.trials, a.seed)
                    .iter()
                    .map(|t| {
                        vec![
                            t.trial.to_string(),
                            fmt17(t.p_s_modulus),
                            fmt17(t.p_s_prime),
                            fmt17(t.max_abs_sq),
                        ]
                    })
                    .collect();
                write_csv(path, &["trial", "p_s_modulus", "p_s_prime", "max_abs_sq"], &rows)?;
            }
            print_output(cli, "bounds", serde_json::to_value(a).unwrap(), serde_json::to_value(&rep).unwrap())
        }
        5 => {
            let rep = bounds::verify_result5(a.epsth, a.delta, n, a.trials, a.seed)?;
            if let Some(path) = &a.csv {
                let rows: Vec<Vec<String>> =
                    bounds::result5_trials(a.epsth, a.delta, n, a.trials, a.seed)
                        .iter()
                        .map(|t| vec![t.trial.to_string(), fmt17(t.fidelity), fmt17(t.p_s)])
                        .collect();
                write_csv(path, &["trial", "fidelity", "p_s"], &rows)?;
            }
            print_output(cli, "bounds", serde_json::to_value(a).unwrap(), serde_json::to_value(&rep).unwrap())
        }
        other => Err(invalid(format!("unknown result {other}, expected 4|5"))),
    }
}

fn cmd_emit(a: &EmitArgs) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(invalid("--n must be positive"));
    }
    let c = match a.what.as_str() {
        "concat" => build_concat_circuit(a.n)?,
        "complex" => build_complex_circuit(a.n)?,
        "full-seq" => build_full_network(&uniform_vector(a.n), 1)?,
        "full-para" => {
            if a.copies == 0 {
                return Err(invalid("--copies must be positive"));
            }
            build_full_network(&uniform_vector(a.n), a.copies)?
        }
        other => {
            return Err(invalid(format!(
                "unknown target {other:?}, expected concat|complex|full-seq|full-para"
            )))
        }
    };
    let c = if a.decompose { c.decompose() } else { c };
    let text = qsprep_core::circuit::emit(&c);
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_lightcone(cli: &Cli, a: &LightconeArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.schedule)?;
    let sched = GroupingSchedule::parse(&text)?;
    let cone = sched.light_cone(a.qubit)?;
    let report = json!({
        "qubit": a.qubit,
        "num_qubits": sched.num_qubits(),
        "num_layers": sched.num_layers(),
        "max_group_size": sched.k(),
        "cone": cone.iter().collect::<Vec<_>>(),
        "cone_size": cone.len(),
        "depth_lower_bound_for_cone": depth_lower_bound(cone.len().max(1), sched.k()),
    });
    print_output(cli, "lightcone", serde_json::to_value(a).unwrap(), report)
}

fn cmd_table1(cli: &Cli, a: &Table1Args) -> Result<(), CliError> {
    let rows = cascade::table1_report(a.trials, a.seed)?;
    if let Some(path) = &a.csv {
        let data: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.method.clone(),
                    r.measured_runtime.clone(),
                    r.measured_qubits.clone(),
                    r.claimed_depth.clone(),
                    r.claimed_runtime.clone(),
                    r.claimed_qubits.clone(),
                ]
            })
            .collect();
        write_csv(
            path,
            &[
                "method",
                "measured_runtime",
                "measured_qubits",
                "claimed_depth",
                "claimed_runtime",
                "claimed_qubits",
            ],
            &data,
        )?;
    }
    print_output(cli, "table1", serde_json::to_value(a).unwrap(), serde_json::to_value(&rows).unwrap())
}
