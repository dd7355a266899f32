use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use unitsched::audit::{self, AuditConfig};
use unitsched::baselines::{coffman_graham_labels, list_schedule, PriorityOrder};
use unitsched::bench::{self, Algorithm, BenchOptions};
use unitsched::corpus::{self, CorpusEntry};
use unitsched::generate::{generate, GeneratorKind, GeneratorSpec};
use unitsched::io::{emit_instance, emit_schedule, parse_instance, parse_schedule};
use unitsched::oracle;
use unitsched::params::ChainThreshold;
use unitsched::qptas::{self, GuessConfig, JobGuessing, PartitionMode};
use unitsched::{validate_schedule, Eps, Error, Instance, JobId, Schedule};

#[derive(Parser)]
#[command(
    name = "unitsched",
    version,
    about = "Unit-job scheduling with precedence constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance, or the standard corpus with --corpus.
    Gen(GenArgs),
    /// Schedule an instance.
    Solve(SolveArgs),
    /// Check a schedule against an instance.
    Verify(VerifyArgs),
    /// Run algorithms over a corpus and write a CSV.
    Bench(BenchArgs),
    /// Inspect the interval structure of an instance.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Audit the analysis bounds over a corpus.
    Audit(AuditArgs),
}

#[derive(Args)]
struct GenArgs {
    /// antichain, chain, layered:L:W:P, random:P or diamond:D
    #[arg(long, default_value = "random:0.3")]
    kind: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the standard corpus into the --output directory.
    #[arg(long)]
    corpus: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Exact,
    Ls,
    Cg,
    Qptas,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderKind {
    Id,
    Random,
    Cg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Laminar,
    Exhaustive,
}

#[derive(Clone, Copy, ValueEnum)]
enum GuessKind {
    /// Exhaustive in exhaustive mode, sampled in laminar mode.
    Auto,
    Exhaustive,
    Sampled,
    Reference,
    None,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the machine count of the instance.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value = "qptas")]
    alg: Alg,
    /// Priority order for list scheduling.
    #[arg(long, value_enum, default_value = "id")]
    order: OrderKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1")]
    eps: Eps,
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    /// Recursion cap; defaults to ⌈(ε/m) log n⌉ + 1.
    #[arg(long)]
    depth_max: Option<usize>,
    #[arg(long, value_enum, default_value = "laminar")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "auto")]
    guess: GuessKind,
    /// Random guesses per call in sampled mode.
    #[arg(long, default_value_t = 4)]
    samples: usize,
    /// Stop widening the search after this many guesses.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    max_cells: Option<usize>,
    /// `auto` or a slot count.
    #[arg(long, default_value = "auto")]
    horizon: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Corpus directory; the standard corpus when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated subset of exact, ls, ls-random, cg, qptas.
    #[arg(long, value_delimiter = ',')]
    algs: Option<Vec<Algorithm>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1")]
    eps: Eps,
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    #[arg(long, default_value_t = 4)]
    samples: usize,
    #[arg(long, default_value_t = 2000)]
    budget: u64,
    /// Add a wall-time column; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// CSV of guess and top sets per level and interval.
    Levels(LevelsArgs),
}

#[derive(Args)]
struct LevelsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "1")]
    eps: Eps,
    /// Drop the per-machine factor from the chain threshold.
    #[arg(long)]
    plain_threshold: bool,
}

#[derive(Args)]
struct AuditArgs {
    /// Corpus directory; the standard corpus when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "1")]
    eps: Eps,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Analyze {
            what: AnalyzeCommand::Levels(a),
        } => cmd_levels(a),
        Command::Audit(a) => cmd_audit(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Io { .. }
        | Error::BadSpec(_)
        | Error::BadEps(_)
        | Error::BadOrder(_)
        | Error::BadHorizon(_)
        | Error::BadMachineCount
        | Error::Index { .. }
        | Error::Cycle(_) => 2,
        _ => 1,
    }
}

type CmdResult = Result<ExitCode, Error>;

fn write_out(path: Option<&Path>, text: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => std::io::stdout()
            .write_all(text)
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn io_error(p: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: p.display().to_string(),
        msg: e.to_string(),
    }
}

fn read_instance(path: &Path, m: Option<usize>) -> Result<Instance, Error> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let inst = parse_instance(&text)?;
    match m {
        Some(m) => inst.with_machines(m),
        None => Ok(inst),
    }
}

fn load_entries(dir: Option<&Path>) -> Result<Vec<CorpusEntry>, Error> {
    match dir {
        Some(d) => corpus::load_corpus(d),
        None => Ok(corpus::standard_corpus()),
    }
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    if a.corpus {
        let dir = a
            .output
            .ok_or_else(|| Error::BadSpec("--corpus needs an --output directory".into()))?;
        corpus::write_corpus(&dir, &corpus::standard_corpus())?;
        return Ok(ExitCode::SUCCESS);
    }
    let kind: GeneratorKind = a.kind.parse()?;
    let inst = generate(&GeneratorSpec::new(kind, a.n, a.m, a.seed))?;
    write_out(a.output.as_deref(), emit_instance(&inst).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let inst = read_instance(&a.input, a.m)?;
    let (sched, stats) = match a.alg {
        Alg::Exact => (oracle::optimal_schedule(&inst)?, None),
        Alg::Ls => {
            let order = match a.order {
                OrderKind::Id => PriorityOrder::identity(inst.n()),
                OrderKind::Random => bench::random_order(inst.n(), a.seed),
                OrderKind::Cg => {
                    let label = coffman_graham_labels(&inst);
                    let mut perm: Vec<JobId> = inst.jobs().collect();
                    perm.sort_by_key(|j| std::cmp::Reverse(label[j.index()]));
                    PriorityOrder::new(perm)?
                }
            };
            (list_schedule(&inst, &order), None)
        }
        Alg::Cg => (unitsched::baselines::coffman_graham_schedule(&inst), None),
        Alg::Qptas => {
            let (sched, discarded, explored) = solve_qptas(&inst, &a)?;
            (sched, Some((discarded, explored)))
        }
    };
    let report = validate_schedule(&inst, &sched, true);
    write_out(a.output.as_deref(), emit_schedule(&sched).as_bytes())?;
    if let Some((d, g)) = stats {
        eprintln!("discarded={d} explored={g}");
    }
    if !report.feasible {
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn solve_qptas(inst: &Instance, a: &SolveArgs) -> Result<(Schedule, usize, u64), Error> {
    let known = match a.horizon.as_str() {
        "auto" => (inst.n() <= oracle::DEFAULT_MAX_JOBS)
            .then(|| oracle::optimal_makespan(inst, None))
            .transpose()?,
        s => Some(s.parse::<usize>().map_err(|_| {
            Error::BadSpec(format!("--horizon must be `auto` or a number, got `{s}`"))
        })?),
    };
    let mut cfg = GuessConfig {
        k_max: a.kmax,
        partition_mode: match a.mode {
            Mode::Laminar => PartitionMode::Laminar,
            Mode::Exhaustive => PartitionMode::Exhaustive,
        },
        node_budget: a.budget,
        max_cells: a.max_cells,
        ..GuessConfig::new(a.eps)
    };
    let guess = match (a.guess, a.mode) {
        (GuessKind::Auto, Mode::Exhaustive) => GuessKind::Exhaustive,
        (GuessKind::Auto, Mode::Laminar) => GuessKind::Sampled,
        (g, _) => g,
    };
    let run = if let GuessKind::Reference = guess {
        let opt = oracle::optimal_schedule(inst)?;
        let horizon = known.unwrap_or(opt.makespan());
        if horizon < opt.makespan() {
            return Err(Error::InfeasibleHorizon(horizon));
        }
        let (padded, target, assign) =
            qptas::reference_assignment(inst, &opt, horizon, a.eps, ChainThreshold::PerMachine)?;
        cfg.depth_max = a.depth_max.unwrap_or_else(|| {
            unitsched::params::default_depth_max(padded.n(), inst.machines(), a.eps)
        });
        cfg.job_guessing = JobGuessing::Reference(Arc::new(assign));
        qptas::run_padded(inst, padded, horizon, target, &cfg)?
    } else {
        cfg.job_guessing = match guess {
            GuessKind::Exhaustive => JobGuessing::Exhaustive,
            GuessKind::Sampled => JobGuessing::Sampled {
                samples: a.samples,
                seed: a.seed,
            },
            _ => JobGuessing::Nothing,
        };
        cfg.depth_max = a.depth_max.unwrap_or_else(|| {
            unitsched::params::default_depth_max(inst.n(), inst.machines(), a.eps)
        });
        qptas::solve_auto(inst, &cfg, known)?
    };
    Ok((run.schedule, run.total_discards, run.solve.stats.explored))
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let inst = read_instance(&a.input, a.m)?;
    let text = fs::read_to_string(&a.schedule).map_err(|e| io_error(&a.schedule, e))?;
    let sched = parse_schedule(&text)?;
    let report = validate_schedule(&inst, &sched, true);
    if report.feasible {
        println!("feasible makespan={}", report.makespan);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("infeasible violations={}", report.violations.len());
        for v in &report.violations {
            println!("{v}");
        }
        Ok(ExitCode::from(1))
    }
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let entries = load_entries(a.input.as_deref())?;
    let opts = BenchOptions {
        algorithms: a.algs.unwrap_or_else(|| Algorithm::ALL.to_vec()),
        seed: a.seed,
        eps: a.eps,
        k_max: a.kmax,
        samples: a.samples,
        node_budget: Some(a.budget),
        timing: a.timing,
        ..BenchOptions::default()
    };
    let rows = bench::run_bench(&entries, &opts);
    let mut buf = Vec::new();
    bench::write_bench_csv(&mut buf, &rows, a.timing)
        .map_err(|e| io_error(Path::new("<csv>"), e))?;
    write_out(a.output.as_deref(), &buf)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_levels(a: LevelsArgs) -> CmdResult {
    let inst = read_instance(&a.input, a.m)?;
    let opt = oracle::optimal_schedule(&inst)?;
    let threshold = if a.plain_threshold {
        ChainThreshold::Plain
    } else {
        ChainThreshold::PerMachine
    };
    let (_, _, assign) =
        qptas::reference_assignment(&inst, &opt, opt.makespan(), a.eps, threshold)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let ids = |s: &unitsched::JobSet| {
        s.iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut rows = vec![[
        "level".to_string(),
        "start".into(),
        "end".into(),
        "guess".into(),
        "top".into(),
    ]];
    for (l, sets) in assign.levels.iter().enumerate() {
        for s in sets {
            rows.push([
                l.to_string(),
                s.interval.start.to_string(),
                s.interval.end.to_string(),
                ids(&s.guess),
                ids(&s.top),
            ]);
        }
    }
    for r in rows {
        w.write_record(&r)
            .map_err(|e| io_error(Path::new("<csv>"), e))?;
    }
    let buf = w
        .into_inner()
        .map_err(|e| io_error(Path::new("<csv>"), e))?;
    write_out(a.output.as_deref(), &buf)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(a: AuditArgs) -> CmdResult {
    let entries = load_entries(a.input.as_deref())?;
    let cfg = AuditConfig {
        eps: a.eps,
        k_max: a.kmax,
        ..AuditConfig::default()
    };
    let mut reports = Vec::new();
    for e in &entries {
        let run = audit::reference_run(&e.instance, &cfg)?;
        reports.extend(audit::audit_run(&e.name, &run, a.eps)?);
    }
    let mut buf = Vec::new();
    audit::write_csv(&mut buf, &reports).map_err(|e| io_error(Path::new("<csv>"), e))?;
    match &a.report {
        Some(p) => fs::write(p, &buf).map_err(|e| io_error(p, e))?,
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| io_error(Path::new("<stdout>"), e))?,
    }
    let mut failing = false;
    let claims = [
        "unique_level",
        "shift_bound",
        "window_slack",
        "level_count",
        "degenerate",
        "idle_slots",
    ];
    for claim in claims {
        let (pop, bad) = reports
            .iter()
            .filter(|r| r.name == claim)
            .fold((0, 0), |(p, v), r| (p + r.population, v + r.violations));
        let kind = if audit::is_contractual(claim) {
            "contractual"
        } else {
            "advisory"
        };
        eprintln!("{claim} ({kind}): {bad} violations over {pop}");
        failing |= bad > 0;
    }
    Ok(if failing {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}
