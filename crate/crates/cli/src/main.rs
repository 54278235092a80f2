use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hdats_cli::bench::{cells_csv, run_plan, summarize, summary_csv, BenchPlan};
use hdats_cli::io::{read_instance, read_solution, trace_csv, write_instance, write_output, write_solution};
use hdats_cli::run::{run, Algorithm, ClockKind, Init, RunConfig};
use hdats_core::eval::{peak_occupancy, simulate};
use hdats_core::generate::{generate, GeneratorConfig};
use hdats_core::ilp::{emit_ilp, IlpOptions};
use hdats_core::model::validate_solution;
use hdats_core::realloc::respects_locality;
use hdats_core::tabu::Polish;
use hdats_core::{load_balance_schedule, Capacity, SearchParams};

#[derive(Parser)]
#[command(name = "hdats", version, about = "Task scheduling and data allocation on heterogeneous multiprocessors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Solve an instance and write the solution.
    Solve(SolveArgs),
    /// Check a solution; exits with status 2 when it is infeasible.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Compare tabu search with the baseline over generated instances.
    Bench(BenchArgs),
    /// Write the time-indexed integer program in LP format.
    ExportIlp {
        instance: PathBuf,
        /// Time horizon; defaults to the baseline makespan.
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
#[error("expected N or MIN-MAX, got {0:?}")]
struct RangeError(String);

fn parse_range(s: &str) -> Result<(usize, usize), RangeError> {
    let err = || RangeError(s.to_string());
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| err())?, b.trim().parse().map_err(|_| err())?),
        None => {
            let v = s.trim().parse().map_err(|_| err())?;
            (v, v)
        }
    };
    if lo > hi || lo == 0 {
        return Err(err());
    }
    Ok((lo, hi))
}

#[derive(Args)]
struct GeneratorArgs {
    /// Full-size instances (200-300 tasks) instead of 50-100 tasks.
    #[arg(long)]
    full: bool,
    #[arg(long, value_parser = parse_range)]
    tasks: Option<(usize, usize)>,
    #[arg(long, value_parser = parse_range)]
    blocks: Option<(usize, usize)>,
    #[arg(long)]
    high_speed_procs: Option<usize>,
}

impl GeneratorArgs {
    fn config(&self) -> GeneratorConfig {
        let mut cfg = if self.full {
            GeneratorConfig::default()
        } else {
            GeneratorConfig::desk()
        };
        if let Some(t) = self.tasks {
            cfg.tasks = t;
        }
        if let Some(b) = self.blocks {
            cfg.blocks = b;
        }
        if let Some(h) = self.high_speed_procs {
            cfg.high_speed_procs = h;
        }
        cfg
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    gen: GeneratorArgs,
    #[arg(long)]
    general_procs: Option<usize>,
    /// Fast memory capacity as per mille of the baseline's peak live volume.
    #[arg(long)]
    high_mem_permille: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolishArg {
    Off,
    Ends,
    EveryBest,
}

impl From<PolishArg> for Polish {
    fn from(p: PolishArg) -> Self {
        match p {
            PolishArg::Off => Polish::Off,
            PolishArg::Ends => Polish::Ends,
            PolishArg::EveryBest => Polish::EveryBest,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "slack")]
    init: Init,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbours evaluated exactly per iteration.
    #[arg(long, default_value_t = 100)]
    kmax: usize,
    /// Iterations without improvement before stopping.
    #[arg(long, default_value_t = 100_000)]
    lambda: u64,
    /// Time budget in seconds of the selected clock.
    #[arg(long, default_value_t = 600.0)]
    tmax_s: f64,
    /// Run the full reallocation every this many adoptions.
    #[arg(long, default_value_t = 100)]
    realloc_round: u64,
    /// Only use the fast reallocation.
    #[arg(long)]
    fast_realloc: bool,
    #[arg(long)]
    max_iters: Option<u64>,
    /// `work` and `step` make runs reproducible; `wall` uses real time.
    #[arg(long, value_enum, default_value = "work")]
    clock: ClockKind,
    #[arg(long, value_enum, default_value = "ends")]
    polish: PolishArg,
}

impl SearchArgs {
    fn config(&self, alg: Algorithm) -> Result<RunConfig> {
        anyhow::ensure!(self.tmax_s.is_finite() && self.tmax_s >= 0.0, "--tmax-s must be non-negative");
        anyhow::ensure!(self.realloc_round > 0, "--realloc-round must be positive");
        let params = SearchParams {
            kmax: self.kmax,
            lambda: self.lambda,
            tmax_ms: (self.tmax_s * 1000.0).round() as u64,
            realloc_round: self.realloc_round,
            fast_realloc: self.fast_realloc,
            seed: self.seed,
            max_iters: self.max_iters,
            polish: self.polish.into(),
            ..SearchParams::default()
        };
        Ok(RunConfig {
            alg,
            init: self.init,
            clock: self.clock,
            params,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "ts")]
    alg: Algorithm,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of instances per grid point.
    #[arg(long, default_value_t = 10)]
    instances: u64,
    /// Seed of the first instance; the others follow consecutively.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[command(flatten)]
    gen: GeneratorArgs,
    #[arg(long, value_delimiter = ',', default_value = "200")]
    high_mem_permille: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    general_procs: Vec<usize>,
    #[arg(long = "kmax-list", value_delimiter = ',', default_value = "100")]
    kmax_list: Vec<usize>,
    #[command(flatten)]
    search: SearchArgs,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    /// Per-run results.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Aggregates per grid point; printed to stderr when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let mut cfg = a.gen.config().with_seed(a.seed);
    if let Some(g) = a.general_procs {
        cfg.general_procs = g;
    }
    if let Some(m) = a.high_mem_permille {
        cfg.high_mem_permille = m;
    }
    write_instance(a.output.as_deref(), &generate(&cfg))
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let cfg = a.search.config(a.alg)?;
    let out = run(&inst, &cfg);
    if let Some(path) = &a.trace {
        write_output(Some(path), &trace_csv(&out.trace))?;
    }
    write_solution(a.output.as_deref(), &out.solution)?;
    eprintln!("makespan {}", out.makespan);
    Ok(())
}

/// Prints a tab-separated report and returns whether the solution is feasible.
fn cmd_validate(instance: &Path, solution: &Path) -> Result<bool> {
    let inst = read_instance(instance)?;
    let sol = read_solution(solution)?;
    let mut report = String::new();
    let violations = validate_solution(&inst, &sol);
    for v in &violations {
        let _ = writeln!(report, "violation\tstructure\t{v}");
    }
    let mut ok = violations.is_empty();
    if ok {
        if !respects_locality(&inst, &sol) {
            let _ = writeln!(report, "violation\tlocality\ta block uses a local bank outside its task's group");
            ok = false;
        }
        match simulate(&inst, &sol) {
            Err(c) => {
                let _ = writeln!(report, "violation\tcycle\t{c}");
                ok = false;
            }
            Ok(sched) => {
                for (m, p) in peak_occupancy(&inst, &sched, &sol.allocation).iter().enumerate() {
                    let cap = inst.memory(m).capacity;
                    let cap_text = match cap {
                        Capacity::Finite(c) => c.to_string(),
                        Capacity::Unbounded => "inf".to_string(),
                    };
                    if !cap.admits(p.peak) {
                        let _ = writeln!(report, "violation\tcapacity\tbank {m} peaks at {} above {cap_text}", p.peak);
                        ok = false;
                    }
                    let _ = writeln!(report, "peak\t{m}\t{}\t{cap_text}", p.peak);
                }
                let _ = writeln!(report, "makespan\t{}", sched.makespan);
            }
        }
    }
    let _ = writeln!(report, "status\t{}", if ok { "feasible" } else { "infeasible" });
    print!("{report}");
    Ok(ok)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    anyhow::ensure!(a.instances > 0, "--instances must be positive");
    let plan = BenchPlan {
        base: a.gen.config(),
        seeds: (a.seed_base..a.seed_base + a.instances).collect(),
        high_mem_permilles: a.high_mem_permille.clone(),
        general_procs: a.general_procs.clone(),
        kmax: a.kmax_list.clone(),
        run: a.search.config(Algorithm::Ts)?,
    };
    let cells = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| run_plan(&plan)),
        None => run_plan(&plan),
    };
    write_output(a.output.as_deref(), &cells_csv(&cells))?;
    let summary = summary_csv(&summarize(&cells));
    match &a.summary {
        Some(p) => write_output(Some(p), &summary)?,
        None => eprint!("{summary}"),
    }
    Ok(())
}

fn cmd_export_ilp(instance: &Path, horizon: Option<u64>, output: Option<&Path>) -> Result<()> {
    let inst = read_instance(instance)?;
    let horizon = match horizon {
        Some(h) => h,
        None => simulate(&inst, &load_balance_schedule(&inst)).context("baseline schedule")?.makespan,
    };
    let export = emit_ilp(&inst, &IlpOptions::new(horizon))?;
    for w in &export.warnings {
        eprintln!("warning: {w}");
    }
    write_output(output, &export.text)
}

fn main() -> ExitCode {
    // Usage errors exit with 1 so that 2 always means an infeasible solution.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| true),
        Command::Solve(a) => cmd_solve(a).map(|_| true),
        Command::Validate { instance, solution } => cmd_validate(instance, solution),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
        Command::ExportIlp {
            instance,
            horizon,
            output,
        } => cmd_export_ilp(instance, *horizon, output.as_deref()).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
