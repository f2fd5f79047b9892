use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ihosvd::harness::{
    exit_code, run_completion, run_convergence, run_phase_transition, run_recoverability,
    run_selftest, ExperimentConfig, SolverChoice,
};
use ihosvd::Error;

#[derive(Parser)]
#[command(name = "ihosvd", version, about = "Tucker completion experiments on synthetic tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Per-iteration traces of each solver from a common starting point.
    Convergence,
    /// Tensor recovery success rates over a rank × sample-ratio grid.
    Phase,
    /// Factor recovery success rates over a rank × sample-ratio grid.
    Recover,
    /// Completion error of each solver on one instance.
    Complete,
    /// Quick numerical property checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Ihooi,
    Alsas,
    Both,
    Hooi,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: ./out/<subcommand>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    solver: Option<SolverArg>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Skip grid cells whose outcome follows from neighbouring cells.
    #[arg(long, global = true)]
    early_exit: bool,
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(s) = common.solver {
        cfg.solver = match s {
            SolverArg::Ihooi => SolverChoice::Ihooi,
            SolverArg::Alsas => SolverChoice::Alsas,
            SolverArg::Both => SolverChoice::Both,
            SolverArg::Hooi => SolverChoice::Hooi,
        };
    }
    if let Some(t) = common.threads {
        cfg.threads = t;
    }
    if common.early_exit {
        cfg.grid.early_exit = true;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = load_config(&cli.common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let out_dir = |name: &str| cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));

    pool.install(|| {
        match cli.command {
            Command::Convergence => {
                let res = run_convergence(&cfg, &out_dir("convergence"))?;
                for (m, trace) in &res.runs {
                    let last = trace.last();
                    println!(
                        "{:<6} iterations {:>5}  final fit {:.3e}  objective {:.3e}  stop {}",
                        m.name(),
                        trace.len(),
                        last.map_or(f64::NAN, |r| r.fit),
                        last.map_or(trace.initial_obj, |r| r.obj),
                        trace.stop.map_or("none", |s| s.name())
                    );
                    for w in &trace.warnings {
                        eprintln!("warning: {w}");
                    }
                }
                report_files(&res.files);
            }
            Command::Phase | Command::Recover => {
                let res = if matches!(cli.command, Command::Phase) {
                    run_phase_transition(&cfg, &out_dir("phase"))?
                } else {
                    run_recoverability(&cfg, &out_dir("recover"))?
                };
                for c in &res.cells {
                    println!(
                        "{:<6} r={:<3} sr={:<5} {:>3}/{:<3} {}",
                        c.solver.name(),
                        c.rank,
                        c.sample_ratio,
                        c.successes,
                        c.trials,
                        if c.computed { "" } else { "(inferred)" }
                    );
                }
                report_files(&res.files);
            }
            Command::Complete => {
                let res = run_completion(&cfg, &out_dir("complete"))?;
                for r in &res.rows {
                    println!(
                        "{:<6} relerr {:.3e}  observed {:.3e}  iterations {:>5}  {:.2}s",
                        r.solver.name(),
                        r.relerr,
                        r.relerr_observed,
                        r.iterations,
                        r.seconds
                    );
                }
                report_files(&res.files);
            }
            Command::Selftest => {
                let results = run_selftest(cfg.seed);
                let mut ok = true;
                for c in &results {
                    println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                    ok &= c.passed;
                }
                return Ok(ok);
            }
        }
        Ok(true)
    })
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
