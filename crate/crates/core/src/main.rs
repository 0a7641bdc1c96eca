use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plap_norm::experiments::{run, verify, RunConfig, RunStatus, Task};
use plap_norm::par;

#[derive(Parser)]
#[command(name = "plap-norm", version, about = "Normalized solutions of critical p-Laplacian equations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every task listed in the config.
    Run(Common),
    /// S, C_gn, α / ᾱ, C′, C″ and the zeros of h.
    Thresholds(Common),
    /// Ground state φ₀ by shooting.
    Shoot(Common),
    /// Local minimizer u⁺ (Subcritical).
    SolvePlus(Common),
    /// Mountain-pass solution u⁻.
    SolveMinus(Common),
    /// μ sweep with exponent regressions.
    Sweep(Common),
    /// Cut-off bubble norm table and regressions.
    Appendix(Common),
    /// μ < 0 nonexistence scan.
    Nonexist(Common),
    /// Re-certify a results directory.
    Verify {
        /// Results directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn execute(common: &Common, tasks: Option<Vec<Task>>) -> ExitCode {
    let mut cfg = match RunConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(t) = tasks {
        cfg.tasks = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    par::set_threads(common.threads.unwrap_or(cfg.threads));
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    match run(&cfg, common.out.as_deref()) {
        Ok(out) => {
            for c in &out.results.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for f in &out.results.failures {
                eprintln!("failure: {f}");
            }
            println!("results written to {}", out.dir.display());
            if out.status != RunStatus::Success {
                eprintln!("status: {:?}", out.status);
            }
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let with = |t: Task| Some(vec![Task::Thresholds, t]);
    match &cli.cmd {
        Cmd::Run(c) => execute(c, None),
        Cmd::Thresholds(c) => execute(c, Some(vec![Task::Thresholds])),
        Cmd::Shoot(c) => execute(c, Some(vec![Task::Shoot])),
        Cmd::SolvePlus(c) => execute(c, with(Task::SolvePlus)),
        Cmd::SolveMinus(c) => execute(c, with(Task::SolveMinus)),
        Cmd::Sweep(c) => execute(c, Some(vec![Task::Shoot, Task::Sweep])),
        Cmd::Appendix(c) => execute(c, Some(vec![Task::Appendix])),
        Cmd::Nonexist(c) => execute(c, Some(vec![Task::Nonexist])),
        Cmd::Verify { out, threads } => {
            par::set_threads(threads.unwrap_or(0));
            match verify(out) {
                Ok(rep) => {
                    for c in &rep.checks {
                        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                    }
                    if rep.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("verify error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
