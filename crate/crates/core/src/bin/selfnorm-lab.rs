use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use selfnorm_lab::error::{LabError, Result};
use selfnorm_lab::runner::{
    exit_code, run_diagnose, run_levy, run_limit, run_reproduce, run_simulate, ExperimentConfig,
    RunOutcome, Suite, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "selfnorm-lab",
    version,
    about = "Self-normalized sums with heavy-tailed multipliers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment file (`key = value`, dotted sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `outputs` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, env = "SELFNORM_LAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate T_n and related samples.
    Simulate,
    /// Tabulate the limit CDF and tail asymptotic.
    Limit,
    /// Classify the multiplier law.
    Diagnose,
    /// Levy-measure and truncated-moment convergence.
    Levy,
    /// Run one acceptance suite (S1..S6).
    Reproduce { suite: String },
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| LabError::Config("`--config` is required for this command".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.outputs = o.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<RunOutcome> {
    match &cli.command {
        Command::Reproduce { suite } => {
            let suite: Suite = suite.parse()?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            run_reproduce(suite, cli.seed.unwrap_or(DEFAULT_SEED), &out)
        }
        cmd => {
            let cfg = load(cli)?;
            let out = cfg.outputs.clone();
            match cmd {
                Command::Simulate => run_simulate(&cfg, &out),
                Command::Limit => run_limit(&cfg, &out),
                Command::Diagnose => run_diagnose(&cfg, &out),
                Command::Levy => run_levy(&cfg, &out),
                Command::Reproduce { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 3 } else { 0 };
            return ExitCode::from(code);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: configuration error: field `threads`: must be at least 1");
            return ExitCode::from(3);
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| dispatch(&cli));
    match &result {
        Ok(o) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            for fail in &o.failures {
                eprintln!("FAILED {fail}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
