use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use longmem::harness::{
    self, config::parse_overrides, Config, ConfigError, HarnessError, HarnessResult, KeySpec,
};

#[derive(Parser)]
#[command(
    name = "longmem",
    version,
    about = "Long-memory simulation and estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one series from a model
    Simulate(Common),
    /// Estimate the memory parameter of a series
    Estimate(Common),
    /// GPH table for stable-duration counts
    Table1(Common),
    /// GPH table for LMSD-duration counts
    Table2(Common),
    /// Averaged log-log periodograms of both count models
    Figure(Common),
    /// Variance-time Hurst estimates for counts
    VarianceTime(Common),
    /// List the configuration keys of a command with their defaults
    Keys { command: String },
}

#[derive(Args)]
struct Common {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// worker threads (0: all cores); never affects results
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// further `--key value` overrides
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    rest: Vec<String>,
}

type Runner = fn(&Config, &Path) -> HarnessResult<Vec<PathBuf>>;

fn lookup(name: &str) -> Option<(Vec<KeySpec>, Runner)> {
    Some(match name {
        "simulate" => (harness::simulate_schema(), harness::cmd_simulate as Runner),
        "estimate" => (harness::estimate_schema(), harness::cmd_estimate),
        "table1" => (harness::table1_schema(), harness::cmd_table1),
        "table2" => (harness::table2_schema(), harness::cmd_table2),
        "figure" => (harness::figure_schema(), harness::cmd_figure),
        "variance-time" => (harness::variance_time_schema(), harness::cmd_variance_time),
        _ => return None,
    })
}

fn run(name: &str, args: Common) -> HarnessResult<Vec<PathBuf>> {
    let (schema, runner) = lookup(name).expect("known command");
    let mut args = args;
    let mut overrides = Vec::new();
    for (k, v) in parse_overrides(&args.rest)? {
        let bad = |e: String| ConfigError::BadValue {
            key: k.clone(),
            message: e,
        };
        match k.as_str() {
            "out_dir" => args.out_dir = PathBuf::from(v),
            "config" => args.config = Some(PathBuf::from(v)),
            "threads" => {
                args.threads = v
                    .parse()
                    .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?
            }
            _ => overrides.push((k, v)),
        }
    }
    let has = |k: &str| schema.iter().any(|s| s.key == k);
    if let Some(s) = args.seed.filter(|_| has("seed")) {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(r) = args.reps.filter(|_| has("reps")) {
        overrides.push(("reps".into(), r.to_string()));
    }
    let cfg = Config::load(&schema, args.config.as_deref(), &overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .expect("thread pool");
    pool.install(|| runner(&cfg, &args.out_dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Estimate(a) => ("estimate", a),
        Command::Table1(a) => ("table1", a),
        Command::Table2(a) => ("table2", a),
        Command::Figure(a) => ("figure", a),
        Command::VarianceTime(a) => ("variance-time", a),
        Command::Keys { command } => {
            let Some((schema, _)) = lookup(&command) else {
                eprintln!("error: unknown command '{command}'");
                return ExitCode::from(2);
            };
            for k in schema {
                println!(
                    "{:<18} {:<14} {}",
                    k.key,
                    format!("[{}]", k.default),
                    k.help
                );
            }
            return ExitCode::SUCCESS;
        }
    };
    match run(name, args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => report(e),
    }
}

fn report(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    let mut src = std::error::Error::source(&e);
    while let Some(s) = src {
        eprintln!("  caused by: {s}");
        src = s.source();
    }
    ExitCode::from(e.exit_code() as u8)
}
