use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volarb::commands::{self, Table};
use volarb::config::RunConfig;
use volarb::{Error, Result};

#[derive(Parser)]
#[command(name = "volarb", version, about = "Option-spread arbitrage against a misspecified volatility model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (tables are also printed to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `backtest.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `backtest.n_paths`.
    #[arg(long, global = true)]
    paths: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Optimal strikes for each configured method.
    Strikes,
    /// Butterfly and risk-reversal profits against the optimum.
    BfRr,
    /// Margin-constrained optimum and objective scan.
    Margin,
    /// Monte-Carlo backtest; writes pnl.csv, terminal.csv and manifest.json.
    Backtest,
}

fn emit(table: &Table, out: Option<&Path>, name: &str) -> Result<()> {
    print!("{}", table.to_csv());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), table.to_csv())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let path = cli.config.ok_or_else(|| Error::Config {
        field: "--config".into(),
        message: "a configuration file is required".into(),
    })?;
    let mut cfg = RunConfig::from_file(&path)?;
    if let Some(seed) = cli.seed {
        cfg.backtest.seed = seed;
    }
    if let Some(n) = cli.paths {
        cfg.backtest.n_paths = n;
    }
    cfg.validate()?;
    let out = cli.out.or_else(|| cfg.out.as_ref().map(PathBuf::from));

    match cli.command {
        Command::Strikes => emit(&commands::cmd_strikes(&cfg)?, out.as_deref(), "strikes.csv"),
        Command::BfRr => emit(&commands::cmd_bf_rr(&cfg)?, out.as_deref(), "bf_rr.csv"),
        Command::Margin => {
            let t = commands::cmd_margin(&cfg)?;
            emit(&t.summary, out.as_deref(), "margin.csv")?;
            if let Some(dir) = out.as_deref() {
                std::fs::write(dir.join("margin_scan.csv"), t.scan.to_csv())?;
            }
            Ok(())
        }
        Command::Backtest => {
            let dir = out.ok_or_else(|| Error::Config {
                field: "out".into(),
                message: "backtest needs an output directory".into(),
            })?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = commands::threads_from_env()? {
                pool = pool.num_threads(n);
            }
            let pool = pool.build().map_err(|e| Error::Io(e.to_string()))?;
            let (result, files) = pool.install(|| commands::cmd_backtest(&cfg, &dir))?;
            println!(
                "terminal median {} (q25 {}, q75 {}) over {} paths; wrote {}",
                result.stats.terminal_median(),
                result.stats.q25.last().unwrap_or(&f64::NAN),
                result.stats.q75.last().unwrap_or(&f64::NAN),
                result.terminal.len(),
                files.manifest.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("volarb: {e}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
