use std::path::PathBuf;
use std::process::ExitCode;

use asymmetry_cli::{run_stage, CliError, RunConfig, Stage};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "asymmetry",
    version,
    about = "Return asymmetry and short-sale constraint pipeline"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input dataset directory (written by `simulate`).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override a config key, e.g. `--set min_panel_obs=40`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic market into the data directory.
    Simulate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_stocks: Option<usize>,
        /// `regime` or `null`.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Raw and rolling three-factor excess returns.
    Excess,
    /// Full-sample EGARCH(1,1) fits and normalized excess returns.
    Egarch,
    /// Per-stock asymmetry statistics and the cross-sectional summary table.
    Stats,
    /// Stock-by-window samples and fixed-effects regressions.
    Panel {
        /// `quarter` or `half_year`.
        #[arg(long)]
        windowing: Option<String>,
    },
    /// Distribution and interval-curve plot data.
    Figures,
    /// Every analysis stage in order.
    All {
        #[arg(long)]
        windowing: Option<String>,
    },
}

fn build(cli: &Cli) -> Result<(RunConfig, Stage), CliError> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &cli.common.config {
        cfg.apply_file(p)?;
    }
    let c = &cli.common;
    if let Some(d) = &c.data {
        cfg.data_dir = d.clone();
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = c.threads {
        cfg.threads = t;
    }
    for kv in &c.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    let stage = match &cli.command {
        Command::Simulate {
            seed,
            n_stocks,
            scenario,
        } => {
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(n) = n_stocks {
                cfg.n_stocks = *n;
            }
            if let Some(s) = scenario {
                cfg.set("scenario", s)?;
            }
            Stage::Simulate
        }
        Command::Excess => Stage::Excess,
        Command::Egarch => Stage::Egarch,
        Command::Stats => Stage::Stats,
        Command::Panel { windowing } | Command::All { windowing } => {
            if let Some(w) = windowing {
                cfg.set("windowing", w)?;
            }
            if matches!(cli.command, Command::Panel { .. }) {
                Stage::Panel
            } else {
                Stage::All
            }
        }
        Command::Figures => Stage::Figures,
    };
    Ok((cfg, stage))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(&cli).and_then(|(cfg, stage)| {
        if cfg.threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build_global()
                .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
        }
        run_stage(&cfg, stage)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
