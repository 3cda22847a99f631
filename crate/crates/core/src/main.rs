use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use gravphase::cli::{exit, init_threads, parse_config, run, Subcommand};

#[derive(Parser)]
#[command(name = "gravphase", version, about = "Gravitational phase calculations and checks")]
enum Cli {
    /// Direct vs gauge-mapped wavepacket evolution.
    GaugeCheck(Common),
    /// Phase between two stationary heights.
    Cow(Common),
    /// Drop interferometer phase series (and fringes).
    Drop(Common),
    /// Rindler proper time and its cubic phase.
    Rindler(Common),
    /// Weak-field clock budget.
    Gr(Common),
    /// Cubic and quadratic fits of the drop phase.
    Fit(Common),
    /// Cubic fits over a list of mass multipliers.
    Sweep(Common),
    /// Every acceptance criterion, one line each.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::FAILED } else { exit::OK });
        }
    };
    let (cmd, common) = match cli {
        Cli::GaugeCheck(c) => (Subcommand::GaugeCheck, c),
        Cli::Cow(c) => (Subcommand::Cow, c),
        Cli::Drop(c) => (Subcommand::Drop, c),
        Cli::Rindler(c) => (Subcommand::Rindler, c),
        Cli::Gr(c) => (Subcommand::Gr, c),
        Cli::Fit(c) => (Subcommand::Fit, c),
        Cli::Sweep(c) => (Subcommand::Sweep, c),
        Cli::Report(c) => (Subcommand::Report, c),
    };

    if let Err(e) = init_threads(std::env::var("GRAVPHASE_THREADS").ok().as_deref()) {
        eprintln!("gravphase: {e}");
        return ExitCode::from(exit::FAILED);
    }
    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("gravphase: {}: {e}", common.config.display());
            return ExitCode::from(exit::IO);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(errors) => {
            for e in errors {
                eprintln!("{}: {e}", common.config.display());
            }
            return ExitCode::from(exit::FAILED);
        }
    };
    let out_dir = common.out.unwrap_or_else(|| cfg.out.clone());
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let code = run(&cfg, cmd, &out_dir, &mut lock);
    let _ = lock.flush();
    ExitCode::from(code)
}
