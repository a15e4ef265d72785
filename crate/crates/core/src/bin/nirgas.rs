use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nirgas::steady::Method;
use nirgas::sweep::{self, RunConfig};

#[derive(Parser)]
#[command(name = "nirgas", version, about = "Steady-state index sweeps for a five-level chiral atomic medium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (δ21, r) sweep and export the result.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output file; defaults to the config's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        phases: Option<usize>,
    },
    /// Print the resolved default configuration.
    Defaults,
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Integrate,
    Scf,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_FLAGGED: u8 = 3;

fn load(path: &PathBuf) -> Result<RunConfig, ExitCode> {
    sweep::load_config(path).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    format: Format,
    workers: Option<usize>,
    method: Option<MethodArg>,
    phases: Option<usize>,
) -> Result<ExitCode, ExitCode> {
    let mut cfg = load(&config)?;
    if let Some(m) = method {
        cfg.solver.method = match m {
            MethodArg::Integrate => Method::TimeIntegration,
            MethodArg::Scf => Method::SelfConsistent,
        };
    }
    if let Some(k) = phases {
        cfg.phases = k;
    }
    if let Some(0) = workers {
        eprintln!("config error: --workers must be at least 1");
        return Err(ExitCode::from(EXIT_CONFIG));
    }
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return Err(ExitCode::from(EXIT_CONFIG));
    }
    let runtime = |e: nirgas::Error| {
        eprintln!("runtime failure: {e}");
        ExitCode::from(EXIT_RUNTIME)
    };
    log::info!(
        "sweeping {} detunings x {} pump rates, K = {}",
        cfg.detuning.count,
        cfg.pump_rates.len(),
        cfg.phases
    );
    let res = match workers {
        Some(w) => sweep::run_sweep_with_workers(&cfg, w),
        None => sweep::run_sweep(&cfg),
    }
    .map_err(runtime)?;

    match out.or_else(|| cfg.output.clone()) {
        Some(path) => match format {
            Format::Csv => sweep::export_csv(&res, &path),
            Format::Json => sweep::export_json(&res, &path),
        },
        None => {
            let stdout = io::stdout().lock();
            let r = match format {
                Format::Csv => sweep::write_csv(&res, stdout),
                Format::Json => sweep::write_json(&res, stdout),
            };
            r.and_then(|_| io::stdout().flush().map_err(Into::into))
        }
    }
    .map_err(runtime)?;

    let flagged = res.flagged_count();
    if flagged > 0 {
        eprintln!("{flagged} of {} points flagged", res.rows.len());
        Ok(ExitCode::from(EXIT_FLAGGED))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            format,
            workers,
            method,
            phases,
        } => run(config, out, format, workers, method, phases),
        Command::Defaults => {
            println!("{}", RunConfig::default().to_json_pretty());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => load(&config).map(|_| {
            println!("ok");
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|code| code)
}
