use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qzd_cli::error::CliError;
use qzd_cli::sweep::{self, Ranges};
use qzd_cli::{presets, run_config, RunConfig, RunTarget, Summary};

#[derive(Parser)]
#[command(name = "qzd", version, about = "Quantum Zeno dynamics of a driven cavity field")]
struct Cli {
    /// Output directory (overrides the config's `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fock-space dimension (overrides the config's `dim`).
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Suppress progress and warnings on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML configuration.
    Run { config: PathBuf },
    /// Run a configuration at every point of a ranges file.
    Sweep { config: PathBuf, ranges: PathBuf },
    /// Run a bundled preset.
    Preset { name: String },
    /// List the bundled presets.
    ListPresets,
}

fn out_dir(cli: &Cli, cfg: &RunConfig, fallback: &str) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| Path::new("qzd-out").join(cfg.name.as_deref().unwrap_or(fallback)))
}

fn report(summary: &Summary, dir: &Path) {
    println!("{}: {} steps, dim {}", summary.name, summary.steps_run, summary.dim);
    println!("  final energy {:.6}", summary.final_energy);
    if let Some(f) = summary.fidelity {
        println!(
            "  fidelity {:.6} against {}",
            f,
            summary.fidelity_reference.as_deref().unwrap_or("target")
        );
    }
    println!(
        "  truncation {} (max top population {:.3e})",
        if summary.truncation.ok { "ok" } else { "FAILED" },
        summary.truncation.max_top_population
    );
    println!("  wrote {} files to {}", summary.files.len(), dir.display());
}

fn execute(cli: &Cli, mut cfg: RunConfig, fallback: &str) -> Result<(), CliError> {
    if cli.dim.is_some() {
        cfg.dim = cli.dim;
    }
    let dir = out_dir(cli, &cfg, fallback);
    let summary = run_config(
        &cfg,
        &RunTarget {
            out: Some(dir.clone()),
            quiet: cli.quiet,
        },
    )?;
    if !cli.quiet {
        report(&summary, &dir);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(config)?;
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
            execute(cli, cfg, &stem)
        }
        Command::Preset { name } => execute(cli, presets::load(name)?, name),
        Command::ListPresets => {
            for p in presets::PRESETS {
                println!("{:<14} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Sweep { config, ranges } => {
            let text = std::fs::read_to_string(config).map_err(|source| CliError::Io {
                path: config.display().to_string(),
                source,
            })?;
            let base: toml::Value = toml::from_str(&text).map_err(|e| CliError::Parse {
                path: config.display().to_string(),
                message: e.to_string(),
            })?;
            let cfg = RunConfig::from_toml_str(&text, &config.display().to_string())?;
            let ranges = Ranges::load(ranges)?;
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep").to_string();
            let dir = out_dir(cli, &cfg, &stem);
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let rows = sweep::sweep(&base, &ranges, cli.dim)?;
            let path = dir.join("sweep.csv");
            let file = File::create(&path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            sweep::write_table(&rows, BufWriter::new(file)).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if !cli.quiet {
                let failed = rows.iter().filter(|r| r.result.is_err()).count();
                println!("{} points ({failed} failed), table in {}", rows.len(), path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
