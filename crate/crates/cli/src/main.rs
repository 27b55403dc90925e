use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anqs::commands::{
    cmd_count_sector, cmd_discover_z2, cmd_ed, cmd_run, cmd_sample, statistics_json_lines,
    RunStatus,
};
use anqs::config::{HamiltonianSource, RunConfig};
use anqs::pauli_json::hamiltonian_to_json;
use anqs::problem::{build_ensemble, load_hamiltonian, resolve_reference, Problem};
use anyhow::bail;
use clap::{Args, Parser, Subcommand};

/// Variational Monte Carlo with symmetry-constrained autoregressive neural quantum states.
#[derive(Parser)]
#[command(name = "anqs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the ansatz; writes trace.csv, summary.json and checkpoints.
    Run {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Overrides the configured output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<u64>,
    },
    /// Exact ground energy of the configured sector.
    Ed {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Diagonalize in the full space instead of the sector.
        #[arg(long)]
        full: bool,
    },
    /// Sector sizes with and without Z2 symmetries.
    CountSector {
        #[arg(short, long, conflicts_with_all = ["qubits", "symmetry"])]
        config: Option<PathBuf>,
        /// Qubit count when no config is given.
        #[arg(long, requires = "symmetry")]
        qubits: Option<usize>,
        /// Symmetry such as particle_number:4 (repeatable).
        #[arg(long)]
        symmetry: Vec<String>,
        #[arg(long)]
        reference: Option<String>,
    },
    /// Independent Z-strings commuting with every term.
    DiscoverZ2 {
        /// Pauli JSON (`.json`) or FCIDUMP file.
        #[arg(long)]
        hamiltonian: PathBuf,
        /// Electron count for the Hartree–Fock reference.
        #[arg(long, conflicts_with = "reference")]
        electrons: Option<usize>,
        #[arg(long)]
        reference: Option<String>,
    },
    /// Draw sample statistics and print them as JSON lines.
    Sample {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "n")]
        n_samples: u64,
        /// Model checkpoint; a freshly initialized model otherwise.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Iteration index of the sampling stream.
        #[arg(long, default_value_t = 0)]
        iteration: u64,
    },
    /// Print the qubit Hamiltonian as Pauli JSON.
    ExportHamiltonian {
        #[arg(
            short,
            long,
            conflicts_with = "fcidump",
            required_unless_present = "fcidump"
        )]
        config: Option<PathBuf>,
        #[arg(long)]
        fcidump: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn source_for(path: &Path) -> HamiltonianSource {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        HamiltonianSource {
            pauli: Some(path.to_path_buf()),
            ..Default::default()
        }
    } else {
        HamiltonianSource {
            fcidump: Some(path.to_path_buf()),
            ..Default::default()
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run {
            cfg,
            output,
            seed,
            iterations,
        } => {
            let mut config = RunConfig::load(&cfg.config)?;
            if let Some(dir) = output {
                config.output = dir;
            }
            config.seed = seed.unwrap_or(config.seed);
            config.iterations = iterations.unwrap_or(config.iterations);
            let outcome = cmd_run(&config)?;
            print_json(&outcome.summary)?;
            if outcome.summary.status == RunStatus::Aborted {
                eprintln!(
                    "run aborted: {}",
                    outcome.summary.message.as_deref().unwrap_or_default()
                );
                return Ok(ExitCode::from(2));
            }
        }
        Command::Ed { cfg, full } => print_json(&cmd_ed(&RunConfig::load(&cfg.config)?, full)?)?,
        Command::CountSector {
            config,
            qubits,
            symmetry,
            reference,
        } => {
            let ensemble = match (config, qubits) {
                (Some(path), _) => Problem::from_config(&RunConfig::load(&path)?)?.ensemble,
                (None, Some(n)) => {
                    let x = resolve_reference(n, reference.as_deref(), None, &symmetry)?;
                    build_ensemble(n, &symmetry, x, None)?
                }
                (None, None) => bail!("give either --config or --qubits with --symmetry"),
            };
            print_json(&cmd_count_sector(&ensemble))?;
        }
        Command::DiscoverZ2 {
            hamiltonian,
            electrons,
            reference,
        } => {
            let loaded = load_hamiltonian(&source_for(&hamiltonian))?;
            let n = loaded.hamiltonian.n_qubits();
            let electrons = electrons.or(loaded.integrals.as_ref().map(|i| i.n_electrons));
            let x = resolve_reference(n, reference.as_deref(), electrons, &[])?;
            print_json(&cmd_discover_z2(&loaded.hamiltonian, x))?;
        }
        Command::Sample {
            cfg,
            n_samples,
            checkpoint,
            iteration,
        } => {
            let config = RunConfig::load(&cfg.config)?;
            let stats = cmd_sample(&config, n_samples, checkpoint.as_deref(), iteration)?;
            print!("{}", statistics_json_lines(&stats));
        }
        Command::ExportHamiltonian {
            config,
            fcidump,
            out,
        } => {
            let source = match (config, fcidump) {
                (Some(path), _) => RunConfig::load(&path)?.hamiltonian,
                (None, Some(path)) => source_for(&path),
                (None, None) => unreachable!("clap requires one source"),
            };
            let json = hamiltonian_to_json(&load_hamiltonian(&source)?.hamiltonian);
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => print!("{json}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
