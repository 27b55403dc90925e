//! Subcommand implementations. Each returns data; printing is left to `main`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anqs_core::anqs::{AnqsModel, Architecture, MaskingContext};
use anqs_core::ed::ground_energy;
use anqs_core::pauli::{discover_z2, QubitHamiltonian};
use anqs_core::physicality::{count_sector, PhysicalityOracle};
use anqs_core::sampler::{sample_statistics, SamplingStatistics, StreamKey};
use anqs_core::vmc::{run, IterationRecord, Observer, VmcConfig};
use anqs_core::{BasisVector, Error};
use anyhow::{bail, Context};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::problem::Problem;

/// `⟨x|H|x⟩`.
pub fn diagonal_energy(h: &QubitHamiltonian, x: BasisVector) -> anyhow::Result<f64> {
    let mut e = 0.0;
    h.for_each_connected(x, |y, v| {
        if y == x {
            e += v.re;
        }
    })?;
    Ok(e)
}

/// Runs `f` on a pool sized by `ANQS_THREADS`, else `threads`, else rayon's default.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> anyhow::Result<T> {
    let from_env = match std::env::var("ANQS_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .with_context(|| format!("ANQS_THREADS={v:?}"))?,
        ),
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = from_env.or(threads) {
        if n == 0 {
            bail!("thread count must be positive");
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?.install(f))
}

fn model_for(config: &RunConfig, n_qubits: usize) -> anyhow::Result<AnqsModel> {
    let mut arch = Architecture::new(n_qubits, config.network.hidden);
    arch.leaky_relu = config.network.leaky_relu.into();
    Ok(AnqsModel::random_scaled(
        arch,
        config.seed,
        config.network.init_scale,
    )?)
}

fn vmc_config(config: &RunConfig) -> anyhow::Result<VmcConfig> {
    Ok(VmcConfig {
        iterations: config.iterations,
        seed: config.seed,
        schedule: config.schedule.resolve()?,
        adam: config.adam.into(),
        max_consecutive_empty: config.max_consecutive_empty,
        checkpoint_every: config.checkpoint_every,
        stop_below: config.stop_below,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Ended early at the `stop_below` target.
    Stopped,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub min_energy: Option<f64>,
    pub iteration_of_min: Option<u64>,
    pub iterations_completed: u64,
    pub seed: u64,
    pub sector_size: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

const TRACE_HEADER: &str = "iter,energy,variance,n_unique,retained,wall_ms";

struct TraceWriter {
    out: BufWriter<File>,
    dir: PathBuf,
    start: Option<Instant>,
    rows: u64,
    best: Option<(f64, u64)>,
}

impl TraceWriter {
    fn io(e: std::io::Error) -> Error {
        Error::Aborted(format!("writing run output: {e}"))
    }
}

impl Observer for TraceWriter {
    fn elapsed_ms(&self) -> u64 {
        self.start.map_or(0, |s| s.elapsed().as_millis() as u64)
    }

    fn on_iteration(&mut self, r: &IterationRecord, _model: &AnqsModel) -> anqs_core::Result<()> {
        self.rows += 1;
        if !r.skipped && self.best.is_none_or(|(e, _)| r.energy < e) {
            self.best = Some((r.energy, r.iteration));
        }
        writeln!(
            self.out,
            "{},{:?},{:?},{},{},{}",
            r.iteration, r.energy, r.variance, r.n_unique, r.retained, r.wall_ms
        )
        .and_then(|_| self.out.flush())
        .map_err(Self::io)
    }

    fn on_checkpoint(&mut self, iteration: u64, model: &AnqsModel) -> anqs_core::Result<()> {
        let path = self.dir.join(format!("checkpoint_{iteration:06}.json"));
        std::fs::write(path, Checkpoint::capture(model, iteration).to_json()).map_err(Self::io)
    }
}

/// Optimizes the configured model, writing `trace.csv`, `summary.json`,
/// periodic checkpoints and the final `model.json` into the output directory.
pub fn cmd_run(config: &RunConfig) -> anyhow::Result<RunOutcome> {
    let problem = Problem::from_config(config)?;
    let sector_size = count_sector(&problem.ensemble);
    if sector_size == 0u32.into() {
        bail!("the symmetry sector is empty");
    }
    let oracle = PhysicalityOracle::new(problem.ensemble.clone())?;
    let ctx = MaskingContext::new(problem.strategy, &oracle)?;
    let mut model = model_for(config, problem.n_qubits())?;
    let vmc = vmc_config(config)?;

    let dir = &config.output;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let trace_path = dir.join("trace.csv");
    let mut out = BufWriter::new(
        File::create(&trace_path).with_context(|| format!("creating {}", trace_path.display()))?,
    );
    writeln!(out, "{TRACE_HEADER}")?;
    let mut writer = TraceWriter {
        out,
        dir: dir.clone(),
        start: config.wall_clock.then(Instant::now),
        rows: 0,
        best: None,
    };

    let result = with_threads(config.threads, || {
        run(&mut model, &ctx, &problem.hamiltonian, &vmc, &mut writer)
    })?;
    writer.out.flush()?;
    let (status, message) = match result {
        Ok(trace) if (trace.records.len() as u64) < config.iterations => (RunStatus::Stopped, None),
        Ok(_) => (RunStatus::Completed, None),
        Err(Error::Aborted(msg)) => (RunStatus::Aborted, Some(msg)),
        Err(e) => return Err(e.into()),
    };
    let iterations_completed = writer.rows;
    std::fs::write(
        dir.join("model.json"),
        Checkpoint::capture(&model, iterations_completed).to_json(),
    )?;
    let summary = Summary {
        status,
        message,
        min_energy: writer.best.map(|b| b.0),
        iteration_of_min: writer.best.map(|b| b.1),
        iterations_completed,
        seed: config.seed,
        sector_size: sector_size.to_string(),
        config: config.clone(),
    };
    let summary_path = dir.join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(RunOutcome {
        summary,
        trace_path,
        summary_path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdReport {
    pub energy: f64,
    pub dimension: usize,
    /// `⟨x_ref|H|x_ref⟩` when a reference vector is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_energy: Option<f64>,
}

/// Exact ground energy in the configured sector, or in the full space.
pub fn cmd_ed(config: &RunConfig, full_space: bool) -> anyhow::Result<EdReport> {
    let problem = Problem::from_config(config)?;
    let gs = with_threads(config.threads, || {
        if full_space {
            ground_energy(&problem.hamiltonian, None)
        } else {
            ground_energy(&problem.hamiltonian, Some(&problem.ensemble))
        }
    })??;
    let reference_energy = problem
        .reference
        .map(|x| diagonal_energy(&problem.hamiltonian, x))
        .transpose()?;
    Ok(EdReport {
        energy: gs.energy,
        dimension: gs.dimension,
        reference_energy,
    })
}

/// Basis size of the sector of the full ensemble and of its additive part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorCounts {
    pub with_z2: serde_json::Value,
    pub without_z2: serde_json::Value,
}

/// A JSON number when it fits in `u64`, else a decimal string.
fn json_count(n: BigUint) -> serde_json::Value {
    match u64::try_from(&n) {
        Ok(v) => v.into(),
        Err(_) => n.to_string().into(),
    }
}

pub fn cmd_count_sector(ensemble: &anqs_core::symmetry::SymmetryEnsemble) -> SectorCounts {
    SectorCounts {
        with_z2: json_count(count_sector(ensemble)),
        without_z2: json_count(count_sector(&ensemble.without_multiplicative())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Z2Report {
    pub z: String,
    /// `±1` on the reference vector, when one is known.
    pub eigenvalue: Option<i8>,
}

pub fn cmd_discover_z2(h: &QubitHamiltonian, reference: Option<BasisVector>) -> Vec<Z2Report> {
    discover_z2(h)
        .into_iter()
        .map(|m| Z2Report {
            z: m.label(),
            eigenvalue: reference.map(|x| if m.parity(x) == 0 { 1 } else { -1 }),
        })
        .collect()
}

/// Draws one batch of statistics from a checkpointed or freshly initialized model.
pub fn cmd_sample(
    config: &RunConfig,
    n_samples: u64,
    checkpoint: Option<&Path>,
    iteration: u64,
) -> anyhow::Result<SamplingStatistics> {
    let problem = Problem::from_config(config)?;
    let model = match checkpoint {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let model = Checkpoint::from_json(&text)?.restore()?;
            if model.n_qubits() != problem.n_qubits() {
                bail!(
                    "checkpoint has {} qubits, the Hamiltonian {}",
                    model.n_qubits(),
                    problem.n_qubits()
                );
            }
            model
        }
        None => model_for(config, problem.n_qubits())?,
    };
    let oracle = PhysicalityOracle::new(problem.ensemble)?;
    let ctx = MaskingContext::new(problem.strategy, &oracle)?;
    let stats = with_threads(config.threads, || {
        sample_statistics(
            &model,
            &ctx,
            n_samples,
            StreamKey::new(config.seed, iteration),
        )
    })??;
    Ok(stats)
}

/// JSON lines `{"x": "0110…", "n": count}`.
pub fn statistics_json_lines(stats: &SamplingStatistics) -> String {
    stats
        .entries
        .iter()
        .map(|(x, n)| serde_json::json!({ "x": x.to_string(), "n": n }).to_string() + "\n")
        .collect()
}
