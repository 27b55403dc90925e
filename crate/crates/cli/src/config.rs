//! TOML run configuration.
//!
//! ```toml
//! symmetries = ["particle_number:2", "spin_projection:0", "z2:auto"]
//! strategy = "mu-0"
//! iterations = 2000
//! seed = 1
//! schedule = "desk"
//!
//! [hamiltonian]
//! fcidump = "h2_sto3g.fcidump"
//!
//! [network]
//! hidden = 64
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use anqs_core::anqs::{LeakyRelu, PruneStrategy, DEFAULT_INIT_SCALE};
use anqs_core::vmc::{AdamConfig, BatchSchedule};
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinModel {
    /// `J Σ ¼(XX + YY + ZZ)` over nearest neighbours.
    Heisenberg {
        n_qubits: usize,
        #[serde(default = "one")]
        coupling: f64,
        #[serde(default)]
        periodic: bool,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fcidump: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    /// `"desk"` or `"full"`.
    Preset(String),
    /// `stages = [[last_iteration, n_samples], …]`, then `last` samples.
    Custom { stages: Vec<(u64, u64)>, last: u64 },
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::Preset("desk".into())
    }
}

impl ScheduleSpec {
    pub fn resolve(&self) -> anyhow::Result<BatchSchedule> {
        match self {
            ScheduleSpec::Preset(name) => match name.as_str() {
                "desk" => Ok(BatchSchedule::desk()),
                "full" => Ok(BatchSchedule::full()),
                other => {
                    bail!("unknown schedule preset {other:?} (expected \"desk\" or \"full\")")
                }
            },
            ScheduleSpec::Custom { stages, last } => Ok(BatchSchedule::new(stages.clone(), *last)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub hidden: usize,
    /// `"negated"` (`−0.01·x` below zero) or `"standard"` (`0.01·x`).
    pub leaky_relu: LeakyReluName,
    pub init_scale: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            leaky_relu: LeakyReluName::Negated,
            init_scale: DEFAULT_INIT_SCALE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakyReluName {
    Negated,
    Standard,
}

impl From<LeakyReluName> for LeakyRelu {
    fn from(name: LeakyReluName) -> Self {
        match name {
            LeakyReluName::Negated => LeakyRelu::NegatedSlope,
            LeakyReluName::Standard => LeakyRelu::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamSection {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamSection {
    fn default() -> Self {
        let d = AdamConfig::default();
        Self {
            learning_rate: d.learning_rate,
            beta1: d.beta1,
            beta2: d.beta2,
            epsilon: d.epsilon,
        }
    }
}

impl From<AdamSection> for AdamConfig {
    fn from(a: AdamSection) -> Self {
        AdamConfig {
            learning_rate: a.learning_rate,
            beta1: a.beta1,
            beta2: a.beta2,
            epsilon: a.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub symmetries: Vec<String>,
    /// Reference bit string fixing the sector; defaults to the Hartree–Fock
    /// vector when the electron count is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_electrons: Option<usize>,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub checkpoint_every: u64,
    #[serde(default = "default_max_empty")]
    pub max_consecutive_empty: u64,
    /// Record elapsed milliseconds in the trace; `false` writes zeros so
    /// repeated runs produce identical files.
    #[serde(default = "yes")]
    pub wall_clock: bool,
    /// Probe the Hamiltonian for terms that leave the sector before running.
    #[serde(default = "yes")]
    pub check_symmetries: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_below: Option<f64>,
    pub hamiltonian: HamiltonianSource,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub adam: AdamSection,
}

fn default_strategy() -> String {
    "mu-0".into()
}

fn default_iterations() -> u64 {
    1000
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_max_empty() -> u64 {
    100
}

fn yes() -> bool {
    true
}

pub fn parse_strategy(text: &str) -> anyhow::Result<PruneStrategy> {
    let lower = text.trim().to_ascii_lowercase();
    match lower.as_str() {
        "du" => Ok(PruneStrategy::DiscardUnphysical),
        "mu" => Ok(PruneStrategy::MaskUnphysical(0)),
        _ => match lower.strip_prefix("mu-").map(str::parse::<usize>) {
            Some(Ok(d)) => Ok(PruneStrategy::MaskUnphysical(d)),
            _ => bail!("invalid strategy {text:?} (expected \"du\" or \"mu-<d>\")"),
        },
    }
}

impl RunConfig {
    /// Parses TOML and resolves relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut config: RunConfig = toml::from_str(text)?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.hamiltonian.pauli.as_mut() {
            join(p);
        }
        if let Some(p) = self.hamiltonian.fcidump.as_mut() {
            join(p);
        }
        join(&mut self.output);
    }

    /// Checks everything that does not need the Hamiltonian.
    pub fn validate(&self) -> anyhow::Result<()> {
        let h = &self.hamiltonian;
        let sources = [h.pauli.is_some(), h.fcidump.is_some(), h.builtin.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            bail!("[hamiltonian] needs exactly one of `pauli`, `fcidump` or `builtin`");
        }
        parse_strategy(&self.strategy)?;
        self.schedule.resolve()?;
        if self.network.hidden == 0 {
            bail!("network.hidden must be positive");
        }
        if !(self.network.init_scale.is_finite() && self.network.init_scale >= 0.0) {
            bail!("network.init_scale must be finite and non-negative");
        }
        if self.max_consecutive_empty == 0 {
            bail!("max_consecutive_empty must be positive");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        Ok(())
    }
}
