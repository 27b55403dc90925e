//! Model checkpoints: an architecture header plus the flat real parameter
//! vector (`re, im` per complex weight).

use anqs_core::anqs::{AnqsModel, Architecture, LeakyRelu};
use serde::{Deserialize, Serialize};

use crate::config::LeakyReluName;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub n_qubits: usize,
    pub hidden: usize,
    pub leaky_relu: LeakyReluName,
    pub seed: u64,
    /// Iterations completed when the checkpoint was taken.
    pub iteration: u64,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn capture(model: &AnqsModel, iteration: u64) -> Self {
        let arch = model.architecture();
        Self {
            n_qubits: arch.n_qubits,
            hidden: arch.hidden,
            leaky_relu: match arch.leaky_relu {
                LeakyRelu::NegatedSlope => LeakyReluName::Negated,
                LeakyRelu::Standard => LeakyReluName::Standard,
            },
            seed: model.seed(),
            iteration,
            params: model.real_params(),
        }
    }

    pub fn restore(&self) -> anyhow::Result<AnqsModel> {
        let mut arch = Architecture::new(self.n_qubits, self.hidden);
        arch.leaky_relu = self.leaky_relu.into();
        Ok(AnqsModel::from_real_params(arch, self.seed, &self.params)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
