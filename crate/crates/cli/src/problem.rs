//! Turns a [`RunConfig`] into a Hamiltonian, a target sector and a pruning
//! strategy.

use anqs_core::anqs::PruneStrategy;
use anqs_core::ed::build_heisenberg;
use anqs_core::fermion::{hf_state, jordan_wigner, IntegralSet};
use anqs_core::pauli::{discover_z2, QubitHamiltonian, ZMask};
use anqs_core::symmetry::{SymmetryDescriptor, SymmetryEnsemble};
use anqs_core::BasisVector;
use anyhow::{anyhow, bail, Context};

use crate::config::{parse_strategy, BuiltinModel, HamiltonianSource, RunConfig};
use crate::fcidump::parse_fcidump;
use crate::pauli_json::parse_hamiltonian;

/// A loaded Hamiltonian and, for FCIDUMP input, its integrals.
#[derive(Debug, Clone)]
pub struct LoadedHamiltonian {
    pub hamiltonian: QubitHamiltonian,
    pub integrals: Option<IntegralSet>,
}

pub fn load_hamiltonian(source: &HamiltonianSource) -> anyhow::Result<LoadedHamiltonian> {
    if let Some(path) = &source.pauli {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let hamiltonian =
            parse_hamiltonian(&text).with_context(|| format!("in {}", path.display()))?;
        return Ok(LoadedHamiltonian {
            hamiltonian,
            integrals: None,
        });
    }
    if let Some(path) = &source.fcidump {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let ints = parse_fcidump(&text).with_context(|| format!("in {}", path.display()))?;
        let hamiltonian = jordan_wigner(&ints)?;
        return Ok(LoadedHamiltonian {
            hamiltonian,
            integrals: Some(ints),
        });
    }
    match &source.builtin {
        Some(BuiltinModel::Heisenberg {
            n_qubits,
            coupling,
            periodic,
        }) => Ok(LoadedHamiltonian {
            hamiltonian: build_heisenberg(*n_qubits, *coupling, *periodic)?,
            integrals: None,
        }),
        None => bail!("no Hamiltonian source given"),
    }
}

/// One entry of the `symmetries` list: `name[:value]`.
#[derive(Debug, Clone, PartialEq)]
enum SymmetrySpec {
    ParticleNumber(Option<i64>),
    SpinProjection(Option<i64>),
    Magnetization(Option<i64>),
    Z2Auto,
    Z2(ZMask, Option<i8>),
}

fn parse_symmetry(text: &str, n_qubits: usize) -> anyhow::Result<SymmetrySpec> {
    let mut parts = text.trim().split(':');
    let name = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    let int = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| anyhow!("symmetry {text:?}: {s:?} is not an integer"))
    };
    let value = |rest: &[&str]| -> anyhow::Result<Option<i64>> {
        match rest {
            [] => Ok(None),
            [v] => int(v).map(Some),
            _ => bail!("symmetry {text:?}: too many fields"),
        }
    };
    match name {
        "particle_number" => Ok(SymmetrySpec::ParticleNumber(value(&rest)?)),
        "spin_projection" => Ok(SymmetrySpec::SpinProjection(value(&rest)?)),
        "magnetization" => Ok(SymmetrySpec::Magnetization(value(&rest)?)),
        "z2" => match rest.as_slice() {
            ["auto"] => Ok(SymmetrySpec::Z2Auto),
            [label] | [label, _] => {
                let mask = ZMask::parse(label.trim())?;
                if mask.n_qubits != n_qubits {
                    bail!(
                        "symmetry {text:?}: Z-string has {} letters, expected {n_qubits}",
                        mask.n_qubits
                    );
                }
                let eig = match rest.get(1) {
                    None => None,
                    Some(v) => match int(v)? {
                        1 => Some(1),
                        -1 => Some(-1),
                        other => {
                            bail!("symmetry {text:?}: Z2 eigenvalue must be +1 or -1, got {other}")
                        }
                    },
                };
                Ok(SymmetrySpec::Z2(mask, eig))
            }
            _ => bail!("symmetry {text:?}: expected z2:auto or z2:<IZ string>[:±1]"),
        },
        other => bail!("unknown symmetry {other:?}"),
    }
}

/// The sector, strategy and reference vector of a run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub hamiltonian: QubitHamiltonian,
    pub integrals: Option<IntegralSet>,
    pub ensemble: SymmetryEnsemble,
    pub strategy: PruneStrategy,
    pub reference: Option<BasisVector>,
}

/// Builds the ensemble named by `symmetries`. Entries without an explicit
/// value take the eigenvalue of `reference`; `z2:auto` needs `hamiltonian`.
pub fn build_ensemble(
    n_qubits: usize,
    symmetries: &[String],
    reference: Option<BasisVector>,
    hamiltonian: Option<&QubitHamiltonian>,
) -> anyhow::Result<SymmetryEnsemble> {
    let specs = symmetries
        .iter()
        .map(|s| parse_symmetry(s, n_qubits))
        .collect::<anyhow::Result<Vec<_>>>()?;
    build_from_specs(n_qubits, &specs, symmetries, reference, hamiltonian)
}

fn build_from_specs(
    n: usize,
    specs: &[SymmetrySpec],
    texts: &[String],
    reference: Option<BasisVector>,
    hamiltonian: Option<&QubitHamiltonian>,
) -> anyhow::Result<SymmetryEnsemble> {
    let mut descriptors = Vec::new();
    let mut s_ref = Vec::new();
    for (spec, text) in specs.iter().zip(texts) {
        let mut push = |d: SymmetryDescriptor, value: Option<i64>| -> anyhow::Result<()> {
            let v = match value {
                Some(v) => v,
                None => d.eigenvalue(reference.ok_or_else(|| {
                    anyhow!("{text:?} needs a reference vector: set `reference`, `n_electrons` or particle_number:<n_e>")
                })?),
            };
            descriptors.push(d);
            s_ref.push(v);
            Ok(())
        };
        match spec {
            SymmetrySpec::ParticleNumber(v) => push(SymmetryDescriptor::particle_number(n), *v)?,
            SymmetrySpec::SpinProjection(v) => push(SymmetryDescriptor::spin_projection(n)?, *v)?,
            SymmetrySpec::Magnetization(v) => push(SymmetryDescriptor::magnetization(n)?, *v)?,
            SymmetrySpec::Z2(mask, eig) => push(
                SymmetryDescriptor::z2(*mask)?,
                eig.map(|e| i64::from(e == -1)),
            )?,
            SymmetrySpec::Z2Auto => {
                let h = hamiltonian.ok_or_else(|| anyhow!("z2:auto needs a Hamiltonian"))?;
                for mask in discover_z2(h) {
                    push(SymmetryDescriptor::z2(mask)?, None)?;
                }
            }
        }
    }
    Ok(SymmetryEnsemble::new(n, descriptors, s_ref)?)
}

/// Reference vector implied by an explicit bit string or an electron count.
pub fn resolve_reference(
    n_qubits: usize,
    bits: Option<&str>,
    n_electrons: Option<usize>,
    symmetries: &[String],
) -> anyhow::Result<Option<BasisVector>> {
    if let Some(bits) = bits {
        let x: BasisVector = bits
            .parse()
            .map_err(|e| anyhow!("reference {bits:?}: {e}"))?;
        if x.len() != n_qubits {
            bail!(
                "reference {bits:?} has {} bits, expected {n_qubits}",
                x.len()
            );
        }
        return Ok(Some(x));
    }
    let from_symmetry = symmetries
        .iter()
        .map(|s| parse_symmetry(s, n_qubits))
        .collect::<anyhow::Result<Vec<_>>>()?
        .into_iter()
        .find_map(|s| match s {
            SymmetrySpec::ParticleNumber(Some(ne)) => Some(ne),
            _ => None,
        });
    let ne = match (n_electrons, from_symmetry) {
        (Some(a), Some(b)) if a as i64 != b => {
            bail!("n_electrons = {a} contradicts particle_number:{b}")
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => {
            Some(usize::try_from(b).map_err(|_| anyhow!("particle_number must be non-negative"))?)
        }
        (None, None) => None,
    };
    ne.map(|ne| hf_state(n_qubits, ne).map_err(Into::into))
        .transpose()
}

impl Problem {
    pub fn from_config(config: &RunConfig) -> anyhow::Result<Self> {
        let loaded = load_hamiltonian(&config.hamiltonian)?;
        Self::assemble(config, loaded)
    }

    pub fn assemble(config: &RunConfig, loaded: LoadedHamiltonian) -> anyhow::Result<Self> {
        let n = loaded.hamiltonian.n_qubits();
        let strategy = parse_strategy(&config.strategy)?;
        strategy.validate(n)?;
        let n_electrons = config
            .n_electrons
            .or(loaded.integrals.as_ref().map(|i| i.n_electrons));
        let reference = resolve_reference(
            n,
            config.reference.as_deref(),
            n_electrons,
            &config.symmetries,
        )?;
        let ensemble = build_ensemble(n, &config.symmetries, reference, Some(&loaded.hamiltonian))?;
        if config.check_symmetries && !ensemble.is_empty() {
            ensemble.check_hamiltonian(&loaded.hamiltonian, 1000, config.seed)?;
        }
        Ok(Problem {
            hamiltonian: loaded.hamiltonian,
            integrals: loaded.integrals,
            ensemble,
            strategy,
            reference,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }
}
