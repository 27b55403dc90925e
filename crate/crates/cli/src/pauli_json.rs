//! Pauli-sum Hamiltonians as JSON:
//! `{"n_qubits": N, "constant": c, "terms": [{"coeff": [re, im], "pauli": "XXIZ"}]}`
//! with position 0 of each string acting on qubit 0.

use anqs_core::pauli::{PauliTerm, QubitHamiltonian};
use anqs_core::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub coeff: [f64; 2],
    pub pauli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub n_qubits: usize,
    #[serde(default)]
    pub constant: f64,
    pub terms: Vec<TermRecord>,
}

impl HamiltonianFile {
    pub fn from_hamiltonian(h: &QubitHamiltonian) -> Self {
        Self {
            n_qubits: h.n_qubits(),
            constant: h.constant_offset(),
            terms: h
                .terms()
                .iter()
                .map(|t| TermRecord {
                    coeff: [t.coeff.re, t.coeff.im],
                    pauli: t.label(),
                })
                .collect(),
        }
    }

    pub fn to_hamiltonian(&self) -> anyhow::Result<QubitHamiltonian> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, t) in self.terms.iter().enumerate() {
            if t.pauli.chars().count() != self.n_qubits {
                anyhow::bail!(
                    "term {k}: Pauli string {:?} does not have {} letters",
                    t.pauli,
                    self.n_qubits
                );
            }
            let coeff = Complex64::new(t.coeff[0], t.coeff[1]);
            terms.push(
                PauliTerm::parse(coeff, &t.pauli).map_err(|e| anyhow::anyhow!("term {k}: {e}"))?,
            );
        }
        Ok(QubitHamiltonian::new(self.n_qubits, self.constant, terms)?)
    }
}

pub fn parse_hamiltonian(text: &str) -> anyhow::Result<QubitHamiltonian> {
    let file: HamiltonianFile = serde_json::from_str(text)?;
    file.to_hamiltonian()
}

/// One term per line.
pub fn hamiltonian_to_json(h: &QubitHamiltonian) -> String {
    let file = HamiltonianFile::from_hamiltonian(h);
    let terms: Vec<String> = file
        .terms
        .iter()
        .map(|t| format!("    {}", serde_json::to_string(t).expect("serializable")))
        .collect();
    format!(
        "{{\n  \"n_qubits\": {},\n  \"constant\": {},\n  \"terms\": [\n{}\n  ]\n}}\n",
        file.n_qubits,
        serde_json::to_string(&file.constant).expect("finite constant"),
        terms.join(",\n")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n_qubits": 2, "constant": 0.5,
            "terms": [{"coeff": [1.0, 0.0], "pauli": "XX"}, {"coeff": [0.5, 0.0], "pauli": "ZZ"}]}"#;
        let h = parse_hamiltonian(text).unwrap();
        assert_eq!(h.constant_offset(), 0.5);
        assert_eq!(h.terms().len(), 2);
        assert_eq!(parse_hamiltonian(&hamiltonian_to_json(&h)).unwrap(), h);
    }

    #[test]
    fn rejects_malformed_terms() {
        assert!(parse_hamiltonian(
            r#"{"n_qubits": 2, "terms": [{"coeff": [1, 0], "pauli": "XXX"}]}"#
        )
        .is_err());
        assert!(parse_hamiltonian(
            r#"{"n_qubits": 2, "terms": [{"coeff": [1, 0], "pauli": "XQ"}]}"#
        )
        .is_err());
        assert!(parse_hamiltonian(
            r#"{"n_qubits": 2, "terms": [{"coeff": [1, 0.5], "pauli": "XX"}]}"#
        )
        .is_err());
        assert!(parse_hamiltonian(r#"{"n_qubits": 2, "terms": [], "extra": 1}"#).is_err());
    }
}
