use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anqs::fcidump::{parse_fcidump, write_fcidump};
use anqs_core::fermion::IntegralSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn anqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anqs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn short_h2_config(dir: &Path) -> PathBuf {
    let text = format!(
        "symmetries = [\"particle_number:2\", \"spin_projection:0\", \"z2:auto\"]\n\
         iterations = 40\nseed = 3\nwall_clock = false\ncheckpoint_every = 20\n\
         [hamiltonian]\nfcidump = {:?}\n[network]\nhidden = 8\n",
        fixtures().join("h2_sto3g.fcidump")
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_h2_config(dir.path());
    let config = config.to_str().unwrap();
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let summary = json(&anqs(&[
            "run",
            "-c",
            config,
            "--output",
            out.to_str().unwrap(),
        ]));
        assert_eq!(summary["status"], "completed");
        assert_eq!(summary["iterations_completed"], 40);
        assert!(out.join("checkpoint_000020.json").exists());
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert_eq!(String::from_utf8_lossy(&traces[0]).lines().count(), 41);
}

#[test]
fn sampling_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_h2_config(dir.path());
    let out = dir.path().join("run");
    json(&anqs(&[
        "run",
        "-c",
        config.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]));
    let ck = out.join("model.json");
    let sample = anqs(&[
        "sample",
        "-c",
        config.to_str().unwrap(),
        "--n",
        "1000",
        "--checkpoint",
        ck.to_str().unwrap(),
    ]);
    assert!(sample.status.success());
    let total: u64 = String::from_utf8(sample.stdout)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["n"]
                .as_u64()
                .unwrap()
        })
        .sum();
    assert_eq!(total, 1000);
}

#[test]
fn exact_energies_match_fixture_metadata() {
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("h2_sto3g.meta.json")).unwrap(),
    )
    .unwrap();
    let report = json(&anqs(&[
        "ed",
        "-c",
        fixtures().join("h2.toml").to_str().unwrap(),
    ]));
    assert!(
        (report["energy"].as_f64().unwrap() - meta["fci_energy"].as_f64().unwrap()).abs() < 1e-8
    );
    assert!(
        (report["reference_energy"].as_f64().unwrap() - meta["hf_energy"].as_f64().unwrap()).abs()
            < 1e-8
    );
    assert_eq!(report["dimension"], 2);
}

#[test]
fn count_sector_without_config() {
    let counts = json(&anqs(&[
        "count-sector",
        "--qubits",
        "36",
        "--symmetry",
        "particle_number:28",
        "--symmetry",
        "spin_projection:0",
    ]));
    assert_eq!(counts["without_z2"], 9_363_600);
    let counts = json(&anqs(&[
        "count-sector",
        "-c",
        fixtures().join("h2.toml").to_str().unwrap(),
    ]));
    assert_eq!(counts, serde_json::json!({ "with_z2": 2, "without_z2": 4 }));
}

#[test]
fn discover_z2_reads_both_formats() {
    let toy = json(&anqs(&[
        "discover-z2",
        "--hamiltonian",
        fixtures().join("toy_zz.json").to_str().unwrap(),
    ]));
    assert_eq!(toy, serde_json::json!([{ "z": "ZZ", "eigenvalue": null }]));
    let from_fcidump = json(&anqs(&[
        "discover-z2",
        "--hamiltonian",
        fixtures().join("h2_sto3g.fcidump").to_str().unwrap(),
    ]));
    let from_json = json(&anqs(&[
        "discover-z2",
        "--hamiltonian",
        fixtures().join("h2_sto3g.json").to_str().unwrap(),
        "--electrons",
        "2",
    ]));
    assert_eq!(from_fcidump, from_json);
    assert!(from_json
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["eigenvalue"].is_i64()));
}

#[test]
fn exported_hamiltonian_matches_fixture() {
    let out = anqs(&[
        "export-hamiltonian",
        "--fcidump",
        fixtures().join("h2_sto3g.fcidump").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let exported =
        anqs::pauli_json::parse_hamiltonian(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let stored = anqs::pauli_json::parse_hamiltonian(
        &std::fs::read_to_string(fixtures().join("h2_sto3g.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(exported, stored);
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "iterations = 10\n[hamiltonian]\n").unwrap();
    let out = anqs(&["run", "-c", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

fn integral_set() -> impl Strategy<Value = IntegralSet> {
    (1usize..=3, 0usize..=6, any::<u64>()).prop_map(|(m, ne, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ints = IntegralSet::zeros(m, ne.min(2 * m));
        ints.core_energy = rng.random_range(-5.0..5.0);
        for p in 0..m {
            for q in 0..=p {
                ints.set_one_body(p, q, rng.random_range(-1.0..1.0));
                for r in 0..m {
                    for s in 0..=r {
                        if rng.random_bool(0.7) {
                            ints.set_two_body(p, q, r, s, rng.random_range(-1.0..1.0));
                        }
                    }
                }
            }
        }
        ints
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fcidump_round_trip(ints in integral_set()) {
        prop_assert_eq!(parse_fcidump(&write_fcidump(&ints)).unwrap(), ints);
    }
}
