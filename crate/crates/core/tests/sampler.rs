mod common;

use std::collections::BTreeMap;

use anqs_core::anqs::{AnqsModel, Architecture, MaskingContext, PruneStrategy};
use anqs_core::physicality::PhysicalityOracle;
use anqs_core::sampler::{sample_binomial, sample_statistics, StreamKey};
use anqs_core::symmetry::SymmetryEnsemble;
use anqs_core::BasisVector;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

const SIGNIFICANCE: f64 = 1e-3;

fn chi_square_passes(statistic: f64, dof: usize) -> bool {
    statistic
        <= ChiSquared::new(dof as f64)
            .unwrap()
            .inverse_cdf(1.0 - SIGNIFICANCE)
}

#[test]
fn binomial_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws: Vec<f64> = (0..4000)
        .map(|_| sample_binomial(1_000_000, 0.5, &mut rng).unwrap() as f64)
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    assert!((mean - 5e5).abs() < 5.0 * 500.0 / (draws.len() as f64).sqrt());
    assert!((var.sqrt() - 500.0).abs() < 25.0);
}

#[test]
fn binomial_goodness_of_fit() {
    for (n, p) in [(30u64, 0.3), (1000, 0.02), (400, 0.9)] {
        let mut rng = ChaCha8Rng::seed_from_u64(n);
        let draws = 100_000;
        let mut hist = vec![0u64; n as usize + 1];
        for _ in 0..draws {
            hist[sample_binomial(n, p, &mut rng).unwrap() as usize] += 1;
        }
        let pmf = Binomial::new(p, n).unwrap();
        // Pool adjacent outcomes until every bin expects at least five draws.
        let (mut stat, mut bins) = (0.0, 0);
        let (mut obs, mut exp) = (0.0, 0.0);
        for k in 0..=n {
            obs += hist[k as usize] as f64;
            exp += pmf.pmf(k) * draws as f64;
            if exp >= 5.0 {
                stat += (obs - exp).powi(2) / exp;
                bins += 1;
                obs = 0.0;
                exp = 0.0;
            }
        }
        stat += if exp > 0.0 {
            (obs - exp).powi(2) / exp
        } else {
            0.0
        };
        assert!(
            chi_square_passes(stat, bins),
            "n={n} p={p}: chi2 {stat} with {bins} bins"
        );
    }
}

fn frequencies(stats: &anqs_core::sampler::SamplingStatistics, states: &[BasisVector]) -> Vec<f64> {
    let counts: BTreeMap<u64, u64> = stats.entries.iter().map(|&(x, n)| (x.raw(), n)).collect();
    states
        .iter()
        .map(|x| *counts.get(&x.raw()).unwrap_or(&0) as f64 / stats.retained as f64)
        .collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let z: f64 = v.iter().sum();
    v.into_iter().map(|p| p / z).collect()
}

#[test]
fn empirical_frequencies_follow_born_distribution() {
    for (n, ne, d) in [(4, 2, 0), (6, 3, 2), (8, 4, 3)] {
        let e = SymmetryEnsemble::builder(n)
            .particle_number(ne)
            .unwrap()
            .build()
            .unwrap();
        let oracle = PhysicalityOracle::new(e.clone()).unwrap();
        let states = sector_states(&e);
        let model = AnqsModel::random(Architecture::new(n, 8), n as u64).unwrap();
        let n_samples = 1_000_000;
        for strategy in [
            PruneStrategy::MaskUnphysical(0),
            PruneStrategy::MaskUnphysical(d),
            PruneStrategy::DiscardUnphysical,
        ] {
            let ctx = MaskingContext::new(strategy, &oracle).unwrap();
            let stats = sample_statistics(&model, &ctx, n_samples, StreamKey::new(3, 1)).unwrap();
            assert!(stats.entries.iter().all(|&(x, c)| e.in_sector(x) && c > 0));
            assert_eq!(
                stats.retained,
                stats.entries.iter().map(|e| e.1).sum::<u64>()
            );
            if strategy == PruneStrategy::MaskUnphysical(0) {
                assert_eq!(stats.retained, n_samples);
            } else {
                assert!(stats.retained <= n_samples);
            }
            let tv = total_variation(
                &frequencies(&stats, &states),
                &normalized(born(&model, &ctx, &states)),
            );
            assert!(tv <= 0.02, "N={n} {strategy}: TV {tv}");
        }
    }
}

fn statistics_sample(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    states: &[BasisVector],
    n_samples: u64,
    rep: u64,
) -> Vec<u64> {
    let stats = sample_statistics(model, ctx, n_samples, StreamKey::new(99, rep)).unwrap();
    let mut out = vec![0u64; states.len() + 1];
    for &(x, c) in &stats.entries {
        out[states.binary_search(&x).unwrap()] += c;
    }
    out[states.len()] = n_samples - stats.retained;
    out
}

#[test]
fn statistics_match_independent_paths() {
    let cases = [
        (4usize, 2usize, PruneStrategy::MaskUnphysical(0), 3u64),
        (3, 1, PruneStrategy::DiscardUnphysical, 3),
        (4, 2, PruneStrategy::MaskUnphysical(1), 2),
    ];
    for (n, ne, strategy, n_samples) in cases {
        let e = SymmetryEnsemble::builder(n)
            .particle_number(ne)
            .unwrap()
            .build()
            .unwrap();
        let oracle = PhysicalityOracle::new(e.clone()).unwrap();
        let ctx = MaskingContext::new(strategy, &oracle).unwrap();
        let states = sector_states(&e);
        let model = AnqsModel::random(Architecture::new(n, 4), 21).unwrap();
        let reps = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut hist: BTreeMap<Vec<u64>, [u64; 2]> = BTreeMap::new();
        for rep in 0..reps {
            hist.entry(path_sample(&model, &ctx, &states, n_samples, &mut rng))
                .or_default()[0] += 1;
            hist.entry(statistics_sample(&model, &ctx, &states, n_samples, rep))
                .or_default()[1] += 1;
        }
        // Two-sample homogeneity test over the observed count vectors.
        let stat: f64 = hist
            .values()
            .map(|&[a, b]| (a as f64 - b as f64).powi(2) / (a + b) as f64)
            .sum();
        let dof = hist.len() - 1;
        assert!(
            chi_square_passes(stat, dof),
            "N={n} {strategy}: chi2 {stat} with {dof} dof"
        );
    }
}

#[test]
fn frontier_stays_within_sector_size() {
    let e = SymmetryEnsemble::builder(10)
        .particle_number(5)
        .unwrap()
        .build()
        .unwrap();
    let oracle = PhysicalityOracle::new(e.clone()).unwrap();
    let ctx = MaskingContext::new(PruneStrategy::MaskUnphysical(0), &oracle).unwrap();
    let model = AnqsModel::random(Architecture::new(10, 8), 2).unwrap();
    for n_samples in [1, 17, 100_000_000] {
        let stats = sample_statistics(&model, &ctx, n_samples, StreamKey::new(0, 1)).unwrap();
        assert_eq!(stats.retained, n_samples);
        assert!(stats.n_unique() as u64 <= n_samples.min(252));
    }
}
