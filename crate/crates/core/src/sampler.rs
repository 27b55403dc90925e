//! Autoregressive statistics sampling.
//!
//! Instead of drawing `N_s` individual samples, the sampling tree is walked
//! level by level carrying occurrence counts: a node entered by `n_in`
//! samples splits them into `n₀ ~ B(n_in, p(0|x_{<i}))` and `n₁ = n_in − n₀`.
//! Children with zero counts are dropped, and children whose subtree holds no
//! in-sector leaf are discarded. Under MU masking the conditionals already
//! route every count into the physical child, so nothing is lost at masked
//! levels.
//!
//! Each node draws from its own generator, seeded from
//! `(seed, iteration, depth, prefix)`, so results do not depend on the order
//! in which frontier nodes are processed.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::anqs::{born_probability, masked_conditional_log_amps, AnqsModel, MaskingContext};
use crate::error::{input_err, Error, Result};
use crate::exec;
use crate::BasisVector;

const PROBABILITY_SLACK: f64 = 1e-12;

/// Draws `k ~ Binomial(n, p)`.
///
/// `p` may exceed `[0, 1]` by at most `1e-12` (it is clamped); anything
/// further out is an input error.
pub fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Result<u64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(input_err!("binomial probability {p} outside [0, 1]"));
    }
    let p = p.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    let dist = Binomial::new(n, p).map_err(|e| input_err!("binomial({n}, {p}): {e}"))?;
    Ok(dist.sample(rng))
}

/// Identifies the random stream of one sampling pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub iteration: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64, iteration: u64) -> Self {
        Self { seed, iteration }
    }

    /// Generator for the node at `prefix` (its length is the depth).
    pub fn node_rng(&self, prefix: BasisVector) -> ChaCha8Rng {
        let mut h = splitmix64(self.seed);
        h = splitmix64(h ^ self.iteration);
        h = splitmix64(h ^ prefix.len() as u64);
        h = splitmix64(h ^ prefix.raw());
        ChaCha8Rng::seed_from_u64(h)
    }
}

/// A node of the sampling frontier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierNode {
    pub prefix: BasisVector,
    pub partial: Vec<i64>,
    pub count: u64,
}

/// Unique basis vectors with occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SamplingStatistics {
    /// Distinct in-sector vectors in lexicographic order with positive counts.
    pub entries: Vec<(BasisVector, u64)>,
    pub requested: u64,
    /// Sum of the entry counts.
    pub retained: u64,
}

impl SamplingStatistics {
    /// `N_unq`.
    pub fn n_unique(&self) -> usize {
        self.entries.len()
    }

    /// True when every sample was discarded (possible under DU).
    pub fn is_empty(&self) -> bool {
        self.retained == 0
    }

    /// Weights `n⁽ˡ⁾ / retained`.
    pub fn weights(&self) -> Vec<f64> {
        let total = self.retained as f64;
        self.entries
            .iter()
            .map(|&(_, n)| n as f64 / total)
            .collect()
    }
}

/// Splits `n_samples` down the sampling tree of the (masked) model.
pub fn sample_statistics(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    n_samples: u64,
    stream: StreamKey,
) -> Result<SamplingStatistics> {
    if n_samples == 0 {
        return Err(input_err!("at least one sample must be requested"));
    }
    let n = model.n_qubits();
    let oracle = ctx.oracle();
    if oracle.n_qubits() != n {
        return Err(input_err!(
            "model has {n} qubits but the symmetry sector has {}",
            oracle.n_qubits()
        ));
    }
    let ensemble = oracle.ensemble();
    let mut frontier = alloc::vec![FrontierNode {
        prefix: BasisVector::zeros(0),
        partial: ensemble.root(),
        count: n_samples
    }];

    for depth in 0..n {
        let splits: Vec<Result<[u64; 2]>> = exec::map(&frontier, |node| {
            let amps = masked_conditional_log_amps(model, ctx, depth, node.prefix, &node.partial)?;
            let (p0, p1) = (born_probability(amps[0]), born_probability(amps[1]));
            let p_zero = if p1 == 0.0 {
                1.0
            } else if p0 == 0.0 {
                0.0
            } else {
                p0 / (p0 + p1)
            };
            let mut rng = stream.node_rng(node.prefix);
            let n0 = sample_binomial(node.count, p_zero, &mut rng)?;
            Ok([n0, node.count - n0])
        });
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (node, split) in frontier.iter().zip(splits) {
            let split = split?;
            for b in 0..2u8 {
                let count = split[b as usize];
                if count == 0 {
                    continue;
                }
                let partial = ensemble.step(&node.partial, depth, b);
                if !oracle.is_phys(depth + 1, &partial) {
                    continue;
                }
                next.push(FrontierNode {
                    prefix: node.prefix.push(b),
                    partial,
                    count,
                });
            }
        }
        frontier = next;
    }

    let retained = frontier.iter().map(|f| f.count).sum();
    let entries: Vec<(BasisVector, u64)> =
        frontier.into_iter().map(|f| (f.prefix, f.count)).collect();
    debug_assert!(entries.iter().all(|&(x, _)| ensemble.in_sector(x)));
    if entries.iter().any(|&(x, _)| !ensemble.in_sector(x)) {
        return Err(Error::Contract(
            "sampler emitted an out-of-sector vector".into(),
        ));
    }
    Ok(SamplingStatistics {
        entries,
        requested: n_samples,
        retained,
    })
}
