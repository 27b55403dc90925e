//! Variational Monte Carlo: local energies, the energy and gradient
//! estimators, ADAM and the optimization loop.
//!
//! With count weights `w_l = n⁽ˡ⁾ / retained` over the unique samples,
//!
//! ```text
//! E_est = Σ_l w_l · H_loc(x⁽ˡ⁾)
//! ∇E    = 2·Re{ ⟨H_loc·O⟩ − ⟨H_loc⟩⟨O⟩ },   O = ∇_θ ln ψ*
//! ```
//!
//! Under MU(0) `retained = N_s`; under DU or MU(d>0) samples can be lost and
//! the weights are self-normalized over what was retained.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::anqs::{
    accumulate_log_psi_gradient, log_psi, log_psi_batch, AnqsModel, MaskingContext,
    LOG_ZERO_THRESHOLD,
};
use crate::error::{input_err, Error, Result};
use crate::exec;
use crate::pauli::QubitHamiltonian;
use crate::sampler::{sample_statistics, SamplingStatistics, StreamKey};
use crate::BasisVector;

/// Local energies are combined in chunks of this many samples before the
/// per-chunk gradients are summed in order.
const GRADIENT_CHUNK: usize = 8;

fn local_energy_from<F>(
    h: &QubitHamiltonian,
    ctx: &MaskingContext<'_>,
    x: BasisVector,
    log_psi_x: Complex64,
    mut lookup: F,
) -> Result<Complex64>
where
    F: FnMut(BasisVector) -> Complex64,
{
    if log_psi_x.re <= LOG_ZERO_THRESHOLD {
        return Err(Error::Contract(alloc::format!(
            "local energy requested at ψ({x}) = 0"
        )));
    }
    let ensemble = ctx.oracle().ensemble();
    let mut total = Complex64::new(0.0, 0.0);
    let mut leaked = false;
    h.for_each_connected(x, |y, h_yx| {
        if y != x && !ensemble.in_sector(y) {
            leaked = true;
            return;
        }
        let ly = if y == x { log_psi_x } else { lookup(y) };
        if ly.re <= LOG_ZERO_THRESHOLD {
            return;
        }
        // H_{xy} = conj(H_{yx}) for Hermitian H.
        total += h_yx.conj() * (ly - log_psi_x).exp();
    })?;
    debug_assert!(
        !leaked,
        "Hamiltonian connects {x} to configurations outside the symmetry sector"
    );
    Ok(total)
}

/// `H_loc(x) = Σ_{x′} H_{xx′} ψ(x′)/ψ(x)` of the masked ansatz.
///
/// Connected configurations outside the symmetry sector do not contribute.
pub fn local_energy(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    h: &QubitHamiltonian,
    x: BasisVector,
) -> Result<Complex64> {
    if h.n_qubits() != model.n_qubits() {
        return Err(input_err!(
            "Hamiltonian has {} qubits, model {}",
            h.n_qubits(),
            model.n_qubits()
        ));
    }
    local_energy_from(h, ctx, x, log_psi(model, ctx, x), |y| {
        log_psi(model, ctx, y)
    })
}

/// Local energies of all entries, evaluating `ln ψ` once per distinct
/// configuration (entries and their connections).
pub fn local_energies(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    h: &QubitHamiltonian,
    xs: &[BasisVector],
) -> Result<Vec<Complex64>> {
    if h.n_qubits() != model.n_qubits() {
        return Err(input_err!(
            "Hamiltonian has {} qubits, model {}",
            h.n_qubits(),
            model.n_qubits()
        ));
    }
    let ensemble = ctx.oracle().ensemble();
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut configs: Vec<BasisVector> = Vec::new();
    let mut intern = |y: BasisVector, configs: &mut Vec<BasisVector>| {
        index.entry(y.raw()).or_insert_with(|| {
            configs.push(y);
            configs.len() - 1
        });
    };
    for &x in xs {
        intern(x, &mut configs);
        h.for_each_connected(x, |y, _| {
            if ensemble.in_sector(y) {
                intern(y, &mut configs);
            }
        })?;
    }
    let amps = log_psi_batch(model, ctx, &configs);
    xs.iter()
        .map(|&x| {
            let lx = amps[index[&x.raw()]];
            local_energy_from(h, ctx, x, lx, |y| amps[index[&y.raw()]])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    /// `Re` of the weighted mean.
    pub value: f64,
    pub mean: Complex64,
    /// Weighted variance `Σ w |H_loc − mean|²`.
    pub variance: f64,
    pub n_unique: usize,
    pub retained: u64,
}

/// Weighted mean and variance `Σ w |H_loc − mean|²`; `weights` must sum to one.
pub fn weighted_moments(weights: &[f64], local_energies: &[Complex64]) -> (Complex64, f64) {
    assert_eq!(
        weights.len(),
        local_energies.len(),
        "weights not aligned with local energies"
    );
    let mean: Complex64 = weights
        .iter()
        .zip(local_energies)
        .map(|(&w, &e)| e * w)
        .sum();
    let variance = weights
        .iter()
        .zip(local_energies)
        .map(|(&w, &e)| w * (e - mean).norm_sqr())
        .sum();
    (mean, variance)
}

/// Weighted mean and variance of the local energies; `None` when no sample
/// was retained.
pub fn estimate_energy(
    stats: &SamplingStatistics,
    local_energies: &[Complex64],
) -> Option<EnergyEstimate> {
    assert_eq!(
        stats.entries.len(),
        local_energies.len(),
        "local energies not aligned with entries"
    );
    if stats.is_empty() {
        return None;
    }
    let (mean, variance) = weighted_moments(&stats.weights(), local_energies);
    Some(EnergyEstimate {
        value: mean.re,
        mean,
        variance,
        n_unique: stats.n_unique(),
        retained: stats.retained,
    })
}

/// `2·Re{⟨H_loc·O⟩ − ⟨H_loc⟩⟨O⟩}` under normalized `weights`.
pub fn weighted_gradient(
    weights: &[f64],
    local_energies: &[Complex64],
    scores: &[Vec<Complex64>],
) -> Vec<f64> {
    assert_eq!(
        weights.len(),
        local_energies.len(),
        "weights not aligned with local energies"
    );
    assert_eq!(
        weights.len(),
        scores.len(),
        "weights not aligned with scores"
    );
    let dim = scores.first().map_or(0, Vec::len);
    let mut e_o = alloc::vec![Complex64::new(0.0, 0.0); dim];
    let mut o_mean = alloc::vec![Complex64::new(0.0, 0.0); dim];
    let mut e_mean = Complex64::new(0.0, 0.0);
    for ((&w, &e), o) in weights.iter().zip(local_energies).zip(scores) {
        e_mean += e * w;
        for r in 0..dim {
            e_o[r] += e * o[r] * w;
            o_mean[r] += o[r] * w;
        }
    }
    e_o.iter()
        .zip(&o_mean)
        .map(|(eo, om)| 2.0 * (eo - e_mean * om).re)
        .collect()
}

/// [`weighted_gradient`] over sampling statistics from explicit score
/// vectors; `None` when no sample was retained.
pub fn estimate_gradient(
    stats: &SamplingStatistics,
    local_energies: &[Complex64],
    scores: &[Vec<Complex64>],
) -> Option<Vec<f64>> {
    assert_eq!(
        stats.entries.len(),
        local_energies.len(),
        "local energies not aligned with entries"
    );
    if stats.is_empty() {
        return None;
    }
    Some(weighted_gradient(&stats.weights(), local_energies, scores))
}

/// The same gradient without materializing score vectors: one backward pass
/// per configuration seeded with `w_l (H_loc − ⟨H_loc⟩)`.
pub fn weighted_gradient_fused(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    xs: &[BasisVector],
    weights: &[f64],
    local_energies: &[Complex64],
) -> Vec<f64> {
    assert_eq!(
        xs.len(),
        weights.len(),
        "weights not aligned with configurations"
    );
    let (mean, _) = weighted_moments(weights, local_energies);
    let seeds: Vec<(BasisVector, Complex64)> = xs
        .iter()
        .zip(weights)
        .zip(local_energies)
        .map(|((&x, &w), &e)| (x, (e - mean) * w))
        .collect();
    let partials = exec::map_chunks(&seeds, GRADIENT_CHUNK, |chunk| {
        let mut g = alloc::vec![0.0; model.n_params()];
        for &(x, c) in chunk {
            // 2·Re{c·O} = 2·(Re c·∂Re ln ψ + Im c·∂Im ln ψ)
            accumulate_log_psi_gradient(model, ctx, x, 2.0 * c.re, 2.0 * c.im, &mut g);
        }
        g
    });
    let mut grad = alloc::vec![0.0; model.n_params()];
    for p in partials {
        for (g, v) in grad.iter_mut().zip(p) {
            *g += v;
        }
    }
    grad
}

/// [`weighted_gradient_fused`] over sampling statistics; `None` when no
/// sample was retained.
pub fn estimate_gradient_fused(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    stats: &SamplingStatistics,
    local_energies: &[Complex64],
) -> Option<Vec<f64>> {
    assert_eq!(
        stats.entries.len(),
        local_energies.len(),
        "local energies not aligned with entries"
    );
    if stats.is_empty() {
        return None;
    }
    let xs: Vec<BasisVector> = stats.entries.iter().map(|e| e.0).collect();
    Some(weighted_gradient_fused(
        model,
        ctx,
        &xs,
        &stats.weights(),
        local_energies,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected ADAM over real parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, n_params: usize) -> Self {
        Self {
            config,
            m: alloc::vec![0.0; n_params],
            v: alloc::vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "parameter length mismatch");
        assert_eq!(grad.len(), self.m.len(), "gradient length mismatch");
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        self.t += 1;
        let c1 = 1.0 - libm::pow(beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(beta2, self.t as f64);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (libm::sqrt(v_hat) + epsilon);
        }
    }
}

/// Piecewise-constant sample counts: `(last iteration, N_s)` stages, the final
/// stage open-ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSchedule {
    bounded: Vec<(u64, u64)>,
    last: u64,
}

impl BatchSchedule {
    pub fn new(bounded: Vec<(u64, u64)>, last: u64) -> Result<Self> {
        if bounded.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Config(
                "schedule bounds must be strictly increasing".into(),
            ));
        }
        if bounded.iter().any(|&(_, n)| n == 0) || last == 0 {
            return Err(Error::Config(
                "schedule sample counts must be positive".into(),
            ));
        }
        Ok(Self { bounded, last })
    }

    pub fn constant(n_samples: u64) -> Result<Self> {
        Self::new(Vec::new(), n_samples)
    }

    /// `10⁵ (t ≤ 100), 10⁶ (t ≤ 200), 10⁷ (t ≤ 1000), 10⁸` afterwards.
    pub fn full() -> Self {
        Self {
            bounded: alloc::vec![(100, 100_000), (200, 1_000_000), (1000, 10_000_000)],
            last: 100_000_000,
        }
    }

    /// The full schedule scaled by 10⁻².
    pub fn desk() -> Self {
        Self {
            bounded: alloc::vec![(100, 1_000), (200, 10_000), (1000, 100_000)],
            last: 1_000_000,
        }
    }

    /// `N_s` at iteration `t` (1-based).
    pub fn n_samples(&self, t: u64) -> u64 {
        self.bounded
            .iter()
            .find(|&&(bound, _)| t <= bound)
            .map_or(self.last, |&(_, n)| n)
    }

    pub fn stages(&self) -> (&[(u64, u64)], u64) {
        (&self.bounded, self.last)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmcConfig {
    pub iterations: u64,
    pub seed: u64,
    pub schedule: BatchSchedule,
    pub adam: AdamConfig,
    /// Abort after this many consecutive iterations without retained samples.
    pub max_consecutive_empty: u64,
    /// Call [`Observer::on_checkpoint`] every this many iterations (0 = never).
    pub checkpoint_every: u64,
    /// End the run early once the running minimum is at or below this energy.
    pub stop_below: Option<f64>,
}

impl Default for VmcConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            seed: 0,
            schedule: BatchSchedule::desk(),
            adam: AdamConfig::default(),
            max_consecutive_empty: 100,
            checkpoint_every: 0,
            stop_below: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: u64,
    /// `NaN` for skipped iterations.
    pub energy: f64,
    pub variance: f64,
    pub n_unique: usize,
    pub retained: u64,
    pub wall_ms: u64,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub min_energy: Option<f64>,
    pub iteration_of_min: Option<u64>,
}

impl RunTrace {
    fn push(&mut self, rec: IterationRecord) {
        if !rec.skipped && self.min_energy.is_none_or(|m| rec.energy < m) {
            self.min_energy = Some(rec.energy);
            self.iteration_of_min = Some(rec.iteration);
        }
        self.records.push(rec);
    }
}

/// Hooks for reporting and timing; the loop itself has no IO or clock.
pub trait Observer {
    /// Milliseconds since the run started.
    fn elapsed_ms(&self) -> u64 {
        0
    }

    fn on_iteration(&mut self, _record: &IterationRecord, _model: &AnqsModel) -> Result<()> {
        Ok(())
    }

    fn on_checkpoint(&mut self, _iteration: u64, _model: &AnqsModel) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct Silent;

impl Observer for Silent {}

/// One sample → estimate → update step. Returns the record (without timing)
/// and whether parameters were updated.
pub fn iterate(
    model: &mut AnqsModel,
    ctx: &MaskingContext<'_>,
    h: &QubitHamiltonian,
    adam: &mut Adam,
    n_samples: u64,
    stream: StreamKey,
) -> Result<IterationRecord> {
    let stats = sample_statistics(model, ctx, n_samples, stream)?;
    let skipped = IterationRecord {
        iteration: stream.iteration,
        energy: f64::NAN,
        variance: f64::NAN,
        n_unique: 0,
        retained: 0,
        wall_ms: 0,
        skipped: true,
    };
    if stats.is_empty() {
        return Ok(skipped);
    }
    let xs: Vec<BasisVector> = stats.entries.iter().map(|e| e.0).collect();
    let energies = local_energies(model, ctx, h, &xs)?;
    let estimate = estimate_energy(&stats, &energies).expect("nonempty statistics");
    let grad = estimate_gradient_fused(model, ctx, &stats, &energies).expect("nonempty statistics");
    let mut params = model.real_params();
    adam.step(&mut params, &grad);
    model.set_real_params(&params)?;
    Ok(IterationRecord {
        iteration: stream.iteration,
        energy: estimate.value,
        variance: estimate.variance,
        n_unique: estimate.n_unique,
        retained: estimate.retained,
        wall_ms: 0,
        skipped: false,
    })
}

/// Minimizes the variational energy of `model` in the sector of `ctx`.
pub fn run<O: Observer + ?Sized>(
    model: &mut AnqsModel,
    ctx: &MaskingContext<'_>,
    h: &QubitHamiltonian,
    config: &VmcConfig,
    observer: &mut O,
) -> Result<RunTrace> {
    if h.n_qubits() != model.n_qubits() || ctx.oracle().n_qubits() != model.n_qubits() {
        return Err(input_err!(
            "qubit counts differ: Hamiltonian {}, model {}, sector {}",
            h.n_qubits(),
            model.n_qubits(),
            ctx.oracle().n_qubits()
        ));
    }
    let mut adam = Adam::new(config.adam, model.n_params());
    let mut trace = RunTrace::default();
    let mut empty_run = 0u64;
    for t in 1..=config.iterations {
        let n_samples = config.schedule.n_samples(t);
        let mut rec = iterate(
            model,
            ctx,
            h,
            &mut adam,
            n_samples,
            StreamKey::new(config.seed, t),
        )?;
        rec.wall_ms = observer.elapsed_ms();
        if rec.skipped {
            empty_run += 1;
            if empty_run >= config.max_consecutive_empty {
                observer.on_iteration(&rec, model)?;
                trace.push(rec);
                return Err(Error::Aborted(alloc::format!(
                    "{empty_run} consecutive iterations retained no samples (last at iteration {t})"
                )));
            }
        } else {
            empty_run = 0;
        }
        observer.on_iteration(&rec, model)?;
        trace.push(rec);
        if config.checkpoint_every > 0 && t % config.checkpoint_every == 0 {
            observer.on_checkpoint(t, model)?;
        }
        if config
            .stop_below
            .is_some_and(|target| trace.min_energy.is_some_and(|m| m <= target))
        {
            break;
        }
    }
    Ok(trace)
}
