//! Autoregressive neural quantum state.
//!
//! `ψ(x) = Π_i ψ_i(x_i | x_{<i})`, each conditional produced by its own
//! complex-weight MLP: `tanh` → split leaky ReLU → a normalizing layer
//! `z − ½·LogSumExp(2·Re z)` so that `|ψ_i(0|·)|² + |ψ_i(1|·)|² = 1`.
//! Subnetwork `i` reads the `i` preceding bits encoded as `±1`; the first one
//! has no input and reduces to its biases.
//!
//! Parameters are complex; the real parameter vector θ interleaves the real
//! and imaginary part of every weight (`θ_{2k} = Re w_k`, `θ_{2k+1} = Im w_k`).

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{input_err, Error, Result};
use crate::exec;
use crate::physicality::PhysicalityOracle;
use crate::BasisVector;

/// Stand-in for `ln 0`. Probabilities derived from log-amplitudes at or below
/// [`LOG_ZERO_THRESHOLD`] are exactly zero.
pub const LOG_ZERO: f64 = -1e30;
pub const LOG_ZERO_THRESHOLD: f64 = -1e29;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Born probability of a log-amplitude, honoring the [`LOG_ZERO`] sentinel.
#[inline]
pub fn born_probability(log_amp: Complex64) -> f64 {
    if log_amp.re <= LOG_ZERO_THRESHOLD {
        0.0
    } else {
        libm::exp(2.0 * log_amp.re)
    }
}

#[inline]
fn is_log_zero(log_amp: Complex64) -> bool {
    log_amp.re <= LOG_ZERO_THRESHOLD
}

/// Multiplier on the `1/√fan_in` standard deviation of freshly drawn weights.
///
/// At unit scale the first-layer complex tanh often lands near its poles and
/// the initial distribution collapses onto a few configurations, which
/// sampling never recovers from.
pub const DEFAULT_INIT_SCALE: f64 = 0.1;

/// Negative branch of the split leaky ReLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeakyRelu {
    /// `x ↦ −0.01·x` for `x < 0`.
    #[default]
    NegatedSlope,
    /// `x ↦ 0.01·x` for `x < 0`.
    Standard,
}

impl LeakyRelu {
    #[inline]
    fn slope(self) -> f64 {
        match self {
            LeakyRelu::NegatedSlope => -0.01,
            LeakyRelu::Standard => 0.01,
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        if x >= 0.0 {
            x
        } else {
            self.slope() * x
        }
    }

    #[inline]
    fn derivative(self, x: f64) -> f64 {
        if x >= 0.0 {
            1.0
        } else {
            self.slope()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub n_qubits: usize,
    pub hidden: usize,
    pub leaky_relu: LeakyRelu,
}

impl Architecture {
    pub fn new(n_qubits: usize, hidden: usize) -> Self {
        Self {
            n_qubits,
            hidden,
            leaky_relu: LeakyRelu::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > crate::MAX_QUBITS {
            return Err(input_err!(
                "qubit count must lie in 1..={}",
                crate::MAX_QUBITS
            ));
        }
        if self.hidden == 0 {
            return Err(input_err!("hidden width must be positive"));
        }
        Ok(())
    }
}

/// Offsets of the weight blocks of one subnetwork inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Layout {
    inputs: usize,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
    end: usize,
}

impl Layout {
    fn new(start: usize, inputs: usize, h: usize) -> Self {
        let w1 = start;
        let b1 = w1 + h * inputs;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let w3 = b2 + h;
        let b3 = w3 + 2 * h;
        Self {
            inputs,
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
            end: b3 + 2,
        }
    }
}

/// Intermediate values of one conditional forward pass.
struct Activations {
    a1: Vec<Complex64>,
    z2: Vec<Complex64>,
    a2: Vec<Complex64>,
    probs: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnqsModel {
    arch: Architecture,
    seed: u64,
    weights: Vec<Complex64>,
    layouts: Vec<Layout>,
}

impl AnqsModel {
    /// All weights zero: every conditional is uniform.
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let mut layouts = Vec::with_capacity(arch.n_qubits);
        let mut start = 0;
        for i in 0..arch.n_qubits {
            let l = Layout::new(start, i, arch.hidden);
            start = l.end;
            layouts.push(l);
        }
        Ok(Self {
            arch,
            seed: 0,
            weights: alloc::vec![ZERO; start],
            layouts,
        })
    }

    /// [`AnqsModel::random_scaled`] with [`DEFAULT_INIT_SCALE`].
    pub fn random(arch: Architecture, seed: u64) -> Result<Self> {
        Self::random_scaled(arch, seed, DEFAULT_INIT_SCALE)
    }

    /// Real and imaginary parts of each weight and bias drawn from
    /// `N(0, scale²/fan_in)`, deterministic in `seed`.
    pub fn random_scaled(arch: Architecture, seed: u64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(input_err!(
                "initialization scale must be finite and non-negative, got {scale}"
            ));
        }
        let mut model = Self::zeros(arch)?;
        model.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = arch.hidden;
        for l in model.layouts.clone() {
            let blocks = [
                (l.w1, l.b1, l.inputs.max(1)),
                (l.b1, l.w2, l.inputs.max(1)),
                (l.w2, l.b2, h),
                (l.b2, l.w3, h),
                (l.w3, l.b3, h),
                (l.b3, l.end, h),
            ];
            for (from, to, fan_in) in blocks {
                let std_dev = scale / libm::sqrt(fan_in as f64);
                for w in &mut model.weights[from..to] {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *w = Complex64::new(re * std_dev, im * std_dev);
                }
            }
        }
        Ok(model)
    }

    /// Rebuilds a model from a real parameter vector.
    pub fn from_real_params(arch: Architecture, seed: u64, params: &[f64]) -> Result<Self> {
        let mut model = Self::zeros(arch)?;
        model.seed = seed;
        model.set_real_params(params)?;
        Ok(model)
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn n_qubits(&self) -> usize {
        self.arch.n_qubits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of real parameters.
    pub fn n_params(&self) -> usize {
        2 * self.weights.len()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Complex64] {
        &mut self.weights
    }

    pub fn real_params(&self) -> Vec<f64> {
        self.weights.iter().flat_map(|w| [w.re, w.im]).collect()
    }

    pub fn set_real_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(input_err!(
                "expected {} real parameters, got {}",
                self.n_params(),
                params.len()
            ));
        }
        for (w, p) in self.weights.iter_mut().zip(params.chunks_exact(2)) {
            *w = Complex64::new(p[0], p[1]);
        }
        Ok(())
    }

    /// Range of real parameters owned by subnetwork `i`.
    pub fn subnet_param_range(&self, i: usize) -> core::ops::Range<usize> {
        let l = &self.layouts[i];
        2 * l.w1..2 * l.end
    }

    fn forward(&self, i: usize, prefix: BasisVector) -> ([Complex64; 2], Activations) {
        let l = &self.layouts[i];
        let h = self.arch.hidden;
        let w = &self.weights;
        let leaky = self.arch.leaky_relu;

        let mut a1 = w[l.b1..l.b1 + h].to_vec();
        for k in 0..l.inputs {
            let up = prefix.bit(k) == 1;
            for (j, a) in a1.iter_mut().enumerate() {
                let wjk = w[l.w1 + j * l.inputs + k];
                if up {
                    *a += wjk;
                } else {
                    *a -= wjk;
                }
            }
        }
        for a in &mut a1 {
            *a = a.tanh();
        }

        let mut z2 = w[l.b2..l.b2 + h].to_vec();
        for (j, z) in z2.iter_mut().enumerate() {
            let row = &w[l.w2 + j * h..l.w2 + (j + 1) * h];
            let (mut re, mut im) = (z.re, z.im);
            for (wk, ak) in row.iter().zip(&a1) {
                re += wk.re * ak.re - wk.im * ak.im;
                im += wk.re * ak.im + wk.im * ak.re;
            }
            *z = Complex64::new(re, im);
        }
        let a2: Vec<Complex64> = z2
            .iter()
            .map(|z| Complex64::new(leaky.apply(z.re), leaky.apply(z.im)))
            .collect();

        let mut z3 = [w[l.b3], w[l.b3 + 1]];
        for (c, z) in z3.iter_mut().enumerate() {
            let row = &w[l.w3 + c * h..l.w3 + (c + 1) * h];
            for (wk, ak) in row.iter().zip(&a2) {
                *z += wk * ak;
            }
        }
        let (r0, r1) = (2.0 * z3[0].re, 2.0 * z3[1].re);
        let m = r0.max(r1);
        let lse = m + libm::log(libm::exp(r0 - m) + libm::exp(r1 - m));
        let out = [z3[0] - 0.5 * lse, z3[1] - 0.5 * lse];
        let probs = [libm::exp(r0 - lse), libm::exp(r1 - lse)];
        (out, Activations { a1, z2, a2, probs })
    }

    /// Backpropagates the real functional `f = α·Re out_b + β·Im out_b` of
    /// subnetwork `i`, adding `∂f/∂θ` into `grad` (real parameter layout).
    #[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
    fn backward(
        &self,
        i: usize,
        prefix: BasisVector,
        act: &Activations,
        b: u8,
        alpha: f64,
        beta: f64,
        grad: &mut [f64],
    ) {
        let l = &self.layouts[i];
        let h = self.arch.hidden;
        let w = &self.weights;
        let leaky = self.arch.leaky_relu;
        // Cogradients g = ∂f/∂Re z + i·∂f/∂Im z.
        let mut g3 = [ZERO; 2];
        for (c, g) in g3.iter_mut().enumerate() {
            let hit = if c == b as usize { 1.0 } else { 0.0 };
            *g = Complex64::new(alpha * (hit - act.probs[c]), beta * hit);
        }

        let mut ga2 = alloc::vec![ZERO; h];
        for (c, g) in g3.iter().enumerate() {
            grad[2 * (l.b3 + c)] += g.re;
            grad[2 * (l.b3 + c) + 1] += g.im;
            for j in 0..h {
                let idx = l.w3 + c * h + j;
                let gw = g * act.a2[j].conj();
                grad[2 * idx] += gw.re;
                grad[2 * idx + 1] += gw.im;
                ga2[j] += w[idx].conj() * g;
            }
        }

        let gz2: Vec<Complex64> = ga2
            .iter()
            .zip(&act.z2)
            .map(|(g, z)| {
                Complex64::new(leaky.derivative(z.re) * g.re, leaky.derivative(z.im) * g.im)
            })
            .collect();

        let mut ga1 = alloc::vec![ZERO; h];
        for (j, g) in gz2.iter().enumerate() {
            grad[2 * (l.b2 + j)] += g.re;
            grad[2 * (l.b2 + j) + 1] += g.im;
            let base = l.w2 + j * h;
            let (gre, gim) = (g.re, g.im);
            for k in 0..h {
                let a = act.a1[k];
                // g · conj(a)
                grad[2 * (base + k)] += gre * a.re + gim * a.im;
                grad[2 * (base + k) + 1] += gim * a.re - gre * a.im;
                let wk = w[base + k];
                // conj(w) · g
                ga1[k] += Complex64::new(wk.re * gre + wk.im * gim, wk.re * gim - wk.im * gre);
            }
        }

        for (j, (g, a)) in ga1.iter().zip(&act.a1).enumerate() {
            let dtanh = (Complex64::new(1.0, 0.0) - a * a).conj();
            let gz = dtanh * g;
            grad[2 * (l.b1 + j)] += gz.re;
            grad[2 * (l.b1 + j) + 1] += gz.im;
            for k in 0..l.inputs {
                let u = if prefix.bit(k) == 1 { 1.0 } else { -1.0 };
                let idx = l.w1 + j * l.inputs + k;
                grad[2 * idx] += gz.re * u;
                grad[2 * idx + 1] += gz.im * u;
            }
        }
    }

    /// Raw log-amplitudes `(ln ψ_i(0|x_{<i}), ln ψ_i(1|x_{<i}))` of subnetwork `i`
    /// (0-based) for a prefix of exactly `i` bits.
    pub fn conditional_log_amps(&self, i: usize, prefix: BasisVector) -> Result<[Complex64; 2]> {
        if i >= self.n_qubits() {
            return Err(input_err!(
                "subnetwork {i} out of range for {} qubits",
                self.n_qubits()
            ));
        }
        if prefix.len() != i {
            return Err(input_err!(
                "subnetwork {i} needs a prefix of {i} bits, got {}",
                prefix.len()
            ));
        }
        Ok(self.forward(i, prefix).0)
    }
}

/// How unphysical subtrees are handled during sampling and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneStrategy {
    /// Discard samples routed into unphysical subtrees; conditionals are untouched.
    DiscardUnphysical,
    /// Mask conditionals at the first `N − d` levels so that no sample is lost
    /// there; the remaining `d` levels behave like `DiscardUnphysical`.
    MaskUnphysical(usize),
}

impl PruneStrategy {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            PruneStrategy::MaskUnphysical(d) if d >= n_qubits => Err(Error::Config(
                alloc::format!("MU-{d} needs d < N = {n_qubits}"),
            )),
            _ => Ok(()),
        }
    }
}

impl core::fmt::Display for PruneStrategy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PruneStrategy::DiscardUnphysical => f.write_str("du"),
            PruneStrategy::MaskUnphysical(d) => write!(f, "mu-{d}"),
        }
    }
}

/// A pruning strategy bound to a physicality oracle.
#[derive(Debug, Clone, Copy)]
pub struct MaskingContext<'a> {
    strategy: PruneStrategy,
    oracle: &'a PhysicalityOracle,
}

impl<'a> MaskingContext<'a> {
    pub fn new(strategy: PruneStrategy, oracle: &'a PhysicalityOracle) -> Result<Self> {
        strategy.validate(oracle.n_qubits())?;
        Ok(Self { strategy, oracle })
    }

    pub fn strategy(&self) -> PruneStrategy {
        self.strategy
    }

    pub fn oracle(&self) -> &'a PhysicalityOracle {
        self.oracle
    }

    /// Whether conditionals at `depth` (0-based level) are masked.
    #[inline]
    pub fn is_masked_level(&self, depth: usize) -> bool {
        match self.strategy {
            PruneStrategy::DiscardUnphysical => false,
            PruneStrategy::MaskUnphysical(d) => depth + d < self.oracle.n_qubits(),
        }
    }

    /// Whether the represented state is restricted by masking (MU variants).
    fn masks(&self) -> bool {
        matches!(self.strategy, PruneStrategy::MaskUnphysical(_))
    }
}

/// Result of masking one node.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Masked {
    /// Raw conditionals pass through.
    Raw,
    /// Only the given bit is physical; the conditional is the constant `(0, 1)` pattern.
    Forced(u8),
}

fn mask_node(ctx: &MaskingContext<'_>, depth: usize, partial: &[i64]) -> Result<Masked> {
    if !ctx.is_masked_level(depth) {
        return Ok(Masked::Raw);
    }
    match ctx.oracle.child_physicality(depth, partial)? {
        (true, true) => Ok(Masked::Raw),
        (false, true) => Ok(Masked::Forced(1)),
        (true, false) => Ok(Masked::Forced(0)),
        (false, false) => unreachable!("child_physicality rejects unphysical nodes"),
    }
}

fn forced_log_amps(b: u8) -> [Complex64; 2] {
    let mut out = [Complex64::new(LOG_ZERO, 0.0); 2];
    out[b as usize] = ZERO;
    out
}

/// Conditional log-amplitudes at `depth` after masking. `partial` must be the
/// partial eigenvalue vector of `prefix` and the node must be physical.
pub fn masked_conditional_log_amps(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    depth: usize,
    prefix: BasisVector,
    partial: &[i64],
) -> Result<[Complex64; 2]> {
    match mask_node(ctx, depth, partial)? {
        Masked::Forced(b) => Ok(forced_log_amps(b)),
        Masked::Raw => model.conditional_log_amps(depth, prefix),
    }
}

/// `ln ψ(x)` of the (masked) ansatz. Under MU variants basis vectors outside
/// the target sector have amplitude zero and yield [`LOG_ZERO`].
pub fn log_psi(model: &AnqsModel, ctx: &MaskingContext<'_>, x: BasisVector) -> Complex64 {
    assert_eq!(x.len(), model.n_qubits(), "basis vector length mismatch");
    let ensemble = ctx.oracle.ensemble();
    if ctx.masks() && !ensemble.in_sector(x) {
        return Complex64::new(LOG_ZERO, 0.0);
    }
    let mut partial = ensemble.root();
    let mut total = ZERO;
    for depth in 0..model.n_qubits() {
        let b = x.bit(depth);
        let amps = match mask_node(ctx, depth, &partial).expect("in-sector prefixes are physical") {
            Masked::Forced(f) => forced_log_amps(f),
            Masked::Raw => model.forward(depth, x.prefix(depth)).0,
        };
        let a = amps[b as usize];
        if is_log_zero(a) {
            return Complex64::new(LOG_ZERO, 0.0);
        }
        total += a;
        partial = ensemble.step(&partial, depth, b);
    }
    total
}

/// `ln ψ` over a batch, order preserved.
pub fn log_psi_batch(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    xs: &[BasisVector],
) -> Vec<Complex64> {
    exec::map(xs, |&x| log_psi(model, ctx, x))
}

/// Adds `α·∂Re ln ψ(x)/∂θ + β·∂Im ln ψ(x)/∂θ` into `grad`.
///
/// Masked (constant) conditionals contribute nothing.
pub fn accumulate_log_psi_gradient(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    x: BasisVector,
    alpha: f64,
    beta: f64,
    grad: &mut [f64],
) {
    assert_eq!(
        grad.len(),
        model.n_params(),
        "gradient buffer length mismatch"
    );
    let ensemble = ctx.oracle.ensemble();
    let mut partial = ensemble.root();
    for depth in 0..model.n_qubits() {
        let b = x.bit(depth);
        if mask_node(ctx, depth, &partial).expect("in-sector prefixes are physical") == Masked::Raw
        {
            let prefix = x.prefix(depth);
            let (_, act) = model.forward(depth, prefix);
            model.backward(depth, prefix, &act, b, alpha, beta, grad);
        }
        partial = ensemble.step(&partial, depth, b);
    }
}

/// The score `O(x) = ∇_θ ln ψ*(x)`, i.e. `O_r = ∂Re ln ψ/∂θ_r − i·∂Im ln ψ/∂θ_r`.
pub fn score(model: &AnqsModel, ctx: &MaskingContext<'_>, x: BasisVector) -> Vec<Complex64> {
    let mut re = alloc::vec![0.0; model.n_params()];
    let mut im = alloc::vec![0.0; model.n_params()];
    accumulate_log_psi_gradient(model, ctx, x, 1.0, 0.0, &mut re);
    accumulate_log_psi_gradient(model, ctx, x, 0.0, 1.0, &mut im);
    re.into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, -i))
        .collect()
}
