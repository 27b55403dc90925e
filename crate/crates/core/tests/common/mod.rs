#![allow(dead_code)]

use std::collections::BTreeSet;

use anqs_core::anqs::{
    born_probability, log_psi, masked_conditional_log_amps, AnqsModel, MaskingContext,
};
use anqs_core::fermion::{jordan_wigner, IntegralSet};
use anqs_core::pauli::{Pauli, PauliTerm, QubitHamiltonian};
use anqs_core::symmetry::{Composition, SymmetryDescriptor, SymmetryEnsemble};
use anqs_core::vmc::local_energies;
use anqs_core::{BasisVector, Complex64};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(dim: usize) -> Matrix {
    vec![vec![c(0.0, 0.0); dim]; dim]
}

pub fn identity(dim: usize) -> Matrix {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

fn single(p: Pauli) -> Matrix {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => vec![vec![l, o], vec![o, l]],
        Pauli::X => vec![vec![o, l], vec![l, o]],
        Pauli::Y => vec![vec![o, -i], vec![i, o]],
        Pauli::Z => vec![vec![l, o], vec![o, -l]],
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (na, nb) = (a.len(), b.len());
    let mut m = zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    m[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut m = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn add_scaled(acc: &mut Matrix, m: &Matrix, s: Complex64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, v) in ra.iter_mut().zip(rm) {
            *a += s * v;
        }
    }
}

pub fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Dense matrix of a Pauli string by explicit Kronecker products, with basis
/// index `Σ_i x_i 2^i` (qubit 0 least significant).
pub fn pauli_string_matrix(letters: &[Pauli]) -> Matrix {
    let mut m = vec![vec![c(1.0, 0.0)]];
    for &p in letters.iter().rev() {
        m = kron(&m, &single(p));
    }
    m
}

pub fn hamiltonian_matrix(h: &QubitHamiltonian) -> Matrix {
    let dim = 1usize << h.n_qubits();
    let mut m = identity(dim);
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v *= h.constant_offset();
        }
    }
    for t in h.terms() {
        add_scaled(&mut m, &pauli_string_matrix(&t.letters()), t.coeff);
    }
    m
}

pub fn from_flat(flat: &[Complex64], dim: usize) -> Matrix {
    flat.chunks(dim).map(<[Complex64]>::to_vec).collect()
}

pub fn random_letters<R: Rng>(rng: &mut R, n: usize) -> Vec<Pauli> {
    (0..n)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
        .collect()
}

/// Hermitian Hamiltonian with real coefficients on random strings.
pub fn random_hamiltonian<R: Rng>(rng: &mut R, n: usize, n_terms: usize) -> QubitHamiltonian {
    let terms = (0..n_terms)
        .map(|_| {
            PauliTerm::new(c(rng.random_range(-1.0..1.0), 0.0), &random_letters(rng, n)).unwrap()
        })
        .collect();
    QubitHamiltonian::new(n, rng.random_range(-1.0..1.0), terms).unwrap()
}

/// Hamiltonian built from terms that commute with a hidden set of Z-strings.
pub fn random_symmetric_hamiltonian<R: Rng>(
    rng: &mut R,
    n: usize,
    n_terms: usize,
    hidden: &[u64],
) -> QubitHamiltonian {
    let mut terms = Vec::new();
    while terms.len() < n_terms {
        let letters = random_letters(rng, n);
        let flip: u64 = letters
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
            .map(|(i, _)| 1u64 << i)
            .sum();
        if hidden.iter().all(|m| (m & flip).count_ones().is_multiple_of(2)) {
            terms.push(PauliTerm::new(c(rng.random_range(-1.0..1.0), 0.0), &letters).unwrap());
        }
    }
    QubitHamiltonian::new(n, 0.0, terms).unwrap()
}

pub fn all_vectors(n: usize) -> impl Iterator<Item = BasisVector> {
    (0..1u64 << n).map(move |b| BasisVector::new(b, n))
}

/// Ensemble of random additive and multiplicative descriptors whose target is
/// taken from a random basis vector, so the sector is never empty.
pub fn random_ensemble<R: Rng + RngCore>(rng: &mut R, n: usize) -> SymmetryEnsemble {
    let mut descriptors = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let d = match rng.random_range(0..4) {
            0 => SymmetryDescriptor::particle_number(n),
            1 if n.is_multiple_of(2) => SymmetryDescriptor::spin_projection(n).unwrap(),
            2 => {
                let local = (0..n)
                    .map(|_| [rng.random_range(-2..=2), rng.random_range(-2..=2)])
                    .collect();
                SymmetryDescriptor::new(Composition::Additive, local, "random_additive").unwrap()
            }
            _ => {
                let mask = loop {
                    let m = rng.random::<u64>() & ((1u64 << n) - 1);
                    if m != 0 {
                        break m;
                    }
                };
                let local = (0..n).map(|i| [0, ((mask >> i) & 1) as i64]).collect();
                SymmetryDescriptor::new(Composition::Multiplicative, local, "random_parity")
                    .unwrap()
            }
        };
        descriptors.push(d);
    }
    let x_ref = BasisVector::new(rng.random(), n);
    SymmetryEnsemble::fix_sector(descriptors, x_ref).unwrap()
}

/// Brute force: does any completion of the prefix land in the sector?
pub fn brute_phys(e: &SymmetryEnsemble, prefix: BasisVector) -> bool {
    let n = e.n_qubits();
    let free = n - prefix.len();
    (0..1u64 << free)
        .any(|tail| e.in_sector(BasisVector::new(prefix.raw() | (tail << prefix.len()), n)))
}

pub fn sector_states(e: &SymmetryEnsemble) -> Vec<BasisVector> {
    let mut v: Vec<BasisVector> = all_vectors(e.n_qubits())
        .filter(|&x| e.in_sector(x))
        .collect();
    v.sort();
    v
}

/// Masked Born probabilities over `states` (not renormalized).
pub fn born(model: &AnqsModel, ctx: &MaskingContext<'_>, states: &[BasisVector]) -> Vec<f64> {
    states
        .iter()
        .map(|&x| born_probability(log_psi(model, ctx, x)))
        .collect()
}

/// Relative error `max|a − b| / max|b|`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Applies `ops` (rightmost first) to the occupation vector `x` using the
/// canonical sign `(−1)^{occupied modes below j}`.
pub fn apply_ladder(ops: &[(usize, bool)], mut x: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    for &(j, dagger) in ops.iter().rev() {
        let occupied = x >> j & 1 == 1;
        if occupied == dagger {
            return None;
        }
        if (x & ((1u64 << j) - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        x ^= 1 << j;
    }
    Some((sign, x))
}

/// Second-quantized Hamiltonian assembled directly in the occupation basis.
pub fn fermionic_matrix(ints: &IntegralSet) -> Matrix {
    let m = ints.n_spatial;
    let dim = 1usize << (2 * m);
    let mut h = identity(dim);
    for row in h.iter_mut() {
        for v in row.iter_mut() {
            *v *= ints.core_energy;
        }
    }
    let so = |k: usize, s: usize| 2 * k + s;
    let mut add = |coeff: f64, ops: &[(usize, bool)]| {
        for x in 0..dim as u64 {
            if let Some((sign, y)) = apply_ladder(ops, x) {
                h[y as usize][x as usize] += c(coeff * sign, 0.0);
            }
        }
    };
    for p in 0..m {
        for q in 0..m {
            for s in 0..2 {
                add(ints.one_body(p, q), &[(so(p, s), true), (so(q, s), false)]);
            }
        }
    }
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for t in 0..m {
                    for a in 0..2 {
                        for b in 0..2 {
                            add(
                                0.5 * ints.two_body(p, q, r, t),
                                &[
                                    (so(p, a), true),
                                    (so(r, b), true),
                                    (so(t, b), false),
                                    (so(q, a), false),
                                ],
                            );
                        }
                    }
                }
            }
        }
    }
    h
}

pub fn random_integrals(seed: u64, m: usize) -> IntegralSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ints = IntegralSet::zeros(m, rng.random_range(0..=2 * m));
    ints.core_energy = rng.random_range(-1.0..1.0);
    for p in 0..m {
        for q in 0..=p {
            ints.set_one_body(p, q, rng.random_range(-1.0..1.0));
        }
    }
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    if (p, q) <= (r, s) && p >= q && r >= s {
                        ints.set_two_body(p, q, r, s, rng.random_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    ints
}

pub fn random_molecule(rng: &mut ChaCha8Rng, m: usize, ne: usize) -> QubitHamiltonian {
    let mut ints = IntegralSet::zeros(m, ne);
    for p in 0..m {
        for q in 0..=p {
            ints.set_one_body(p, q, rng.random_range(-1.0..1.0));
        }
    }
    for p in 0..m {
        for q in 0..=p {
            for r in 0..m {
                for s in 0..=r {
                    ints.set_two_body(p, q, r, s, rng.random_range(-0.3..0.3));
                }
            }
        }
    }
    // set_two_body writes all images, so later writes may overwrite earlier
    // ones; the result is still 8-fold symmetric.
    jordan_wigner(&ints).unwrap()
}

/// `⟨Pψ|H|Pψ⟩ / ⟨Pψ|Pψ⟩` with the state projected onto the sector.
pub fn rayleigh_quotient(
    h: &QubitHamiltonian,
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    states: &[BasisVector],
) -> f64 {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for &x in states {
        let l = log_psi(model, ctx, x);
        if l.re > -1e29 {
            psi[x.raw() as usize] = l.exp();
        }
    }
    let m = hamiltonian_matrix(h);
    let mut num = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            num += psi[i].conj() * m[i][j] * psi[j];
        }
    }
    let den: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    num.re / den
}

pub struct Exact {
    pub xs: Vec<BasisVector>,
    pub weights: Vec<f64>,
    pub energies: Vec<Complex64>,
}

pub fn exact_weights(
    h: &QubitHamiltonian,
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    states: &[BasisVector],
) -> Exact {
    let probs = born(model, ctx, states);
    let z: f64 = probs.iter().sum();
    let (xs, weights): (Vec<_>, Vec<_>) = states
        .iter()
        .zip(&probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&x, &p)| (x, p / z))
        .unzip();
    let energies = local_energies(model, ctx, h, &xs).unwrap();
    Exact {
        xs,
        weights,
        energies,
    }
}

pub fn span(basis: &[u64]) -> BTreeSet<u64> {
    let mut out = BTreeSet::from([0u64]);
    for &b in basis {
        let next: Vec<u64> = out.iter().map(|v| v ^ b).collect();
        out.extend(next);
    }
    out
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Draws `n_samples` independent root-to-leaf walks; samples entering an
/// unphysical node are lost. Returns the count vector over `states` followed
/// by the number of lost samples.
pub fn path_sample(
    model: &AnqsModel,
    ctx: &MaskingContext<'_>,
    states: &[BasisVector],
    n_samples: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<u64> {
    let e = ctx.oracle().ensemble();
    let n = model.n_qubits();
    let mut out = vec![0u64; states.len() + 1];
    'sample: for _ in 0..n_samples {
        let mut prefix = BasisVector::zeros(0);
        let mut partial = e.root();
        for depth in 0..n {
            let amps = masked_conditional_log_amps(model, ctx, depth, prefix, &partial).unwrap();
            let (p0, p1) = (born_probability(amps[0]), born_probability(amps[1]));
            let b = u8::from(rng.random::<f64>() * (p0 + p1) >= p0);
            partial = e.step(&partial, depth, b);
            prefix = prefix.push(b);
            if !ctx.oracle().is_phys(depth + 1, &partial) {
                out[states.len()] += 1;
                continue 'sample;
            }
        }
        out[states.binary_search(&prefix).unwrap()] += 1;
    }
    out
}
