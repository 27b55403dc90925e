//! Quantum-number symmetries diagonal in the computational basis.
//!
//! Every descriptor is locally decomposable: the eigenvalue of a basis
//! vector is a fold of per-qubit integers `λ_i(x_i)`, either by addition
//! (particle number, spin projection, magnetization) or by XOR of parity bits
//! (Z₂ symmetries, whose operator eigenvalue is `(−1)^parity`). Spin
//! projection and magnetization are stored doubled so that all eigenvalues are
//! integers.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input_err, Error, Result};
use crate::pauli::{QubitHamiltonian, ZMask};
use crate::BasisVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Composition {
    /// Integer addition.
    Additive,
    /// Parity bits combined by XOR.
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryDescriptor {
    kind: Composition,
    local: Vec<[i64; 2]>,
    name: String,
}

impl SymmetryDescriptor {
    pub fn new(kind: Composition, local: Vec<[i64; 2]>, name: impl Into<String>) -> Result<Self> {
        if local.is_empty() {
            return Err(input_err!("symmetry descriptor needs at least one qubit"));
        }
        if kind == Composition::Multiplicative && local.iter().flatten().any(|&v| v != 0 && v != 1)
        {
            return Err(input_err!(
                "multiplicative local values must be parity bits"
            ));
        }
        Ok(Self {
            kind,
            local,
            name: name.into(),
        })
    }

    /// `n̂_e`: `λ_i(b) = b`.
    pub fn particle_number(n_qubits: usize) -> Self {
        Self {
            kind: Composition::Additive,
            local: alloc::vec![[0, 1]; n_qubits],
            name: "particle_number".into(),
        }
    }

    /// `2Ŝ_z` with interleaved spin-orbitals: even 0-based positions are spin up.
    pub fn spin_projection(n_qubits: usize) -> Result<Self> {
        if !n_qubits.is_multiple_of(2) {
            return Err(input_err!(
                "spin projection needs an even qubit count, got {n_qubits}"
            ));
        }
        let local = (0..n_qubits)
            .map(|i| if i % 2 == 0 { [0, 1] } else { [0, -1] })
            .collect();
        Ok(Self {
            kind: Composition::Additive,
            local,
            name: "spin_projection".into(),
        })
    }

    /// Twice the total magnetization of a spin chain: `λ_i(b) = 1 − 2b`.
    pub fn magnetization(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(input_err!("magnetization needs at least one qubit"));
        }
        Ok(Self {
            kind: Composition::Additive,
            local: alloc::vec![[1, -1]; n_qubits],
            name: "magnetization".into(),
        })
    }

    /// Parity of the occupied positions under a Z-string.
    pub fn z2(mask: ZMask) -> Result<Self> {
        if mask.mask == 0 {
            return Err(input_err!("Z2 descriptor needs a nonzero mask"));
        }
        let local = (0..mask.n_qubits)
            .map(|i| [0, ((mask.mask >> i) & 1) as i64])
            .collect();
        Ok(Self {
            kind: Composition::Multiplicative,
            local,
            name: alloc::format!("z2:{}", mask.label()),
        })
    }

    pub fn kind(&self) -> Composition {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.local.len()
    }

    #[inline]
    pub fn local_value(&self, i: usize, b: u8) -> i64 {
        self.local[i][b as usize]
    }

    #[inline]
    pub fn compose(&self, acc: i64, v: i64) -> i64 {
        match self.kind {
            Composition::Additive => acc + v,
            Composition::Multiplicative => acc ^ v,
        }
    }

    /// Eigenvalue of the first `len` positions of `x`.
    pub fn partial_eigenvalue(&self, x: BasisVector, len: usize) -> i64 {
        (0..len).fold(0, |acc, i| self.compose(acc, self.local_value(i, x.bit(i))))
    }

    pub fn eigenvalue(&self, x: BasisVector) -> i64 {
        self.partial_eigenvalue(x, x.len())
    }

    /// Inclusive bounds on every partial eigenvalue.
    fn bounds(&self) -> (i64, i64) {
        match self.kind {
            Composition::Multiplicative => (0, 1),
            Composition::Additive => self.local.iter().fold((0, 0), |(lo, hi), l| {
                (lo + l[0].min(l[1]).min(0), hi + l[0].max(l[1]).max(0))
            }),
        }
    }
}

/// An ordered set of descriptors together with the target sector `s_ref`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryEnsemble {
    n_qubits: usize,
    descriptors: Vec<SymmetryDescriptor>,
    s_ref: Vec<i64>,
    lows: Vec<i64>,
    strides: Vec<u64>,
    radices: Vec<u64>,
}

impl SymmetryEnsemble {
    pub fn new(
        n_qubits: usize,
        descriptors: Vec<SymmetryDescriptor>,
        s_ref: Vec<i64>,
    ) -> Result<Self> {
        if descriptors.len() != s_ref.len() {
            return Err(input_err!(
                "{} descriptors but {} reference eigenvalues",
                descriptors.len(),
                s_ref.len()
            ));
        }
        for d in &descriptors {
            if d.n_qubits() != n_qubits {
                return Err(input_err!(
                    "descriptor {} acts on {} qubits, expected {n_qubits}",
                    d.name,
                    d.n_qubits()
                ));
            }
        }
        let mut lows = Vec::with_capacity(descriptors.len());
        let mut strides = Vec::with_capacity(descriptors.len());
        let mut radices = Vec::with_capacity(descriptors.len());
        let mut stride: u64 = 1;
        for d in &descriptors {
            let (lo, hi) = d.bounds();
            let radix = (hi - lo + 1) as u64;
            lows.push(lo);
            strides.push(stride);
            radices.push(radix);
            stride = stride.checked_mul(radix).ok_or_else(|| {
                Error::Config("combined symmetry spectrum does not fit a 64-bit key".into())
            })?;
        }
        Ok(Self {
            n_qubits,
            descriptors,
            s_ref,
            lows,
            strides,
            radices,
        })
    }

    /// An ensemble with no constraints; every basis vector is in-sector.
    pub fn unconstrained(n_qubits: usize) -> Self {
        Self::new(n_qubits, Vec::new(), Vec::new()).expect("empty ensemble is valid")
    }

    pub fn builder(n_qubits: usize) -> EnsembleBuilder {
        EnsembleBuilder {
            n_qubits,
            descriptors: Vec::new(),
            s_ref: Vec::new(),
        }
    }

    /// Sets each reference eigenvalue to the descriptor's eigenvalue on `x_ref`.
    pub fn fix_sector(descriptors: Vec<SymmetryDescriptor>, x_ref: BasisVector) -> Result<Self> {
        let s_ref = descriptors
            .iter()
            .map(|d| {
                if d.n_qubits() != x_ref.len() {
                    return Err(input_err!(
                        "reference vector has {} bits, descriptor {} expects {}",
                        x_ref.len(),
                        d.name,
                        d.n_qubits()
                    ));
                }
                Ok(d.eigenvalue(x_ref))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(x_ref.len(), descriptors, s_ref)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn descriptors(&self) -> &[SymmetryDescriptor] {
        &self.descriptors
    }

    pub fn s_ref(&self) -> &[i64] {
        &self.s_ref
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    /// The same target restricted to additive descriptors.
    pub fn without_multiplicative(&self) -> Self {
        let (descriptors, s_ref) = self
            .descriptors
            .iter()
            .zip(&self.s_ref)
            .filter(|(d, _)| d.kind == Composition::Additive)
            .map(|(d, &s)| (d.clone(), s))
            .unzip();
        Self::new(self.n_qubits, descriptors, s_ref).expect("subset of a valid ensemble")
    }

    pub fn eigenvalues(&self, x: BasisVector) -> Vec<i64> {
        self.descriptors.iter().map(|d| d.eigenvalue(x)).collect()
    }

    pub fn in_sector(&self, x: BasisVector) -> bool {
        x.len() == self.n_qubits
            && self
                .descriptors
                .iter()
                .zip(&self.s_ref)
                .all(|(d, &s)| d.eigenvalue(x) == s)
    }

    /// Partial eigenvalue vector of the empty prefix.
    pub fn root(&self) -> Vec<i64> {
        alloc::vec![0; self.descriptors.len()]
    }

    /// `s_{<i} ⊙ s_i(b)` for position `level` (0-based).
    pub fn step(&self, partial: &[i64], level: usize, b: u8) -> Vec<i64> {
        self.descriptors
            .iter()
            .zip(partial)
            .map(|(d, &acc)| d.compose(acc, d.local_value(level, b)))
            .collect()
    }

    /// Partial eigenvalues of the first `len` positions of `x`.
    pub fn partial(&self, x: BasisVector, len: usize) -> Vec<i64> {
        self.descriptors
            .iter()
            .map(|d| d.partial_eigenvalue(x, len))
            .collect()
    }

    /// Packs a partial-eigenvalue vector into a non-negative mixed-radix key.
    /// Values outside the attainable range yield `None`.
    pub fn encode(&self, partial: &[i64]) -> Option<u64> {
        let mut key = 0u64;
        for (((&v, &lo), &stride), &radix) in partial
            .iter()
            .zip(&self.lows)
            .zip(&self.strides)
            .zip(&self.radices)
        {
            let off = v - lo;
            if off < 0 || off as u64 >= radix {
                return None;
            }
            key += off as u64 * stride;
        }
        Some(key)
    }

    pub fn decode(&self, key: u64) -> Vec<i64> {
        self.lows
            .iter()
            .zip(&self.strides)
            .zip(&self.radices)
            .map(|((&lo, &stride), &radix)| lo + ((key / stride) % radix) as i64)
            .collect()
    }

    /// Encoded target; `None` when `s_ref` is outside the attainable range.
    pub fn target_key(&self) -> Option<u64> {
        self.encode(&self.s_ref)
    }

    /// Checks on `n_probes` random basis vectors that every configuration
    /// connected by `h` keeps all eigenvalues.
    pub fn check_hamiltonian(
        &self,
        h: &QubitHamiltonian,
        n_probes: usize,
        seed: u64,
    ) -> Result<()> {
        if h.n_qubits() != self.n_qubits {
            return Err(input_err!(
                "Hamiltonian has {} qubits, ensemble {}",
                h.n_qubits(),
                self.n_qubits
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_probes {
            let x = BasisVector::new(rng.random(), self.n_qubits);
            let s = self.eigenvalues(x);
            let mut broken = None;
            h.for_each_connected(x, |y, _| {
                if broken.is_none() {
                    if let Some(m) = self.eigenvalues(y).iter().zip(&s).position(|(a, b)| a != b) {
                        broken = Some((y, m));
                    }
                }
            })?;
            if let Some((y, m)) = broken {
                return Err(Error::Config(alloc::format!(
                    "Hamiltonian does not conserve {}: {x} couples to {y}",
                    self.descriptors[m].name
                )));
            }
        }
        Ok(())
    }
}

/// Accumulates descriptors with explicit reference eigenvalues.
#[derive(Debug, Clone)]
pub struct EnsembleBuilder {
    n_qubits: usize,
    descriptors: Vec<SymmetryDescriptor>,
    s_ref: Vec<i64>,
}

impl EnsembleBuilder {
    pub fn particle_number(mut self, n_electrons: usize) -> Result<Self> {
        if n_electrons > self.n_qubits {
            return Err(input_err!(
                "{n_electrons} electrons exceed {} spin-orbitals",
                self.n_qubits
            ));
        }
        self.descriptors
            .push(SymmetryDescriptor::particle_number(self.n_qubits));
        self.s_ref.push(n_electrons as i64);
        Ok(self)
    }

    /// `two_sz` is twice the spin projection.
    pub fn spin_projection(mut self, two_sz: i64) -> Result<Self> {
        self.descriptors
            .push(SymmetryDescriptor::spin_projection(self.n_qubits)?);
        self.s_ref.push(two_sz);
        Ok(self)
    }

    /// `two_m` is twice the magnetization.
    pub fn magnetization(mut self, two_m: i64) -> Result<Self> {
        self.descriptors
            .push(SymmetryDescriptor::magnetization(self.n_qubits)?);
        self.s_ref.push(two_m);
        Ok(self)
    }

    /// `eigenvalue` is the ±1 eigenvalue of the Z-string.
    pub fn z2(mut self, mask: ZMask, eigenvalue: i8) -> Result<Self> {
        let parity = match eigenvalue {
            1 => 0,
            -1 => 1,
            _ => {
                return Err(input_err!(
                    "Z2 eigenvalue must be +1 or -1, got {eigenvalue}"
                ))
            }
        };
        self.descriptors.push(SymmetryDescriptor::z2(mask)?);
        self.s_ref.push(parity);
        Ok(self)
    }

    pub fn with(mut self, descriptor: SymmetryDescriptor, reference: i64) -> Self {
        self.descriptors.push(descriptor);
        self.s_ref.push(reference);
        self
    }

    pub fn build(self) -> Result<SymmetryEnsemble> {
        SymmetryEnsemble::new(self.n_qubits, self.descriptors, self.s_ref)
    }
}

/// Hartree–Fock reference `1…1 0…0` with `n_electrons` leading ones.
pub fn hf_state(n_qubits: usize, n_electrons: usize) -> Result<BasisVector> {
    if n_electrons > n_qubits {
        return Err(input_err!(
            "{n_electrons} electrons exceed {n_qubits} spin-orbitals"
        ));
    }
    if n_qubits > crate::MAX_QUBITS {
        return Err(input_err!(
            "at most {} qubits are supported",
            crate::MAX_QUBITS
        ));
    }
    let bits = if n_electrons == 64 {
        u64::MAX
    } else {
        (1u64 << n_electrons) - 1
    };
    Ok(BasisVector::new(bits, n_qubits))
}
