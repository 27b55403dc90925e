//! Second-quantized molecular Hamiltonians and their Jordan–Wigner image.
//!
//! Spin-orbitals are interleaved: spatial orbital `k` (0-based) maps to qubit
//! `2k` (spin up) and `2k + 1` (spin down).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{input_err, Result};
use crate::pauli::{multiply_strings, PauliTerm, QubitHamiltonian};

pub use crate::symmetry::hf_state;

const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// One- and two-electron integrals over `M` real spatial orbitals.
///
/// Two-electron integrals use chemist notation `(pq|rs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub core_energy: f64,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

impl IntegralSet {
    /// All-zero integrals.
    pub fn zeros(n_spatial: usize, n_electrons: usize) -> Self {
        Self {
            n_spatial,
            n_electrons,
            core_energy: 0.0,
            one_body: alloc::vec![0.0; n_spatial * n_spatial],
            two_body: alloc::vec![0.0; n_spatial.pow(4)],
        }
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.n_spatial
    }

    #[inline]
    pub fn one_body(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_spatial + q]
    }

    #[inline]
    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let m = self.n_spatial;
        self.two_body[((p * m + q) * m + r) * m + s]
    }

    /// Sets `h_pq` and `h_qp`.
    pub fn set_one_body(&mut self, p: usize, q: usize, value: f64) {
        let m = self.n_spatial;
        self.one_body[p * m + q] = value;
        self.one_body[q * m + p] = value;
    }

    /// Sets `(pq|rs)` and its seven permutational images.
    pub fn set_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let m = self.n_spatial;
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.two_body[((a * m + b) * m + c) * m + d] = value;
        }
    }

    /// Checks the index symmetries and the electron count.
    pub fn validate(&self) -> Result<()> {
        let m = self.n_spatial;
        if m == 0 {
            return Err(input_err!("integral set has no orbitals"));
        }
        if 2 * m > crate::MAX_QUBITS {
            return Err(input_err!(
                "{m} spatial orbitals exceed {} qubits",
                crate::MAX_QUBITS
            ));
        }
        if self.n_electrons > 2 * m {
            return Err(input_err!(
                "{} electrons exceed {} spin-orbitals",
                self.n_electrons,
                2 * m
            ));
        }
        for p in 0..m {
            for q in 0..m {
                if (self.one_body(p, q) - self.one_body(q, p)).abs() > SYMMETRY_TOLERANCE {
                    return Err(input_err!("one-body integrals not symmetric at ({p}, {q})"));
                }
                for r in 0..m {
                    for s in 0..m {
                        let v = self.two_body(p, q, r, s);
                        for w in [
                            self.two_body(q, p, r, s),
                            self.two_body(p, q, s, r),
                            self.two_body(r, s, p, q),
                        ] {
                            if (v - w).abs() > SYMMETRY_TOLERANCE {
                                return Err(input_err!(
                                    "two-body integrals lack 8-fold symmetry at ({p}{q}|{r}{s})"
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Pauli expansion of a ladder operator: `a_j = Z_{<j}(X_j + iY_j)/2`, and
/// `a†_j = Z_{<j}(X_j − iY_j)/2`.
fn ladder(j: usize, dagger: bool) -> [(Complex64, u64, u64); 2] {
    let string = (1u64 << j) - 1;
    let bit = 1u64 << j;
    let y = if dagger {
        Complex64::new(0.0, -0.5)
    } else {
        Complex64::new(0.0, 0.5)
    };
    [
        (Complex64::new(0.5, 0.0), bit, string),
        (y, bit, string | bit),
    ]
}

/// Accumulates `coeff · Π ops` into `acc`, `ops` given as `(orbital, dagger)`.
fn add_product(acc: &mut BTreeMap<(u64, u64), Complex64>, coeff: f64, ops: &[(usize, bool)]) {
    let mut expansion: Vec<(Complex64, u64, u64)> = alloc::vec![(Complex64::new(coeff, 0.0), 0, 0)];
    for &(j, dagger) in ops {
        let factors = ladder(j, dagger);
        let mut next = Vec::with_capacity(expansion.len() * 2);
        for &(c, x, z) in &expansion {
            for &(fc, fx, fz) in &factors {
                let (pow, nx, nz) = multiply_strings((x, z), (fx, fz));
                let phase = match pow {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                next.push((c * fc * phase, nx, nz));
            }
        }
        expansion = next;
    }
    for (c, x, z) in expansion {
        *acc.entry((x, z)).or_default() += c;
    }
}

/// Maps `H = Σ h_pq a†_p a_q + ½ Σ (pq|rs) a†_{pσ} a†_{rτ} a_{sτ} a_{qσ} + E_core`
/// to qubits with the Jordan–Wigner encoding.
///
/// Products are expanded in a fixed loop order and merged in an ordered map,
/// so the result is bit-reproducible.
pub fn jordan_wigner(ints: &IntegralSet) -> Result<QubitHamiltonian> {
    ints.validate()?;
    let m = ints.n_spatial;
    let n = 2 * m;
    let mut acc: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
    let so = |k: usize, spin: usize| 2 * k + spin;

    for p in 0..m {
        for q in 0..m {
            let h = ints.one_body(p, q);
            if h == 0.0 {
                continue;
            }
            for spin in 0..2 {
                add_product(&mut acc, h, &[(so(p, spin), true), (so(q, spin), false)]);
            }
        }
    }
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    let g = ints.two_body(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (a, b, c, d) = (so(p, sigma), so(r, tau), so(s, tau), so(q, sigma));
                            if a == b || c == d {
                                continue;
                            }
                            add_product(
                                &mut acc,
                                0.5 * g,
                                &[(a, true), (b, true), (c, false), (d, false)],
                            );
                        }
                    }
                }
            }
        }
    }
    let terms = acc
        .into_iter()
        .map(|((x, z), c)| PauliTerm::from_masks(c, n, x, z))
        .collect();
    QubitHamiltonian::new(n, ints.core_energy, terms)
}
