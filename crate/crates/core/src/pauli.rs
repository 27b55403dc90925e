//! Pauli-string Hamiltonians.
//!
//! A Pauli string is stored as a pair of bit masks `(x, z)`: qubit `i` carries
//! `X` when only `x` is set, `Z` when only `z` is set and `Y` when both are.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{input_err, Error, Result};
use crate::{BasisVector, MAX_QUBITS};

/// Default magnitude below which aggregated coefficients are dropped.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Relative size below which an aggregated matrix element is treated as zero.
const CANCELLATION_TOLERANCE: f64 = 1e-13;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A coefficient times an `N`-qubit Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliTerm {
    pub fn new(coeff: Complex64, letters: &[Pauli]) -> Result<Self> {
        if letters.len() > MAX_QUBITS {
            return Err(input_err!("Pauli string longer than {MAX_QUBITS} qubits"));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (i, p) in letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << i,
                Pauli::Z => z |= 1 << i,
                Pauli::Y => {
                    x |= 1 << i;
                    z |= 1 << i;
                }
            }
        }
        Ok(Self {
            coeff,
            n_qubits: letters.len(),
            x,
            z,
        })
    }

    /// Parses a label such as `"XXIZ"` (position 0 first).
    pub fn parse(coeff: Complex64, label: &str) -> Result<Self> {
        let letters = label
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| input_err!("invalid Pauli letter {c:?}")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeff, &letters)
    }

    pub fn from_masks(coeff: Complex64, n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        let keep = if n_qubits == 64 {
            u64::MAX
        } else {
            (1u64 << n_qubits) - 1
        };
        Self {
            coeff,
            n_qubits,
            x: x & keep,
            z: z & keep,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Qubits carrying `X` or `Y`.
    pub fn flip_mask(&self) -> u64 {
        self.x
    }

    /// Qubits carrying `Z` or `Y`.
    pub fn phase_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, i: usize) -> Pauli {
        match ((self.x >> i) & 1, (self.z >> i) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (0, 1) => Pauli::Z,
            _ => Pauli::Y,
        }
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|i| self.letter(i)).collect()
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .map(|i| self.letter(i).as_char())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}{:+}i) {}",
            self.coeff.re,
            self.coeff.im,
            self.label()
        )
    }
}

/// Product of two Pauli strings given as `(x, z)` masks.
///
/// Returns the power of `i` of the phase and the masks of the product string.
pub(crate) fn multiply_strings(a: (u64, u64), b: (u64, u64)) -> (u32, u64, u64) {
    // With Y = iXZ every string is i^{|x∧z|} X^x Z^z, and Z^z X^x = (−1)^{|z∧x|} X^x Z^z.
    let (x, z) = (a.0 ^ b.0, a.1 ^ b.1);
    let pow =
        (a.0 & a.1).count_ones() + (b.0 & b.1).count_ones() + 2 * (a.1 & b.0).count_ones() + 4 * 64
            - (x & z).count_ones();
    (pow % 4, x, z)
}

/// Action of a single term on a basis vector: `P|x⟩ = amplitude · |x′⟩`.
pub fn apply_term(term: &PauliTerm, x: BasisVector) -> Result<(BasisVector, Complex64)> {
    if x.len() != term.n_qubits {
        return Err(input_err!(
            "basis vector has {} bits but the Pauli string has {}",
            x.len(),
            term.n_qubits
        ));
    }
    Ok(apply_masks(
        term.x,
        term.z,
        term.coeff * I_POW[(term.y_count() % 4) as usize],
        x,
    ))
}

#[inline]
fn apply_masks(
    flip: u64,
    phase: u64,
    coeff: Complex64,
    x: BasisVector,
) -> (BasisVector, Complex64) {
    let sign = if (phase & x.raw()).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    (BasisVector::new(x.raw() ^ flip, x.len()), coeff * sign)
}

/// Terms sharing one flip mask, with the `i^{#Y}` phase folded into the coefficient.
#[derive(Debug, Clone, PartialEq)]
struct FlipGroup {
    flip: u64,
    terms: Vec<(u64, Complex64)>,
}

/// A weighted sum of Pauli strings plus a real constant (the identity coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    constant_offset: f64,
    groups: Vec<FlipGroup>,
}

impl QubitHamiltonian {
    /// Builds and canonicalizes with the default drop tolerance.
    pub fn new(n_qubits: usize, constant_offset: f64, terms: Vec<PauliTerm>) -> Result<Self> {
        Self::with_tolerance(n_qubits, constant_offset, terms, DROP_TOLERANCE)
    }

    /// Merges duplicate strings, folds identity strings into the constant and
    /// drops coefficients whose magnitude is below `drop_tol`. Real or
    /// imaginary parts smaller than `drop_tol` are zeroed; any imaginary part
    /// left after that is an error.
    pub fn with_tolerance(
        n_qubits: usize,
        constant_offset: f64,
        terms: Vec<PauliTerm>,
        drop_tol: f64,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(input_err!(
                "qubit count must lie in 1..={MAX_QUBITS}, got {n_qubits}"
            ));
        }
        let mut constant = constant_offset;
        let mut merged: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
        for t in terms {
            if t.n_qubits != n_qubits {
                return Err(input_err!(
                    "term {} has {} qubits, Hamiltonian has {n_qubits}",
                    t.label(),
                    t.n_qubits
                ));
            }
            if t.is_identity() {
                if t.coeff.im.abs() > drop_tol {
                    return Err(input_err!(
                        "identity coefficient must be real, got {}",
                        t.coeff
                    ));
                }
                constant += t.coeff.re;
                continue;
            }
            *merged.entry((t.x, t.z)).or_default() += t.coeff;
        }
        let terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= drop_tol)
            .map(|((x, z), mut c)| {
                if c.re.abs() < drop_tol {
                    c.re = 0.0;
                }
                if c.im.abs() < drop_tol {
                    c.im = 0.0;
                }
                PauliTerm {
                    coeff: c,
                    n_qubits,
                    x,
                    z,
                }
            })
            .collect();
        if let Some(t) = terms.iter().find(|t| t.coeff.im != 0.0) {
            return Err(input_err!(
                "coefficient of {} is not real: the Hamiltonian would not be Hermitian",
                t.label()
            ));
        }
        let mut by_flip: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for t in &terms {
            by_flip
                .entry(t.x)
                .or_default()
                .push((t.z, t.coeff * I_POW[(t.y_count() % 4) as usize]));
        }
        let groups = by_flip
            .into_iter()
            .map(|(flip, terms)| FlipGroup { flip, terms })
            .collect();
        Ok(Self {
            n_qubits,
            terms,
            constant_offset: constant,
            groups,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Canonical terms, sorted by `(flip mask, phase mask)`.
    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    /// True when every coefficient is real.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.im == 0.0)
    }

    /// Number of distinct off-diagonal flip patterns, an upper bound on the
    /// number of connected configurations of any basis vector.
    pub fn max_connections(&self) -> usize {
        self.groups.len() + 1
    }

    /// Calls `f(x′, H_{x′x})` for every `x′` with a nonzero aggregated matrix
    /// element in the column of `x`. The diagonal (including the constant) is
    /// reported first when present, then flips in ascending mask order.
    pub fn for_each_connected<F>(&self, x: BasisVector, mut f: F) -> Result<()>
    where
        F: FnMut(BasisVector, Complex64),
    {
        if x.len() != self.n_qubits {
            return Err(input_err!(
                "basis vector has {} bits but the Hamiltonian has {} qubits",
                x.len(),
                self.n_qubits
            ));
        }
        let has_diagonal_group = self.groups.first().is_some_and(|g| g.flip == 0);
        if !has_diagonal_group && self.constant_offset != 0.0 {
            f(x, Complex64::new(self.constant_offset, 0.0));
        }
        for g in &self.groups {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for &(z, c) in &g.terms {
                if (z & x.raw()).count_ones() % 2 == 1 {
                    sum -= c;
                } else {
                    sum += c;
                }
                scale += c.norm();
            }
            if g.flip == 0 {
                sum += self.constant_offset;
                scale += self.constant_offset.abs();
            }
            // Amplitudes that cancel up to rounding count as zero.
            if sum.norm() > CANCELLATION_TOLERANCE * scale {
                f(BasisVector::new(x.raw() ^ g.flip, x.len()), sum);
            }
        }
        Ok(())
    }

    /// The column `{x′ ↦ H_{x′x}}` of the Hamiltonian at `x`.
    pub fn connected_configurations(
        &self,
        x: BasisVector,
    ) -> Result<Vec<(BasisVector, Complex64)>> {
        let mut out = Vec::with_capacity(self.groups.len() + 1);
        self.for_each_connected(x, |y, h| out.push((y, h)))?;
        Ok(out)
    }

    /// `⟨x|H|x⟩`.
    pub fn diagonal_element(&self, x: BasisVector) -> Result<f64> {
        let mut d = 0.0;
        self.for_each_connected(x, |y, h| {
            if y == x {
                d += h.re;
            }
        })?;
        Ok(d)
    }

    /// Dense row-major `2^N × 2^N` matrix (basis index = packed bits). Intended
    /// for small systems.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        if self.n_qubits > 14 {
            return Err(input_err!(
                "dense matrix requested for {} qubits",
                self.n_qubits
            ));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let x = BasisVector::new(col as u64, self.n_qubits);
            self.for_each_connected(x, |y, h| m[y.raw() as usize * dim + col] += h)?;
        }
        Ok(m)
    }
}

impl fmt::Display for QubitHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} qubits, constant {}",
            self.n_qubits, self.constant_offset
        )?;
        for t in &self.terms {
            writeln!(f, "  {t}")?;
        }
        Ok(())
    }
}

/// A Z-type Pauli string `⊗ Z^{mask_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZMask {
    pub mask: u64,
    pub n_qubits: usize,
}

impl ZMask {
    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .map(|i| if (self.mask >> i) & 1 == 1 { 'Z' } else { 'I' })
            .collect()
    }

    pub fn parse(label: &str) -> Result<Self> {
        if label.len() > MAX_QUBITS {
            return Err(input_err!("Z-string longer than {MAX_QUBITS} qubits"));
        }
        let mut mask = 0u64;
        for (i, c) in label.chars().enumerate() {
            match c {
                'I' => {}
                'Z' => mask |= 1 << i,
                _ => return Err(input_err!("Z-string may only contain I and Z, got {c:?}")),
            }
        }
        Ok(Self {
            mask,
            n_qubits: label.len(),
        })
    }

    /// `(−1)^{|mask ∧ x|}` as a parity bit.
    pub fn parity(&self, x: BasisVector) -> u8 {
        ((self.mask & x.raw()).count_ones() % 2) as u8
    }

    /// Whether this Z-string commutes with a Pauli term.
    pub fn commutes_with(&self, term: &PauliTerm) -> bool {
        (self.mask & term.flip_mask())
            .count_ones()
            .is_multiple_of(2)
    }
}

/// Nullspace basis over GF(2) of the row set, each row an `n`-bit mask.
///
/// Vectors are emitted in ascending order of their free column.
pub(crate) fn gf2_nullspace(rows: &[u64], n: usize) -> Vec<u64> {
    let mut rows: Vec<u64> = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    rows.retain(|&r| r != 0);
    // Reduced row echelon form with pivots in ascending column order.
    let mut pivots: Vec<(usize, u64)> = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let bit = 1u64 << col;
        let Some(pos) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pos);
        let pivot_row = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= pivot_row;
            }
        }
        rank += 1;
    }
    for row in rows.iter().take(rank) {
        pivots.push((row.trailing_zeros() as usize, *row));
    }
    let pivot_mask: u64 = pivots.iter().fold(0, |m, &(c, _)| m | (1 << c));
    (0..n)
        .filter(|&f| pivot_mask & (1 << f) == 0)
        .map(|f| {
            let mut v = 1u64 << f;
            for &(c, row) in &pivots {
                if row & (1 << f) != 0 {
                    v |= 1 << c;
                }
            }
            v
        })
        .collect()
}

/// Discovers a basis of the diagonal Z₂ symmetries of `h`.
///
/// The basis spans every Z-string commuting with all terms; its size is
/// `N − rank` of the X/Y-support matrix.
pub fn discover_z2(h: &QubitHamiltonian) -> Vec<ZMask> {
    let rows: Vec<u64> = h.terms().iter().map(PauliTerm::flip_mask).collect();
    gf2_nullspace(&rows, h.n_qubits())
        .into_iter()
        .map(|mask| ZMask {
            mask,
            n_qubits: h.n_qubits(),
        })
        .collect()
}

impl TryFrom<(&str, f64)> for PauliTerm {
    type Error = Error;

    fn try_from((label, coeff): (&str, f64)) -> Result<Self> {
        PauliTerm::parse(Complex64::new(coeff, 0.0), label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bv(s: &str) -> BasisVector {
        s.parse().unwrap()
    }

    fn ham(n: usize, terms: &[(&str, f64)]) -> QubitHamiltonian {
        let terms = terms
            .iter()
            .map(|&t| PauliTerm::try_from(t).unwrap())
            .collect();
        QubitHamiltonian::new(n, 0.0, terms).unwrap()
    }

    #[test]
    fn single_qubit_rules() {
        let z = PauliTerm::parse(c(1.0), "Z").unwrap();
        assert_eq!(apply_term(&z, bv("1")).unwrap(), (bv("1"), c(-1.0)));
        let x = PauliTerm::parse(c(1.0), "X").unwrap();
        assert_eq!(apply_term(&x, bv("0")).unwrap(), (bv("1"), c(1.0)));
        let y = PauliTerm::parse(c(1.0), "Y").unwrap();
        assert_eq!(
            apply_term(&y, bv("0")).unwrap(),
            (bv("1"), Complex64::new(0.0, 1.0))
        );
        assert_eq!(
            apply_term(&y, bv("1")).unwrap(),
            (bv("0"), Complex64::new(0.0, -1.0))
        );
    }

    #[test]
    fn apply_term_rejects_length_mismatch() {
        let z = PauliTerm::parse(c(1.0), "ZZ").unwrap();
        assert!(matches!(apply_term(&z, bv("1")), Err(Error::Input(_))));
    }

    #[test]
    fn connected_examples() {
        let h = ham(2, &[("ZZ", 1.0)]);
        assert_eq!(
            h.connected_configurations(bv("00")).unwrap(),
            vec![(bv("00"), c(1.0))]
        );

        let h = ham(1, &[("X", 1.0), ("Z", 0.5)]);
        let mut got = h.connected_configurations(bv("0")).unwrap();
        got.sort_by_key(|e| e.0);
        assert_eq!(got, vec![(bv("0"), c(0.5)), (bv("1"), c(1.0))]);

        let h = ham(2, &[("XX", 1.0), ("ZZ", 0.5)]);
        let mut got = h.connected_configurations(bv("00")).unwrap();
        got.sort_by_key(|e| e.0);
        assert_eq!(got, vec![(bv("00"), c(0.5)), (bv("11"), c(1.0))]);
    }

    #[test]
    fn xx_plus_yy_cancels_on_aligned_states() {
        // (XX + YY)|00⟩ = |11⟩ − |11⟩ = 0, so |00⟩ has no connections.
        let h = ham(2, &[("XX", 1.0), ("YY", 1.0)]);
        assert!(h.connected_configurations(bv("00")).unwrap().is_empty());
        assert_eq!(
            h.connected_configurations(bv("01")).unwrap(),
            vec![(bv("10"), c(2.0))]
        );
    }

    #[test]
    fn canonicalization_merges_and_drops() {
        let h = ham(
            2,
            &[
                ("XZ", 1.0),
                ("XZ", -1.0 + 1e-14),
                ("ZI", 0.25),
                ("ZI", 0.25),
                ("II", 3.0),
            ],
        );
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].label(), "ZI");
        assert_eq!(h.terms()[0].coeff, c(0.5));
        assert_eq!(h.constant_offset(), 3.0);
    }

    #[test]
    fn constant_appears_on_the_diagonal() {
        let terms = vec![PauliTerm::parse(c(1.0), "X").unwrap()];
        let h = QubitHamiltonian::new(1, 2.0, terms).unwrap();
        let got = h.connected_configurations(bv("0")).unwrap();
        assert_eq!(got, vec![(bv("0"), c(2.0)), (bv("1"), c(1.0))]);
    }

    #[test]
    fn multiply_strings_matches_letter_table() {
        let xy = multiply_strings((1, 0), (1, 1));
        assert_eq!(xy, (1, 0, 1)); // XY = iZ
        let yx = multiply_strings((1, 1), (1, 0));
        assert_eq!(yx, (3, 0, 1)); // YX = −iZ
        let zz = multiply_strings((0, 1), (0, 1));
        assert_eq!(zz, (0, 0, 0));
        let yy = multiply_strings((1, 1), (1, 1));
        assert_eq!(yy, (0, 0, 0));
    }

    #[test]
    fn discover_examples() {
        let h = ham(2, &[("XX", 1.0), ("ZZ", 0.5)]);
        let got: Vec<String> = discover_z2(&h).iter().map(ZMask::label).collect();
        assert_eq!(got, ["ZZ"]);

        let h = ham(2, &[("ZI", 1.0)]);
        let got: Vec<String> = discover_z2(&h).iter().map(ZMask::label).collect();
        assert_eq!(got, ["ZI", "IZ"]);

        let h = ham(2, &[("XI", 1.0)]);
        let got: Vec<String> = discover_z2(&h).iter().map(ZMask::label).collect();
        assert_eq!(got, ["IZ"]);
    }

    #[test]
    fn nullspace_dimension_is_n_minus_rank() {
        let rows = [0b0011, 0b0110, 0b0101, 0b0011];
        let ns = gf2_nullspace(&rows, 4);
        assert_eq!(ns.len(), 2);
        for v in ns {
            for r in rows {
                assert_eq!((v & r).count_ones() % 2, 0);
            }
        }
    }
}
