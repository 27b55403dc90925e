use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{input_err, Error};
use crate::MAX_QUBITS;

/// A computational basis vector `|x₀ x₁ … x_{N−1}⟩`.
///
/// Position `i` (0-based) is stored in bit `i` of the packed word. The textual
/// form lists position 0 first, so `"1100"` has positions 0 and 1 set.
/// Ordering is lexicographic over positions, matching the textual form.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisVector {
    bits: u64,
    len: u8,
}

impl BasisVector {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(
            len <= MAX_QUBITS,
            "basis vector longer than {MAX_QUBITS} qubits"
        );
        let bits = if len == 64 {
            bits
        } else {
            bits & ((1u64 << len) - 1)
        };
        Self {
            bits,
            len: len as u8,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(0, len)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut packed = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                packed |= 1 << i;
            }
        }
        Self::new(packed, bits.len())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn raw(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    #[inline]
    pub fn with_bit(mut self, i: usize, b: u8) -> Self {
        if b != 0 {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
        self
    }

    /// Appends bit `b` at position `len`.
    #[inline]
    pub fn push(self, b: u8) -> Self {
        let len = self.len();
        Self::new(self.bits | ((b as u64 & 1) << len), len + 1)
    }

    /// The first `len` positions.
    #[inline]
    pub fn prefix(&self, len: usize) -> Self {
        debug_assert!(len <= self.len());
        Self::new(self.bits, len)
    }

    #[inline]
    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }
}

impl Ord for BasisVector {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.len.max(other.len) as u32;
        let key = |v: &Self| {
            if n == 0 {
                0
            } else {
                v.bits.reverse_bits() >> (64 - n)
            }
        };
        key(self).cmp(&key(other)).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for BasisVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BasisVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

impl FromStr for BasisVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.len() > MAX_QUBITS {
            return Err(input_err!("basis vector longer than {MAX_QUBITS} qubits"));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(input_err!("invalid bit character {c:?} in {s:?}")),
            }
        }
        Ok(Self::new(bits, s.len()))
    }
}

impl From<BasisVector> for String {
    fn from(v: BasisVector) -> String {
        alloc::format!("{v}")
    }
}
