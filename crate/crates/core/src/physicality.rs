//! Exact physicality of partial basis vectors.
//!
//! A prefix `x_{<i}` is physical when some completion lands in the target
//! sector. Because the symmetries are locally decomposable, physicality only
//! depends on the depth and the partial eigenvalue vector, so the whole table
//! is polynomial in the qubit count. It is precomputed: keys reachable from the
//! root are collected level by level, then a backward sweep applies
//!
//! ```text
//! phys(N, s)  = (s == s_ref)
//! phys(d, s)  = phys(d+1, s ⊙ λ_d(0)) ∨ phys(d+1, s ⊙ λ_d(1))
//! ```
//!
//! Depth `d` counts the bits already fixed, i.e. `d = i − 1` for tree level `i`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::symmetry::SymmetryEnsemble;
use crate::BasisVector;

#[derive(Debug, Clone)]
pub struct PhysicalityOracle {
    ensemble: SymmetryEnsemble,
    levels: Vec<HashMap<u64, bool>>,
}

/// Keys reachable from the root at each depth `0..=N`, in discovery order.
fn reachable_keys(ensemble: &SymmetryEnsemble) -> Vec<Vec<u64>> {
    let n = ensemble.n_qubits();
    let root = ensemble
        .encode(&ensemble.root())
        .expect("root is always encodable");
    let mut levels = Vec::with_capacity(n + 1);
    levels.push(alloc::vec![root]);
    for d in 0..n {
        let mut seen: HashMap<u64, ()> = HashMap::new();
        let mut next = Vec::new();
        for &key in &levels[d] {
            let partial = ensemble.decode(key);
            for b in 0..2u8 {
                let child = ensemble
                    .encode(&ensemble.step(&partial, d, b))
                    .expect("reachable partial eigenvalues stay within bounds");
                if seen.insert(child, ()).is_none() {
                    next.push(child);
                }
            }
        }
        levels.push(next);
    }
    levels
}

impl PhysicalityOracle {
    /// Precomputes the table. Fails when the target sector is empty.
    pub fn new(ensemble: SymmetryEnsemble) -> Result<Self> {
        let n = ensemble.n_qubits();
        let reachable = reachable_keys(&ensemble);
        let target = ensemble.target_key();
        let mut levels: Vec<HashMap<u64, bool>> = alloc::vec![HashMap::new(); n + 1];
        for &key in &reachable[n] {
            levels[n].insert(key, Some(key) == target);
        }
        for d in (0..n).rev() {
            let (head, tail) = levels.split_at_mut(d + 1);
            let below = &tail[0];
            let here = &mut head[d];
            for &key in &reachable[d] {
                let partial = ensemble.decode(key);
                let phys = (0..2u8).any(|b| {
                    let child = ensemble
                        .encode(&ensemble.step(&partial, d, b))
                        .expect("reachable");
                    below[&child]
                });
                here.insert(key, phys);
            }
        }
        let oracle = Self { ensemble, levels };
        if !oracle.is_phys(0, &oracle.ensemble.root()) {
            return Err(Error::Config(alloc::format!(
                "target sector {:?} is empty",
                oracle.ensemble.s_ref()
            )));
        }
        Ok(oracle)
    }

    pub fn ensemble(&self) -> &SymmetryEnsemble {
        &self.ensemble
    }

    pub fn n_qubits(&self) -> usize {
        self.ensemble.n_qubits()
    }

    /// Number of cached `(depth, key)` entries.
    pub fn table_size(&self) -> usize {
        self.levels.iter().map(HashMap::len).sum()
    }

    /// Number of cached keys at one depth.
    pub fn level_size(&self, depth: usize) -> usize {
        self.levels[depth].len()
    }

    /// Whether the subtree below a prefix of length `depth` with partial
    /// eigenvalues `partial` contains a leaf in the target sector.
    ///
    /// Keys never reached from the root are evaluated by the same recursion
    /// without caching.
    pub fn is_phys(&self, depth: usize, partial: &[i64]) -> bool {
        assert!(
            depth <= self.n_qubits(),
            "depth {depth} beyond {} qubits",
            self.n_qubits()
        );
        if let Some(key) = self.ensemble.encode(partial) {
            if let Some(&p) = self.levels[depth].get(&key) {
                return p;
            }
        }
        let mut memo = BTreeMap::new();
        self.is_phys_uncached(depth, partial.to_vec(), &mut memo)
    }

    fn is_phys_uncached(
        &self,
        depth: usize,
        partial: Vec<i64>,
        memo: &mut BTreeMap<(usize, Vec<i64>), bool>,
    ) -> bool {
        if depth == self.n_qubits() {
            return partial.as_slice() == self.ensemble.s_ref();
        }
        if let Some(key) = self.ensemble.encode(&partial) {
            if let Some(&p) = self.levels[depth].get(&key) {
                return p;
            }
        }
        if let Some(&p) = memo.get(&(depth, partial.clone())) {
            return p;
        }
        let p = (0..2u8).any(|b| {
            let child = self.ensemble.step(&partial, depth, b);
            self.is_phys_uncached(depth + 1, child, memo)
        });
        memo.insert((depth, partial), p);
        p
    }

    /// Physicality of both children of a physical node.
    pub fn child_physicality(&self, depth: usize, partial: &[i64]) -> Result<(bool, bool)> {
        if depth >= self.n_qubits() {
            return Err(Error::Contract(alloc::format!(
                "leaf depth {depth} has no children"
            )));
        }
        let p0 = self.is_phys(depth + 1, &self.ensemble.step(partial, depth, 0));
        let p1 = self.is_phys(depth + 1, &self.ensemble.step(partial, depth, 1));
        if !(p0 || p1) {
            return Err(Error::Contract(alloc::format!(
                "children requested for unphysical node at depth {depth} with {partial:?}"
            )));
        }
        Ok((p0, p1))
    }

    /// Whether the prefix `x[..depth]` is physical.
    pub fn is_phys_prefix(&self, x: BasisVector, depth: usize) -> bool {
        self.is_phys(depth, &self.ensemble.partial(x, depth))
    }

    /// All in-sector basis vectors in lexicographic order, by depth-first
    /// descent through physical nodes only.
    pub fn enumerate_sector(&self) -> Vec<BasisVector> {
        let n = self.n_qubits();
        let mut out = Vec::new();
        let mut stack = alloc::vec![(BasisVector::zeros(0), self.ensemble.root())];
        while let Some((prefix, partial)) = stack.pop() {
            let depth = prefix.len();
            if depth == n {
                out.push(prefix);
                continue;
            }
            // Push the 1-branch first so the 0-branch is expanded first.
            for b in [1u8, 0] {
                let child = self.ensemble.step(&partial, depth, b);
                if self.is_phys(depth + 1, &child) {
                    stack.push((prefix.push(b), child));
                }
            }
        }
        out
    }
}

/// Exact number of basis vectors in the target sector, by the counting
/// analogue of the physicality recursion (sums instead of ORs).
pub fn count_sector(ensemble: &SymmetryEnsemble) -> BigUint {
    let n = ensemble.n_qubits();
    let reachable = reachable_keys(ensemble);
    let target = ensemble.target_key();
    let mut below: HashMap<u64, BigUint> = reachable[n]
        .iter()
        .map(|&k| {
            (
                k,
                if Some(k) == target {
                    BigUint::from(1u32)
                } else {
                    BigUint::zero()
                },
            )
        })
        .collect();
    for d in (0..n).rev() {
        let mut here: HashMap<u64, BigUint> = HashMap::with_capacity(reachable[d].len());
        for &key in &reachable[d] {
            let partial = ensemble.decode(key);
            let mut total = BigUint::zero();
            for b in 0..2u8 {
                let child = ensemble
                    .encode(&ensemble.step(&partial, d, b))
                    .expect("reachable");
                total += &below[&child];
            }
            here.insert(key, total);
        }
        below = here;
    }
    let root = ensemble
        .encode(&ensemble.root())
        .expect("root is always encodable");
    below.remove(&root).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::ZMask;

    fn number_sector(n: usize, ne: usize) -> SymmetryEnsemble {
        SymmetryEnsemble::builder(n)
            .particle_number(ne)
            .unwrap()
            .build()
            .unwrap()
    }

    fn molecular(n: usize, ne: usize, two_sz: i64) -> SymmetryEnsemble {
        SymmetryEnsemble::builder(n)
            .particle_number(ne)
            .unwrap()
            .spin_projection(two_sz)
            .unwrap()
            .build()
            .unwrap()
    }

    #[test]
    fn termination_rule() {
        let o = PhysicalityOracle::new(number_sector(4, 2)).unwrap();
        assert!(o.is_phys(4, &[2]));
        assert!(!o.is_phys(4, &[1]));
    }

    #[test]
    fn pruned_after_two_ones() {
        let o = PhysicalityOracle::new(number_sector(4, 2)).unwrap();
        assert!(o.is_phys(2, &[2]));
        assert!(!o.is_phys(3, &[3]));
        assert_eq!(o.child_physicality(2, &[2]).unwrap(), (true, false));
    }

    #[test]
    fn forced_path() {
        let o = PhysicalityOracle::new(number_sector(2, 2)).unwrap();
        assert_eq!(o.child_physicality(0, &[0]).unwrap(), (false, true));
    }

    #[test]
    fn child_physicality_rejects_unphysical_nodes() {
        let o = PhysicalityOracle::new(number_sector(4, 2)).unwrap();
        assert!(matches!(
            o.child_physicality(3, &[3]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn unreachable_keys_are_answered() {
        let o = PhysicalityOracle::new(number_sector(4, 2)).unwrap();
        // A negative count is never reached from the root but has a clear answer.
        assert!(!o.is_phys(1, &[-2]));
        assert!(o.is_phys(1, &[-1]));
        assert!(!o.is_phys(0, &[5]));
        assert!(o.is_phys(0, &[1]));
    }

    #[test]
    fn empty_sector_is_rejected() {
        let e = SymmetryEnsemble::builder(4)
            .particle_number(2)
            .unwrap()
            .spin_projection(4)
            .unwrap()
            .build()
            .unwrap();
        assert!(matches!(PhysicalityOracle::new(e), Err(Error::Config(_))));
        let e = SymmetryEnsemble::builder(4)
            .magnetization(1)
            .unwrap()
            .build()
            .unwrap();
        assert!(PhysicalityOracle::new(e).is_err());
    }

    #[test]
    fn sector_counts() {
        assert_eq!(count_sector(&molecular(12, 4, 0)), BigUint::from(225u32));
        assert_eq!(
            count_sector(&molecular(20, 14, 0)),
            BigUint::from(14_400u32)
        );
        assert_eq!(count_sector(&number_sector(2, 1)), BigUint::from(2u32));
        assert_eq!(
            count_sector(&SymmetryEnsemble::unconstrained(5)),
            BigUint::from(32u32)
        );
    }

    #[test]
    fn enumeration_matches_count() {
        let e = SymmetryEnsemble::builder(6)
            .particle_number(3)
            .unwrap()
            .z2(ZMask::parse("ZZIIZZ").unwrap(), 1)
            .unwrap()
            .build()
            .unwrap();
        let o = PhysicalityOracle::new(e.clone()).unwrap();
        let leaves = o.enumerate_sector();
        assert_eq!(BigUint::from(leaves.len()), count_sector(&e));
        assert!(leaves.windows(2).all(|w| w[0] < w[1]));
        assert!(leaves.iter().all(|&x| e.in_sector(x)));
    }
}
