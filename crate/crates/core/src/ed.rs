//! Exact diagonalization of qubit Hamiltonians, optionally restricted to a
//! symmetry sector.
//!
//! Small problems are diagonalized densely. Larger ones use a restarted
//! Lanczos iteration with full reorthogonalization and a matrix-free
//! matrix-vector product.

use alloc::vec::Vec;

use hashbrown::HashMap;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input_err, Error, Result};
use crate::exec;
use crate::pauli::{PauliTerm, QubitHamiltonian};
use crate::physicality::PhysicalityOracle;
use crate::symmetry::SymmetryEnsemble;
use crate::BasisVector;

/// Largest basis handled.
pub const MAX_DIMENSION: usize = 1 << 18;
/// Bases below this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 2048;

const RESIDUAL_TOLERANCE: f64 = 1e-10;
const KRYLOV_DIM: usize = 120;
const MAX_RESTARTS: usize = 200;

/// Ordered basis of a sector with an index lookup.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    states: Vec<BasisVector>,
    index: HashMap<u64, usize>,
}

impl SectorBasis {
    fn from_states(states: Vec<BasisVector>) -> Self {
        let index = states
            .iter()
            .enumerate()
            .map(|(i, x)| (x.raw(), i))
            .collect();
        Self { states, index }
    }

    /// All `2^N` basis vectors in lexicographic order.
    pub fn full(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 63 || (1usize << n_qubits) > MAX_DIMENSION {
            return Err(Error::Capacity {
                dim: 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX),
                cap: MAX_DIMENSION,
            });
        }
        let mut states: Vec<BasisVector> = (0..1u64 << n_qubits)
            .map(|b| BasisVector::new(b, n_qubits))
            .collect();
        states.sort();
        Ok(Self::from_states(states))
    }

    /// The in-sector vectors of `ensemble` in lexicographic order.
    pub fn sector(ensemble: &SymmetryEnsemble) -> Result<Self> {
        let dim = crate::physicality::count_sector(ensemble);
        let dim = usize::try_from(dim).unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::Capacity {
                dim,
                cap: MAX_DIMENSION,
            });
        }
        let oracle = PhysicalityOracle::new(ensemble.clone())?;
        Ok(Self::from_states(oracle.enumerate_sector()))
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisVector] {
        &self.states
    }

    pub fn index_of(&self, x: BasisVector) -> Option<usize> {
        self.index.get(&x.raw()).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub dimension: usize,
}

/// Rows of `H` projected onto `basis`, as `(column, H_row,col)` lists.
fn sparse_rows(h: &QubitHamiltonian, basis: &SectorBasis) -> Result<Vec<Vec<(usize, Complex64)>>> {
    let rows: Vec<Result<Vec<(usize, Complex64)>>> = exec::map(basis.states(), |&x| {
        let mut row = Vec::with_capacity(h.max_connections());
        // H is Hermitian, so the row of x is the conjugated column of x.
        h.for_each_connected(x, |y, h_yx| {
            if let Some(j) = basis.index_of(y) {
                row.push((j, h_yx.conj()));
            }
        })?;
        Ok(row)
    });
    rows.into_iter().collect()
}

/// Projection of `H` onto `basis` as a dense Hermitian matrix.
pub fn dense_matrix(h: &QubitHamiltonian, basis: &SectorBasis) -> Result<DMatrix<Complex64>> {
    let dim = basis.dimension();
    let rows = sparse_rows(h, basis)?;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            m[(i, j)] += v;
        }
    }
    Ok(m)
}

fn lowest_dense(h: &QubitHamiltonian, basis: &SectorBasis) -> Result<f64> {
    let m = dense_matrix(h, basis)?;
    let real = m.iter().all(|v| v.im == 0.0);
    let lowest = if real {
        SymmetricEigen::new(m.map(|v| v.re)).eigenvalues.min()
    } else {
        SymmetricEigen::new(m).eigenvalues.min()
    };
    Ok(lowest)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    libm::sqrt(a.iter().map(Complex64::norm_sqr).sum())
}

fn scale(a: &mut [Complex64], s: f64) {
    for v in a {
        *v *= s;
    }
}

fn lowest_lanczos(h: &QubitHamiltonian, basis: &SectorBasis) -> Result<f64> {
    let rows = sparse_rows(h, basis)?;
    let dim = rows.len();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        exec::map(&rows, |row| row.iter().map(|&(j, h)| h * v[j]).sum())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();
    let n0 = norm(&start);
    scale(&mut start, 1.0 / n0);

    let krylov = KRYLOV_DIM.min(dim);
    let mut best = f64::INFINITY;
    for _ in 0..MAX_RESTARTS {
        let mut basis_vecs: Vec<Vec<Complex64>> = alloc::vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for j in 0..krylov {
            let mut w = apply(&basis_vecs[j]);
            let alpha = dot(&basis_vecs[j], &w).re;
            alphas.push(alpha);
            // Two passes of Gram-Schmidt against the whole Krylov basis.
            for _ in 0..2 {
                for v in &basis_vecs {
                    let c = dot(v, &w);
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let beta = norm(&w);
            if j + 1 == krylov || beta < 1e-13 {
                break;
            }
            scale(&mut w, 1.0 / beta);
            betas.push(beta);
            basis_vecs.push(w);
        }
        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let imin = eig.eigenvalues.imin();
        let theta = eig.eigenvalues[imin];
        let y = eig.eigenvectors.column(imin);

        let mut ritz = alloc::vec![Complex64::new(0.0, 0.0); dim];
        for (coef, v) in y.iter().zip(&basis_vecs) {
            for (ri, vi) in ritz.iter_mut().zip(v) {
                *ri += vi * *coef;
            }
        }
        let rn = norm(&ritz);
        scale(&mut ritz, 1.0 / rn);
        let hr = apply(&ritz);
        let residual = norm(
            &hr.iter()
                .zip(&ritz)
                .map(|(a, b)| a - b * theta)
                .collect::<Vec<_>>(),
        );
        best = theta;
        if residual <= RESIDUAL_TOLERANCE * theta.abs().max(1.0) || k == dim {
            return Ok(theta);
        }
        start = ritz;
    }
    Err(Error::Aborted(alloc::format!(
        "Lanczos did not converge after {MAX_RESTARTS} restarts (last estimate {best})"
    )))
}

/// Lowest eigenvalue of `h`, within the sector of `ensemble` when given.
///
/// Bases larger than [`MAX_DIMENSION`] are rejected with a capacity error.
pub fn ground_energy(
    h: &QubitHamiltonian,
    ensemble: Option<&SymmetryEnsemble>,
) -> Result<GroundState> {
    let basis = match ensemble {
        Some(e) => {
            if e.n_qubits() != h.n_qubits() {
                return Err(input_err!(
                    "sector has {} qubits, Hamiltonian {}",
                    e.n_qubits(),
                    h.n_qubits()
                ));
            }
            SectorBasis::sector(e)?
        }
        None => SectorBasis::full(h.n_qubits())?,
    };
    ground_energy_in(h, &basis)
}

/// Lowest eigenvalue of `h` projected onto `basis`.
pub fn ground_energy_in(h: &QubitHamiltonian, basis: &SectorBasis) -> Result<GroundState> {
    let dimension = basis.dimension();
    if dimension == 0 {
        return Err(Error::Config("empty basis".into()));
    }
    let energy = if dimension < DENSE_LIMIT {
        lowest_dense(h, basis)?
    } else {
        lowest_lanczos(h, basis)?
    };
    Ok(GroundState { energy, dimension })
}

/// Spin-½ Heisenberg chain `J Σ_⟨ij⟩ S_i·S_j = (J/4) Σ (XX + YY + ZZ)`.
pub fn build_heisenberg(
    n_qubits: usize,
    coupling: f64,
    periodic: bool,
) -> Result<QubitHamiltonian> {
    if n_qubits < 2 {
        return Err(input_err!("a Heisenberg chain needs at least two sites"));
    }
    let mut bonds: Vec<(usize, usize)> = (0..n_qubits - 1).map(|i| (i, i + 1)).collect();
    if periodic && n_qubits > 2 {
        bonds.push((n_qubits - 1, 0));
    }
    let mut terms = Vec::with_capacity(3 * bonds.len());
    for (i, j) in bonds {
        let m = (1u64 << i) | (1u64 << j);
        let c = Complex64::new(0.25 * coupling, 0.0);
        terms.push(PauliTerm::from_masks(c, n_qubits, m, 0));
        terms.push(PauliTerm::from_masks(c, n_qubits, m, m));
        terms.push(PauliTerm::from_masks(c, n_qubits, 0, m));
    }
    QubitHamiltonian::new(n_qubits, 0.0, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ham(n: usize, terms: &[(&str, f64)]) -> QubitHamiltonian {
        let terms = terms
            .iter()
            .map(|&t| PauliTerm::try_from(t).unwrap())
            .collect();
        QubitHamiltonian::new(n, 0.0, terms).unwrap()
    }

    #[test]
    fn single_z() {
        let g = ground_energy(&ham(1, &[("Z", 1.0)]), None).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert_eq!(g.dimension, 2);
    }

    #[test]
    fn two_spin_singlet() {
        let h = build_heisenberg(2, 1.0, false).unwrap();
        assert_eq!(h.terms().len(), 3);
        let g = ground_energy(&h, None).unwrap();
        assert!((g.energy + 0.75).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_ring_of_four() {
        let h = build_heisenberg(4, 1.0, true).unwrap();
        let g = ground_energy(&h, None).unwrap();
        assert!((g.energy + 2.0).abs() < 1e-12);
    }

    #[test]
    fn sector_restriction() {
        let h = build_heisenberg(8, 1.0, true).unwrap();
        let e = SymmetryEnsemble::builder(8)
            .magnetization(0)
            .unwrap()
            .build()
            .unwrap();
        let sector = ground_energy(&h, Some(&e)).unwrap();
        let full = ground_energy(&h, None).unwrap();
        assert_eq!(sector.dimension, 70);
        assert!((sector.energy - full.energy).abs() < 1e-10);
        // Known ring value for eight sites.
        assert!((full.energy + 3.651_093_408_937_176).abs() < 1e-9);
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = build_heisenberg(12, 1.0, true).unwrap();
        let e = SymmetryEnsemble::builder(12)
            .magnetization(0)
            .unwrap()
            .build()
            .unwrap();
        let basis = SectorBasis::sector(&e).unwrap();
        assert_eq!(basis.dimension(), 924);
        let dense = lowest_dense(&h, &basis).unwrap();
        let lanczos = lowest_lanczos(&h, &basis).unwrap();
        assert!((dense - lanczos).abs() < 1e-9, "{dense} vs {lanczos}");
    }

    #[test]
    fn capacity_is_enforced() {
        let h = build_heisenberg(20, 1.0, true).unwrap();
        assert!(matches!(
            ground_energy(&h, None),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn full_basis_is_lexicographic() {
        let b = SectorBasis::full(3).unwrap();
        let s: Vec<_> = b.states().iter().map(|x| alloc::format!("{x}")).collect();
        assert_eq!(s, ["000", "001", "010", "011", "100", "101", "110", "111"]);
        assert_eq!(b.index_of("011".parse().unwrap()), Some(3));
    }
}
