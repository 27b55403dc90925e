//! Numerical core for variational Monte Carlo with autoregressive neural
//! quantum states whose sampling is restricted to a quantum-number symmetry
//! sector.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! batch network evaluations across a rayon thread pool; results are
//! bit-identical with and without it.
//!
//! Module map:
//!
//! * [`pauli`]: Pauli-string Hamiltonians, matrix elements, Z₂ symmetry discovery.
//! * [`fermion`]: molecular integrals and the Jordan–Wigner mapping.
//! * [`symmetry`]: locally decomposable quantum-number symmetries and sectors.
//! * [`physicality`]: the memoized physicality oracle and sector counting.
//! * [`anqs`]: the autoregressive ansatz, masking and exact parameter scores.
//! * [`sampler`]: binomial statistics sampling with DU / MU-d pruning.
//! * [`vmc`]: local energies, estimators, ADAM and the optimization loop.
//! * [`ed`]: exact diagonalization reference energies.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod anqs;
mod basis;
pub mod ed;
mod error;
mod exec;
pub mod fermion;
pub mod pauli;
pub mod physicality;
pub mod sampler;
pub mod symmetry;
pub mod vmc;

pub use basis::BasisVector;
pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Largest supported qubit count; basis vectors are packed into a `u64`.
pub const MAX_QUBITS: usize = 64;
