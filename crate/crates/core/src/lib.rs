//! Dense tensors, matrix product states and operators, spin-chain
//! Hamiltonians, ground-state and exact solvers, and geometric entanglement
//! measures built on fixed-bond MPS approximations.

pub mod error;
pub mod hamiltonians;
pub mod measures;
pub mod mps;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{DenseTensor, SvdResult, C64};
