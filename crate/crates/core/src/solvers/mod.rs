//! Ground states by two-site DMRG, eigenstates by exact diagonalization,
//! and the exact AKLT state.

mod aklt;
mod dmrg;
mod exact;
mod lanczos;

pub use aklt::aklt_exact_mps;
pub use dmrg::{dmrg_ground_state, DmrgConfig, DmrgOutcome, DmrgReport};
pub use exact::{
    exact_spectrum, mid_spectrum, mid_spectrum_indices, relative_energies, sector_spectrum, sector_spectrum_with_cap,
    EigenSolution, SectorSpectrum, HERMITICITY_TOL,
};
pub use lanczos::{lowest_eigenpair, LanczosConfig, LanczosResult};
