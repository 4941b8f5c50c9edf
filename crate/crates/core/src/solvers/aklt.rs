//! Exact bond-2 MPS of the AKLT ground state with spin-1/2 end sites.

use crate::error::{Error, Result};
use crate::mps::{canonicalize, MatrixProductState, SiteTensor};
use crate::tensor::{c64, DenseTensor};

/// Ground state of [`crate::hamiltonians::extended_haldane`] at
/// `j_aklt = 1` on `n` sites: spin-1/2 ends, spin-1 bulk.
///
/// Bulk tensors in the basis `m = +1, 0, -1` are
/// `sqrt(2/3) sigma^+`, `-sigma^z / sqrt(3)` and `-sqrt(2/3) sigma^-`.
/// The left end contracts the first bond with `i sigma^y`, the right end
/// with the identity, so each end spin forms a singlet with the dangling
/// virtual spin next to it.
pub fn aklt_exact_mps(n: usize) -> Result<MatrixProductState> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 sites, got {n}")));
    }
    let r = |rows: &[[f64; 2]; 2]| DenseTensor::from_real_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("2x2");
    let a = (2.0f64 / 3.0).sqrt();
    let b = 1.0 / 3.0f64.sqrt();
    let bulk = SiteTensor::from_matrices(&[
        r(&[[0.0, a], [0.0, 0.0]]),
        r(&[[-b, 0.0], [0.0, b]]),
        r(&[[0.0, 0.0], [-a, 0.0]]),
    ])?;
    // first: [1, sigma, bond], last: [bond, sigma, 1]
    let first = SiteTensor::new(1, 2, 2, vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 0.0)])?;
    let last = SiteTensor::new(2, 2, 1, vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)])?;
    let mut sites = vec![first];
    sites.extend(std::iter::repeat_n(bulk, n - 2));
    sites.push(last);
    let mut m = canonicalize(&MatrixProductState::new(sites, 2)?, 0)?;
    m.normalize()?;
    Ok(m)
}
