//! Geometric entanglement relative to bond-`chi` matrix product states.
//!
//! `E_chi = 1 - |⟨psi|MPS_chi⟩|^2`, where `MPS_chi` is the left-to-right SVD
//! compression of `psi` to bond dimension `chi`, optionally improved by
//! overlap-maximizing sweeps. `chi = 1` measures distance to product states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::{
    canonicalize, compress, overlap, refine_overlap, truncate_right_canonical, MatrixProductState, StateRef,
};

/// Reported negative differences above this are treated as roundoff.
pub const NEGATIVE_ROUNDOFF: f64 = 1e-12;

/// Allowed deviation of the input norm from one.
pub const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeResult {
    pub chi: usize,
    pub value: f64,
    pub fidelity: f64,
    pub refinement_sweeps: usize,
}

impl GeResult {
    fn from_fidelity(chi: usize, fidelity: f64, refinement_sweeps: usize) -> Self {
        let fidelity = fidelity.clamp(0.0, 1.0);
        Self { chi, value: 1.0 - fidelity, fidelity, refinement_sweeps }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeGeResult {
    pub chi_lo: usize,
    pub chi_hi: usize,
    /// `raw` with roundoff-sized negatives reported as zero.
    pub value: f64,
    pub raw: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeOptions {
    /// Overlap-maximizing sweeps applied after the SVD compression.
    pub refine_sweeps: usize,
}

fn check_normalized(state: StateRef<'_>) -> Result<()> {
    let norm = overlap(state, state)?.re.max(0.0).sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
    }
    Ok(())
}

fn check_chi(chi: usize) -> Result<()> {
    if chi == 0 {
        return Err(Error::InvalidParameter("bond dimension must be at least 1".into()));
    }
    Ok(())
}

pub fn geometric_entanglement<'a>(state: impl Into<StateRef<'a>>, chi: usize) -> Result<GeResult> {
    geometric_entanglement_with(state, chi, &GeOptions::default())
}

pub fn geometric_entanglement_with<'a>(
    state: impl Into<StateRef<'a>>,
    chi: usize,
    opts: &GeOptions,
) -> Result<GeResult> {
    Ok(ge_profile_with(state, &[chi], opts)?.remove(0))
}

/// `E_chi` for each entry of `chis`. For MPS input the canonical form is
/// computed once and shared across all `chi`.
pub fn ge_profile<'a>(state: impl Into<StateRef<'a>>, chis: &[usize]) -> Result<Vec<GeResult>> {
    ge_profile_with(state, chis, &GeOptions::default())
}

pub fn ge_profile_with<'a>(state: impl Into<StateRef<'a>>, chis: &[usize], opts: &GeOptions) -> Result<Vec<GeResult>> {
    let state = state.into();
    if chis.is_empty() {
        return Err(Error::InvalidParameter("empty list of bond dimensions".into()));
    }
    chis.iter().try_for_each(|&c| check_chi(c))?;
    check_normalized(state)?;
    match state {
        StateRef::Dense(psi) => {
            let exact = if opts.refine_sweeps > 0 { Some(compress(psi, usize::MAX)?) } else { None };
            chis.iter()
                .map(|&chi| {
                    let approx = compress(psi, chi)?;
                    finish(state, exact.as_ref(), approx, chi, opts)
                })
                .collect()
        }
        StateRef::Mps(m) => {
            let rc = canonicalize(m, 0)?;
            chis.iter()
                .map(|&chi| {
                    let approx = truncate_right_canonical(&rc, chi)?;
                    finish(state, Some(m), approx, chi, opts)
                })
                .collect()
        }
    }
}

fn finish(
    state: StateRef<'_>,
    exact: Option<&MatrixProductState>,
    approx: MatrixProductState,
    chi: usize,
    opts: &GeOptions,
) -> Result<GeResult> {
    let approx = match (opts.refine_sweeps, exact) {
        (0, _) | (_, None) => approx,
        (sweeps, Some(target)) => refine_overlap(target, &approx, sweeps)?.0,
    };
    let fidelity = overlap(state, &approx)?.norm_sqr();
    Ok(GeResult::from_fidelity(chi, fidelity, opts.refine_sweeps))
}

/// `E_{chi_lo} - E_{chi_hi}` for `chi_lo < chi_hi`.
pub fn relative_ge<'a>(state: impl Into<StateRef<'a>>, chi_lo: usize, chi_hi: usize) -> Result<RelativeGeResult> {
    if chi_lo >= chi_hi {
        return Err(Error::InvalidParameter(format!("need chi_lo < chi_hi, got {chi_lo} and {chi_hi}")));
    }
    let p = ge_profile(state, &[chi_lo, chi_hi])?;
    Ok(relative_from(&p[0], &p[1]))
}

/// Builds the relative measure from two already computed values.
pub fn relative_from(lo: &GeResult, hi: &GeResult) -> RelativeGeResult {
    let raw = lo.value - hi.value;
    let value = if raw < 0.0 && raw > -NEGATIVE_ROUNDOFF { 0.0 } else { raw };
    RelativeGeResult { chi_lo: lo.chi, chi_hi: hi.chi, value, raw }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::DenseState;
    use crate::tensor::{c64, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ghz(n: usize) -> DenseState {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = c64(FRAC_1_SQRT_2, 0.0);
        amps[(1 << n) - 1] = c64(FRAC_1_SQRT_2, 0.0);
        DenseState::new(vec![2; n], amps).unwrap()
    }

    fn bell_pairs(pairs: usize) -> DenseState {
        let bell = [c64(FRAC_1_SQRT_2, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(FRAC_1_SQRT_2, 0.0)];
        let mut amps = vec![c64(1.0, 0.0)];
        for _ in 0..pairs {
            amps = amps.iter().flat_map(|&a| bell.iter().map(move |&b| a * b)).collect();
        }
        DenseState::new(vec![2; 2 * pairs], amps).unwrap()
    }

    #[test]
    fn ghz_values() {
        let psi = ghz(4);
        assert!((geometric_entanglement(&psi, 1).unwrap().value - 0.5).abs() < 1e-12);
        assert!(geometric_entanglement(&psi, 2).unwrap().value.abs() < 1e-12);
        let rel = relative_ge(&psi, 1, 2).unwrap();
        assert!((rel.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_products() {
        for pairs in 1..=4 {
            let psi = bell_pairs(pairs);
            let e1 = geometric_entanglement(&psi, 1).unwrap().value;
            let expect = 1.0 - 0.5f64.powi(pairs as i32);
            assert!((e1 - expect).abs() < 1e-12, "{pairs} pairs: {e1}");
        }
    }

    #[test]
    fn product_state_profile_is_zero() {
        let psi = DenseState::product(&[
            vec![c64(0.6, 0.0), c64(0.0, 0.8)],
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
            vec![c64(FRAC_1_SQRT_2, 0.0), c64(-FRAC_1_SQRT_2, 0.0)],
        ])
        .unwrap();
        for r in ge_profile(&psi, &[1, 2, 4]).unwrap() {
            assert!(r.value.abs() < 1e-12);
        }
        assert_eq!(relative_ge(&psi, 1, 2).unwrap().value, 0.0);
    }

    #[test]
    fn value_is_one_minus_fidelity() {
        let r = geometric_entanglement(&ghz(5), 1).unwrap();
        assert!((r.value - (1.0 - r.fidelity)).abs() < 1e-12);
        assert_eq!(r.chi, 1);
        assert_eq!(r.refinement_sweeps, 0);
    }

    #[test]
    fn errors() {
        let psi = ghz(3);
        assert!(matches!(relative_ge(&psi, 2, 2), Err(Error::InvalidParameter(_))));
        assert!(matches!(relative_ge(&psi, 3, 2), Err(Error::InvalidParameter(_))));
        assert!(matches!(geometric_entanglement(&psi, 0), Err(Error::InvalidParameter(_))));
        let loose = DenseState::new(vec![2], vec![c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        assert!(matches!(geometric_entanglement(&loose, 1), Err(Error::InvalidInput(_))));
        assert!(matches!(ge_profile(&psi, &[]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn mps_input_matches_dense_input() {
        let psi = ghz(6);
        let m = compress(&psi, 2).unwrap();
        for chi in [1, 2] {
            let a = geometric_entanglement(&psi, chi).unwrap();
            let b = geometric_entanglement(&m, chi).unwrap();
            assert!((a.value - b.value).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_negative_difference_is_clamped() {
        let lo = GeResult::from_fidelity(1, 0.5, 0);
        let hi = GeResult { chi: 2, value: 0.5 + 1e-14, fidelity: 0.5 - 1e-14, refinement_sweeps: 0 };
        let r = relative_from(&lo, &hi);
        assert_eq!(r.value, 0.0);
        assert!(r.raw < 0.0);
    }
}
