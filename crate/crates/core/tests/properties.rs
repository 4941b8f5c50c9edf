mod common;

use common::{apply_local, brute_force_product_fidelity, random_state, random_unitary};
use gechi_core::measures::{ge_profile, geometric_entanglement, geometric_entanglement_with, relative_ge, GeOptions};
use gechi_core::mps::{canonicalize, compress, fidelity, overlap, to_dense, truncate, DenseState};
use gechi_core::tensor::{eigh, DenseTensor};
use gechi_core::C64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Squared Schmidt values across the only cut, from the reduced density
/// matrix rather than an SVD.
fn schmidt_weights(psi: &DenseState) -> Vec<f64> {
    let (da, db) = (psi.site_dims()[0], psi.site_dims()[1]);
    let a = psi.amplitudes();
    let rho = DenseTensor::matrix_from_fn(da, da, |i, j| (0..db).map(|k| a[i * db + k] * a[j * db + k].conj()).sum());
    let (mut w, _) = eigh(&rho).unwrap();
    w.reverse();
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_site_value_is_the_discarded_schmidt_weight(da in 1usize..=6, db in 1usize..=6, seed: u64) {
        let psi = random_state(&[da, db], seed);
        let w = schmidt_weights(&psi);
        for chi in 1..=da.min(db) + 1 {
            let kept: f64 = w.iter().take(chi).sum();
            let e = geometric_entanglement(&psi, chi).unwrap().value;
            prop_assert!((e - (1.0 - kept).max(0.0)).abs() < 1e-12, "chi {}: {} vs {}", chi, e, 1.0 - kept);
        }
    }

    #[test]
    fn values_decrease_with_bond_dimension(n in 3usize..=8, seed: u64) {
        let dims: Vec<usize> = (0..n).map(|k| if k % 3 == 2 { 3 } else { 2 }).collect();
        let psi = random_state(&dims, seed);
        let chis: Vec<usize> = (1..=32).collect();
        let p = ge_profile(&psi, &chis).unwrap();
        for w in p.windows(2) {
            prop_assert!(w[1].value <= w[0].value + 1e-10);
        }
        prop_assert!(p.last().unwrap().value.abs() < 1e-10);
        let gaps: Vec<f64> = (2..=6).map(|c| relative_ge(&psi, 1, c).unwrap().value).collect();
        for g in gaps.windows(2) {
            prop_assert!(g[0] <= g[1] + 1e-10);
        }
    }

    #[test]
    fn local_unitaries_leave_values_unchanged(seed: u64) {
        let dims = [2, 3, 2, 2, 3];
        let psi = random_state(&dims, seed);
        let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
        let mut rotated = psi.clone();
        for (k, &d) in dims.iter().enumerate() {
            rotated = apply_local(&rotated, k, &random_unitary(d, &mut rng));
        }
        for chi in 1..=5 {
            let a = geometric_entanglement(&psi, chi).unwrap().value;
            let b = geometric_entanglement(&rotated, chi).unwrap().value;
            prop_assert!((a - b).abs() < 1e-10, "chi {}: {} vs {}", chi, a, b);
        }
    }

    #[test]
    fn canonicalize_is_idempotent(seed: u64, center in 0usize..6) {
        let psi = random_state(&[2, 3, 2, 2, 3, 2], seed);
        let m = compress(&psi, 4).unwrap();
        let once = canonicalize(&m, center).unwrap();
        let twice = canonicalize(&once, center).unwrap();
        for (a, b) in once.sites().iter().zip(twice.sites()) {
            prop_assert_eq!(a.data().len(), b.data().len());
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
        prop_assert!((overlap(&m, &once).unwrap() - overlap(&m, &m).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn truncating_an_exact_chain_matches_direct_compression(seed: u64, chi in 1usize..6) {
        let psi = random_state(&[2, 2, 3, 2, 2, 2], seed);
        let direct = compress(&psi, chi).unwrap();
        let via_mps = truncate(&compress(&psi, usize::MAX).unwrap(), chi).unwrap();
        prop_assert_eq!(direct.bond_dims(), via_mps.bond_dims());
        prop_assert!((fidelity(&psi, &direct).unwrap() - fidelity(&psi, &via_mps).unwrap()).abs() < 1e-10);
        prop_assert!((fidelity(&direct, &via_mps).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn dense_and_mps_inputs_agree() {
    let psi = random_state(&[2; 7], 3);
    let m = compress(&psi, usize::MAX).unwrap();
    for chi in 1..=6 {
        let a = geometric_entanglement(&psi, chi).unwrap().value;
        let b = geometric_entanglement(&m, chi).unwrap().value;
        assert!((a - b).abs() < 1e-10);
    }
    assert!((to_dense(&m).unwrap().inner(&psi).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn refined_product_value_matches_brute_force_on_the_w_state() {
    // |W_4>: the optimal product state is sqrt(3/4)|0> + sqrt(1/4)|1> on
    // every site, with fidelity 4 (3/4)^3 (1/4) = 27/64
    let mut amps = vec![C64::new(0.0, 0.0); 16];
    for k in 0..4 {
        amps[1 << k] = C64::new(0.5, 0.0);
    }
    let w = DenseState::new(vec![2; 4], amps).unwrap();
    let opts = GeOptions { refine_sweeps: 50 };
    let e = geometric_entanglement_with(&w, 1, &opts).unwrap().value;
    assert!((e - 37.0 / 64.0).abs() < 1e-6, "{e}");
    let bf = brute_force_product_fidelity(&w, 32, 1);
    assert!((1.0 - bf - e).abs() < 1e-6);
}

#[test]
fn refinement_never_exceeds_the_brute_force_optimum() {
    for seed in 0..8 {
        let psi = random_state(&[2; 4], 100 + seed);
        let bf = brute_force_product_fidelity(&psi, 32, seed);
        let plain = geometric_entanglement(&psi, 1).unwrap().value;
        let refined = geometric_entanglement_with(&psi, 1, &GeOptions { refine_sweeps: 50 }).unwrap().value;
        assert!(refined >= 1.0 - bf - 1e-9, "seed {seed}: {refined} below brute force {}", 1.0 - bf);
        assert!(refined <= plain + 1e-12);
    }
}
