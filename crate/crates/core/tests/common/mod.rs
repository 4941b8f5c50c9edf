#![allow(dead_code)]

use gechi_core::mps::DenseState;
use gechi_core::tensor::{qr, DenseTensor};
use gechi_core::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut StdRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random normalized state on the given chain.
pub fn random_state(dims: &[usize], seed: u64) -> DenseState {
    let mut rng = StdRng::seed_from_u64(seed);
    let total: usize = dims.iter().product();
    let amps = (0..total).map(|_| gaussian(&mut rng)).collect();
    DenseState::new(dims.to_vec(), amps).unwrap().normalized().unwrap()
}

/// Haar-random `d x d` unitary.
pub fn random_unitary(d: usize, rng: &mut StdRng) -> DenseTensor {
    let g = DenseTensor::matrix_from_fn(d, d, |_, _| gaussian(rng));
    let (mut q, r) = qr(&g).unwrap();
    for j in 0..d {
        let phase = r.at(j, j) / r.at(j, j).norm();
        for i in 0..d {
            q.data_mut()[i * d + j] *= phase;
        }
    }
    q
}

/// Applies `u` to site `site` of a dense state.
pub fn apply_local(psi: &DenseState, site: usize, u: &DenseTensor) -> DenseState {
    let dims = psi.site_dims().to_vec();
    let d = dims[site];
    let inner: usize = dims[site + 1..].iter().product();
    let outer: usize = dims[..site].iter().product();
    let a = psi.amplitudes();
    let mut out = vec![C64::new(0.0, 0.0); a.len()];
    for o in 0..outer {
        for i in 0..inner {
            for s in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..d {
                    acc += u.at(s, t) * a[(o * d + t) * inner + i];
                }
                out[(o * d + s) * inner + i] = acc;
            }
        }
    }
    DenseState::new(dims, out).unwrap()
}

/// `|<phi_1 ... phi_n|psi>|^2` for a product of local vectors.
pub fn product_overlap(psi: &DenseState, local: &[Vec<C64>]) -> f64 {
    let mut vec = psi.amplitudes().to_vec();
    for phi in local {
        let d = phi.len();
        let rest = vec.len() / d;
        vec = (0..rest).map(|r| (0..d).map(|s| phi[s].conj() * vec[s * rest + r]).sum()).collect();
    }
    vec[0].norm_sqr()
}

/// Best product-state fidelity by alternating single-site maximization from
/// many random starts.
pub fn brute_force_product_fidelity(psi: &DenseState, starts: usize, seed: u64) -> f64 {
    let dims = psi.site_dims().to_vec();
    let n = dims.len();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..starts {
        let mut local: Vec<Vec<C64>> =
            dims.iter().map(|&d| normalized((0..d).map(|_| gaussian(&mut rng)).collect())).collect();
        let mut last = 0.0;
        for _ in 0..500 {
            for k in 0..n {
                // contract every other site, leaving a vector on site k
                let mut env = vec![C64::new(0.0, 0.0); dims[k]];
                let total = psi.amplitudes().len();
                for (idx, amp) in psi.amplitudes().iter().enumerate() {
                    let mut rem = idx;
                    let mut digits = vec![0; n];
                    for j in (0..n).rev() {
                        digits[j] = rem % dims[j];
                        rem /= dims[j];
                    }
                    let mut w = *amp;
                    for j in (0..n).filter(|&j| j != k) {
                        w *= local[j][digits[j]].conj();
                    }
                    env[digits[k]] += w;
                }
                let _ = total;
                local[k] = normalized(env);
            }
            let f = product_overlap(psi, &local);
            if (f - last).abs() < 1e-15 {
                break;
            }
            last = f;
        }
        best = best.max(last);
    }
    best
}

fn normalized(v: Vec<C64>) -> Vec<C64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}
