//! Variational improvement of a fixed-bond MPS approximation by one-site
//! overlap maximization.

use super::{canonicalize, overlap, positive_qr, zero, MatrixProductState, SiteTensor};
use crate::error::{Error, Result};
use crate::tensor::{gemm, gemm_adj_lhs, gemm_adj_rhs, DenseTensor, C64};

fn transpose(m: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut t = vec![zero(); m.len()];
    for i in 0..rows {
        for j in 0..cols {
            t[j * rows + i] = m[i * cols + j];
        }
    }
    t
}

/// `[approx bond, target bond]` environment extended by one site to the right.
fn grow_left(env: &[C64], a: &SiteTensor, t: &SiteTensor) -> Vec<C64> {
    let mut y = vec![zero(); a.left * t.phys * t.right];
    gemm(&mut y, env, &t.data, a.left, t.left, t.phys * t.right);
    let mut out = vec![zero(); a.right * t.right];
    gemm_adj_lhs(&mut out, &a.data, &y, a.left * a.phys, a.right, t.right);
    out
}

/// `[approx bond, target bond]` environment extended by one site to the left.
fn grow_right(env: &[C64], a: &SiteTensor, t: &SiteTensor) -> Vec<C64> {
    let env_t = transpose(env, a.right, t.right);
    let mut x = vec![zero(); t.left * t.phys * a.right];
    gemm(&mut x, &t.data, &env_t, t.left * t.phys, t.right, a.right);
    let mut out = vec![zero(); a.left * t.left];
    gemm_adj_rhs(&mut out, &a.data, &x, a.left, a.phys * a.right, t.left);
    out.iter_mut().for_each(|z| *z = z.conj());
    out
}

/// Site tensor maximizing the overlap with the target given both environments.
fn optimal_site(left: &[C64], right: &[C64], t: &SiteTensor, al: usize, ar: usize) -> SiteTensor {
    let mut y = vec![zero(); al * t.phys * t.right];
    gemm(&mut y, left, &t.data, al, t.left, t.phys * t.right);
    let right_t = transpose(right, ar, t.right);
    let mut m = vec![zero(); al * t.phys * ar];
    gemm(&mut m, &y, &right_t, al * t.phys, t.right, ar);
    SiteTensor { left: al, phys: t.phys, right: ar, data: m }
}

/// Runs `sweeps` back-and-forth sweeps that replace one site at a time by the
/// tensor maximizing `|⟨approx|target⟩|` with all other sites fixed. Bond
/// dimensions of `approx` never grow. Returns the normalized result and its
/// fidelity with the normalized target.
pub fn refine_overlap(
    target: &MatrixProductState,
    approx: &MatrixProductState,
    sweeps: usize,
) -> Result<(MatrixProductState, f64)> {
    if target.site_dims() != approx.site_dims() {
        return Err(Error::InvalidShape("target and approximation live on different chains".into()));
    }
    let target_norm2 = overlap(target, target)?.re;
    if !(target_norm2 > 0.0 && target_norm2.is_finite()) {
        return Err(Error::InvalidInput("cannot refine towards the zero state".into()));
    }
    let mut work = canonicalize(approx, 0)?;
    work.normalize()?;
    if sweeps == 0 {
        let f = overlap(&work, target)?.norm_sqr() / target_norm2;
        return Ok((work, f));
    }
    let n = work.num_sites();
    let tsites = target.sites();
    let one = vec![C64::new(1.0, 0.0)];
    let mut lefts = vec![one.clone(); n];
    let mut rights = vec![one.clone(); n];
    for k in (1..n).rev() {
        rights[k - 1] = grow_right(&rights[k], &work.sites[k], &tsites[k]);
    }
    let mut best = 0.0;
    for _ in 0..sweeps {
        for k in 0..n {
            let (al, ar) = (work.sites[k].left, work.sites[k].right);
            let m = optimal_site(&lefts[k], &rights[k], &tsites[k], al, ar);
            if k + 1 < n {
                let mat = DenseTensor::new(vec![al * m.phys, ar], m.data)?;
                let (q, r) = positive_qr(&mat)?;
                let keep = q.dims()[1];
                work.sites[k] = SiteTensor::new(al, m.phys, keep, q.into_data())?;
                work.sites[k + 1] = work.sites[k + 1].left_multiply(&r);
                lefts[k + 1] = grow_left(&lefts[k], &work.sites[k], &tsites[k]);
            } else {
                work.sites[k] = m;
            }
        }
        for k in (0..n).rev() {
            let (al, ar) = (work.sites[k].left, work.sites[k].right);
            let mut m = optimal_site(&lefts[k], &rights[k], &tsites[k], al, ar);
            if k > 0 {
                let mat = DenseTensor::new(vec![al, m.phys * ar], m.data)?;
                let (q, r) = positive_qr(&mat.adjoint()?)?;
                let keep = q.dims()[1];
                work.sites[k] = SiteTensor::new(keep, m.phys, ar, q.adjoint()?.into_data())?;
                work.sites[k - 1] = work.sites[k - 1].right_multiply(&r.adjoint()?);
                rights[k - 1] = grow_right(&rights[k], &work.sites[k], &tsites[k]);
            } else {
                let nrm = m.norm();
                if nrm.is_nan() || nrm <= 0.0 {
                    return Err(Error::Numerical("refinement reached a state orthogonal to the target".into()));
                }
                m.scale(1.0 / nrm);
                best = nrm * nrm / target_norm2;
                work.sites[0] = m;
            }
        }
    }
    work.set_center(Some(0));
    Ok((work, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{compress, fidelity, DenseState};
    use crate::tensor::c64;

    fn pseudo_random_state(dims: Vec<usize>, seed: u64) -> DenseState {
        let total: usize = dims.iter().product();
        let mut x = seed | 1;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps = (0..total).map(|_| c64(next(), next())).collect();
        DenseState::new(dims, amps).unwrap().normalized().unwrap()
    }

    #[test]
    fn refinement_never_lowers_fidelity() {
        for seed in 1..6 {
            let psi = pseudo_random_state(vec![2; 7], seed * 977);
            let exact = compress(&psi, usize::MAX).unwrap();
            for chi in [1, 2, 3] {
                let start = compress(&psi, chi).unwrap();
                let f0 = fidelity(&psi, &start).unwrap();
                let (refined, f1) = refine_overlap(&exact, &start, 3).unwrap();
                assert!(f1 >= f0 - 1e-12, "seed {seed} chi {chi}: {f1} < {f0}");
                assert!((fidelity(&psi, &refined).unwrap() - f1).abs() < 1e-10);
                assert!(refined.bond_dims().iter().all(|&b| b <= chi));
            }
        }
    }

    #[test]
    fn refinement_improves_truncated_random_states() {
        let mut gain = 0.0f64;
        for seed in 1..6 {
            let psi = pseudo_random_state(vec![2; 8], seed * 31);
            let exact = compress(&psi, usize::MAX).unwrap();
            let start = compress(&psi, 2).unwrap();
            let f0 = fidelity(&psi, &start).unwrap();
            let (_, f1) = refine_overlap(&exact, &start, 4).unwrap();
            gain = gain.max(f1 - f0);
        }
        assert!(gain > 1e-4, "largest gain {gain}");
    }

    #[test]
    fn exact_target_is_a_fixed_point() {
        let psi = pseudo_random_state(vec![3, 2, 2], 41);
        let exact = compress(&psi, 16).unwrap();
        let (_, f) = refine_overlap(&exact, &exact, 2).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }
}
