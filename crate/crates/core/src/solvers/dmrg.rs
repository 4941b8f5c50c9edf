//! Two-site DMRG for open-chain ground states.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::lanczos::{lowest_eigenpair, LanczosConfig};
use crate::error::{Error, Result};
use crate::mps::{
    canonicalize, expectation_value, extend_left_env, extend_right_env, MatrixProductOperator, MatrixProductState,
    MpoSite, OpView, SiteTensor, SiteView,
};
use crate::tensor::{eigh, gemm, numerical_rank, permute_into, svd_raw, Scalar, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmrgConfig {
    /// Bond dimension cap of the variational state.
    pub max_bond: usize,
    /// Maximum number of full (left-right-left) sweeps.
    pub sweeps: usize,
    /// Converged once the sweep energy changes by less than this.
    pub energy_tol: f64,
    /// Largest discarded weight allowed per two-site split.
    pub truncation_tol: f64,
    /// Bond cap of the first sweep; doubled every sweep up to `max_bond`.
    pub initial_bond: usize,
    pub lanczos_max_iter: usize,
    pub lanczos_tol: f64,
    /// Seed of the random initial state.
    pub seed: u64,
}

impl Default for DmrgConfig {
    fn default() -> Self {
        Self {
            max_bond: 64,
            sweeps: 20,
            energy_tol: 1e-10,
            truncation_tol: 1e-10,
            initial_bond: 16,
            lanczos_max_iter: 40,
            lanczos_tol: 1e-10,
            seed: 0,
        }
    }
}

impl DmrgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_bond == 0 || self.sweeps == 0 || self.initial_bond == 0 || self.lanczos_max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_bond, sweeps, initial_bond and lanczos_max_iter must be positive".into(),
            ));
        }
        for (name, x) in [
            ("energy_tol", self.energy_tol),
            ("truncation_tol", self.truncation_tol),
            ("lanczos_tol", self.lanczos_tol),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(())
    }

    fn lanczos(&self) -> LanczosConfig {
        LanczosConfig { max_iter: self.lanczos_max_iter, tol: self.lanczos_tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmrgReport {
    /// Lowest Ritz value at the end of each sweep.
    pub sweep_energies: Vec<f64>,
    pub converged: bool,
    /// Largest discarded weight of the last sweep.
    pub max_discarded_weight: f64,
    pub bond_dims: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DmrgOutcome {
    /// `⟨psi|H|psi⟩` of the returned state.
    pub energy: f64,
    /// Normalized, canonical at site 0.
    pub state: MatrixProductState,
    pub report: DmrgReport,
}

/// Site block owned by the sweep.
#[derive(Clone, Debug)]
struct Block<T> {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<T>,
}

impl<T: Scalar> Block<T> {
    fn view(&self) -> SiteView<'_, T> {
        SiteView { data: &self.data, left: self.left, phys: self.phys, right: self.right }
    }
}

/// MPO site converted to the sweep scalar.
struct OpBlock<T> {
    left: usize,
    out: usize,
    inp: usize,
    right: usize,
    data: Vec<T>,
}

impl<T: Scalar> OpBlock<T> {
    fn from_site(w: &MpoSite) -> Self {
        Self {
            left: w.left_dim(),
            out: w.out_dim(),
            inp: w.in_dim(),
            right: w.right_dim(),
            data: w.data().iter().map(|&z| T::from_c64(z)).collect(),
        }
    }

    fn view(&self) -> OpView<'_, T> {
        OpView { data: &self.data, left: self.left, out: self.out, inp: self.inp, right: self.right }
    }
}

/// Effective Hamiltonian of two neighbouring sites.
struct TwoSite<'a, T> {
    left: &'a [T],
    right: &'a [T],
    w1: Vec<T>,
    w2: Vec<T>,
    a: usize,
    b: usize,
    c: usize,
    dl: usize,
    d1: usize,
    d2: usize,
    dr: usize,
}

impl<'a, T: Scalar> TwoSite<'a, T> {
    fn new(left: &'a [T], right: &'a [T], w1: &OpBlock<T>, w2: &OpBlock<T>, dl: usize, dr: usize) -> Self {
        Self {
            left,
            right,
            // [left, in, out, right]
            w1: w1.view().permuted(&[0, 2, 1, 3]),
            w2: w2.view().permuted(&[0, 2, 1, 3]),
            a: w1.left,
            b: w1.right,
            c: w2.right,
            dl,
            d1: w1.inp,
            d2: w2.inp,
            dr,
        }
    }

    fn apply(&self, theta: &[T]) -> Vec<T> {
        let (a, b, c, dl, d1, d2, dr) = (self.a, self.b, self.c, self.dl, self.d1, self.d2, self.dr);
        let mut p = Vec::new();
        let mut x = vec![T::ZERO; a * dl * d1 * d2 * dr];
        gemm(&mut x, self.left, theta, a * dl, dl, d1 * d2 * dr);
        permute_into(&mut p, &x, &[a, dl, d1, d2, dr], &[1, 3, 4, 0, 2]);
        let mut y = vec![T::ZERO; dl * d2 * dr * d1 * b];
        gemm(&mut y, &p, &self.w1, dl * d2 * dr, a * d1, d1 * b);
        permute_into(&mut p, &y, &[dl, d2, dr, d1, b], &[0, 3, 2, 4, 1]);
        let mut z = vec![T::ZERO; dl * d1 * dr * d2 * c];
        gemm(&mut z, &p, &self.w2, dl * d1 * dr, b * d2, d2 * c);
        permute_into(&mut p, &z, &[dl, d1, dr, d2, c], &[0, 1, 3, 4, 2]);
        let mut out = vec![T::ZERO; dl * d1 * d2 * dr];
        gemm(&mut out, &p, self.right, dl * d1 * d2, c * dr, dr);
        out
    }
}

/// Random right-canonical state with bonds capped at `bond`.
fn random_state<T: Scalar>(dims: &[usize], bond: usize, seed: u64) -> Result<Vec<Block<T>>> {
    let n = dims.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5;
    let mut bonds = vec![1usize; n + 1];
    for k in 1..n {
        let left: usize = dims[..k].iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        let right: usize = dims[k..].iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        bonds[k] = bond.min(left).min(right);
    }
    let mut sites: Vec<Block<T>> = (0..n)
        .map(|k| {
            let len = bonds[k] * dims[k] * bonds[k + 1];
            Block {
                left: bonds[k],
                phys: dims[k],
                right: bonds[k + 1],
                data: (0..len).map(|_| T::from_real(uniform())).collect(),
            }
        })
        .collect();
    for k in (1..n).rev() {
        let s = &sites[k];
        let (u, sv, vdag) = svd_raw(&s.data, s.left, s.phys * s.right)?;
        let keep = sv.len();
        let us: Vec<T> = u.chunks(keep).flat_map(|row| row.iter().zip(&sv).map(|(&z, &x)| z.scale_by(x))).collect();
        sites[k] = Block { left: keep, phys: s.phys, right: s.right, data: vdag };
        let prev = &sites[k - 1];
        let mut data = vec![T::ZERO; prev.left * prev.phys * keep];
        gemm(&mut data, &prev.data, &us, prev.left * prev.phys, prev.right, keep);
        sites[k - 1] = Block { left: prev.left, phys: prev.phys, right: keep, data };
    }
    let nrm = sites[0].data.iter().map(|z| z.abs2()).sum::<f64>().sqrt();
    sites[0].data.iter_mut().for_each(|z| *z = z.scale_by(1.0 / nrm));
    Ok(sites)
}

struct Split<T> {
    left: Block<T>,
    right: Block<T>,
    discarded: f64,
}

/// SVD split of a two-site tensor, keeping the smallest number of singular
/// values whose discarded weight is within `tol`, capped at `cap`. The
/// singular values go to the right tensor when `sweep_right`.
#[allow(clippy::too_many_arguments)]
fn split<T: Scalar>(
    theta: &[T],
    dl: usize,
    d1: usize,
    d2: usize,
    dr: usize,
    cap: usize,
    tol: f64,
    sweep_right: bool,
) -> Result<Split<T>> {
    let (u, s, vdag) = svd_raw(theta, dl * d1, d2 * dr)?;
    let k = s.len();
    let total: f64 = s.iter().map(|x| x * x).sum();
    let mut keep = k;
    let mut tail = 0.0;
    while keep > 1 {
        let next = tail + s[keep - 1] * s[keep - 1];
        if next > tol * total {
            break;
        }
        tail = next;
        keep -= 1;
    }
    let keep = keep.min(cap).min(numerical_rank(&s).max(1));
    let discarded: f64 = s[keep..].iter().map(|x| x * x).sum();
    let mut u: Vec<T> = u.chunks(k).flat_map(|row| row[..keep].iter().copied()).collect();
    let mut vdag = vdag[..keep * d2 * dr].to_vec();
    if sweep_right {
        for (row, &x) in vdag.chunks_mut(d2 * dr).zip(&s) {
            row.iter_mut().for_each(|z| *z = z.scale_by(x));
        }
    } else {
        for row in u.chunks_mut(keep) {
            row.iter_mut().zip(&s).for_each(|(z, &x)| *z = z.scale_by(x));
        }
    }
    Ok(Split {
        left: Block { left: dl, phys: d1, right: keep, data: u },
        right: Block { left: keep, phys: d2, right: dr, data: vdag },
        discarded: discarded / total.max(f64::MIN_POSITIVE),
    })
}

fn two_site_tensor<T: Scalar>(a: &Block<T>, b: &Block<T>) -> Vec<T> {
    let mut theta = vec![T::ZERO; a.left * a.phys * b.phys * b.right];
    gemm(&mut theta, &a.data, &b.data, a.left * a.phys, a.right, b.phys * b.right);
    theta
}

fn single_site_ground(op: &MatrixProductOperator) -> Result<DmrgOutcome> {
    let h = op.to_dense_matrix()?;
    let (vals, vecs) = eigh(&h)?;
    let d = vals.len();
    let site = SiteTensor::new(1, d, 1, (0..d).map(|i| vecs.at(i, 0)).collect())?;
    let state = canonicalize(&MatrixProductState::new(vec![site], 1)?, 0)?;
    Ok(DmrgOutcome {
        energy: vals[0],
        state,
        report: DmrgReport {
            sweep_energies: vec![vals[0]],
            converged: true,
            max_discarded_weight: 0.0,
            bond_dims: vec![],
        },
    })
}

struct Sweeps<T> {
    sites: Vec<Block<T>>,
    energies: Vec<f64>,
    converged: bool,
    max_discarded: f64,
}

fn sweep<T: Scalar>(op: &MatrixProductOperator, cfg: &DmrgConfig) -> Result<Sweeps<T>> {
    let n = op.num_sites();
    let dims = op.site_dims();
    let start_bond = cfg.initial_bond.min(cfg.max_bond);
    let mut sites = random_state::<T>(&dims, start_bond, cfg.seed)?;
    let w: Vec<OpBlock<T>> = op.sites().iter().map(OpBlock::from_site).collect();
    // lefts[k]: environment of sites < k, rights[k]: environment of sites > k
    let mut lefts = vec![vec![T::ONE]; n];
    let mut rights = vec![vec![T::ONE]; n];
    for k in (1..n).rev() {
        rights[k - 1] = extend_right_env(&rights[k], sites[k].view(), w[k].view(), sites[k].view());
    }
    let lanczos = cfg.lanczos();
    let mut energies = Vec::new();
    let mut converged = false;
    let mut max_discarded = 0.0f64;
    let mut cap = start_bond;
    for pass in 0..cfg.sweeps {
        max_discarded = 0.0;
        let mut energy = f64::NAN;
        let order = (0..n - 1).map(|k| (k, true)).chain((0..n - 1).rev().map(|k| (k, false)));
        for (k, sweep_right) in order {
            let (dl, dr) = (sites[k].left, sites[k + 1].right);
            let (d1, d2) = (dims[k], dims[k + 1]);
            let heff = TwoSite::new(&lefts[k], &rights[k + 1], &w[k], &w[k + 1], dl, dr);
            let theta = two_site_tensor(&sites[k], &sites[k + 1]);
            let ground = lowest_eigenpair(|v| heff.apply(v), &theta, &lanczos)?;
            energy = ground.value;
            let parts = split(&ground.vector, dl, d1, d2, dr, cap, cfg.truncation_tol, sweep_right)?;
            max_discarded = max_discarded.max(parts.discarded);
            sites[k] = parts.left;
            sites[k + 1] = parts.right;
            if sweep_right {
                lefts[k + 1] = extend_left_env(&lefts[k], sites[k].view(), w[k].view(), sites[k].view());
            } else {
                rights[k] = extend_right_env(&rights[k + 1], sites[k + 1].view(), w[k + 1].view(), sites[k + 1].view());
            }
        }
        let settled = energies.last().is_some_and(|&prev: &f64| (prev - energy).abs() < cfg.energy_tol);
        energies.push(energy);
        if settled && cap == cfg.max_bond {
            converged = true;
            break;
        }
        if pass + 1 < cfg.sweeps {
            cap = cap.saturating_mul(2).min(cfg.max_bond);
        }
    }
    Ok(Sweeps { sites, energies, converged, max_discarded })
}

fn finish<T: Scalar>(op: &MatrixProductOperator, cfg: &DmrgConfig, run: Sweeps<T>) -> Result<DmrgOutcome> {
    let sites = run
        .sites
        .into_iter()
        .map(|b| SiteTensor::new(b.left, b.phys, b.right, b.data.into_iter().map(T::to_c64).collect()))
        .collect::<Result<Vec<_>>>()?;
    let mut state = canonicalize(&MatrixProductState::new(sites, cfg.max_bond)?, 0)?;
    state.normalize()?;
    let energy = expectation_value(op, &state)?.re;
    let bond_dims = state.bond_dims();
    Ok(DmrgOutcome {
        energy,
        state,
        report: DmrgReport {
            sweep_energies: run.energies,
            converged: run.converged,
            max_discarded_weight: run.max_discarded,
            bond_dims,
        },
    })
}

/// Variational ground state of `op`. Sweeps stop once the bond cap has
/// reached `max_bond` and the sweep energy has settled to `energy_tol`;
/// otherwise the best state after `sweeps` sweeps is returned with
/// `converged = false`. Real operators are swept in real arithmetic.
pub fn dmrg_ground_state(op: &MatrixProductOperator, cfg: &DmrgConfig) -> Result<DmrgOutcome> {
    cfg.validate()?;
    if op.num_sites() == 1 {
        return single_site_ground(op);
    }
    let real = op.sites().iter().all(|w| w.data().iter().all(|z| z.im == 0.0));
    if real {
        finish(op, cfg, sweep::<f64>(op, cfg)?)
    } else {
        finish(op, cfg, sweep::<C64>(op, cfg)?)
    }
}
