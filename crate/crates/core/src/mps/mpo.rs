//! Matrix product operators and the environment contractions shared by
//! expectation values and the DMRG solver.
//!
//! Operator site tensors are stored as `[left, out, in, right]`. Left
//! environments are `[mpo bond, bra bond, ket bond]` and right environments
//! `[mpo bond, ket bond, bra bond]`.

use super::{hilbert_dim, zero, MatrixProductState, SiteTensor, DEFAULT_MAX_DENSE_STATES};
use crate::error::{Error, Result};
use crate::tensor::{gemm, gemm_adj_lhs, gemm_adj_rhs, permute_into, DenseTensor, Scalar, C64};

/// One site of an MPO, `W[left, out, in, right]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MpoSite {
    left: usize,
    out: usize,
    inp: usize,
    right: usize,
    data: Vec<C64>,
}

impl MpoSite {
    pub fn new(left: usize, out: usize, inp: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if [left, out, inp, right].contains(&0) || data.len() != left * out * inp * right {
            return Err(Error::InvalidShape(format!(
                "MPO site {left}x{out}x{inp}x{right} with {} entries",
                data.len()
            )));
        }
        Ok(Self { left, out, inp, right, data })
    }

    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Self { left, out: phys, inp: phys, right, data: vec![zero(); left * phys * phys * right] }
    }

    /// Adds `op` (a `phys x phys` matrix) to the block at bond indices `(a, b)`.
    pub fn add_block(&mut self, a: usize, b: usize, op: &DenseTensor) -> Result<()> {
        if a >= self.left || b >= self.right || op.dims() != [self.out, self.inp] {
            return Err(Error::InvalidShape(format!(
                "block ({a},{b}) of shape {:?} in a {}x{}x{}x{} site",
                op.dims(),
                self.left,
                self.out,
                self.inp,
                self.right
            )));
        }
        for t in 0..self.out {
            for s in 0..self.inp {
                let idx = ((a * self.out + t) * self.inp + s) * self.right + b;
                self.data[idx] += op.at(t, s);
            }
        }
        Ok(())
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn out_dim(&self) -> usize {
        self.out
    }

    pub fn in_dim(&self) -> usize {
        self.inp
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

/// An open-boundary matrix product operator.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixProductOperator {
    sites: Vec<MpoSite>,
}

impl MatrixProductOperator {
    pub fn new(sites: Vec<MpoSite>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidShape("an MPO needs at least one site".into()));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::InvalidShape("outer MPO bonds must have extent 1".into()));
        }
        for (k, pair) in sites.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::InvalidShape(format!("MPO bond {k} does not chain")));
            }
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[MpoSite] {
        &self.sites
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    /// Input local dimensions.
    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|w| w.inp).collect()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|w| w.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Dense matrix of the operator in the product basis.
    pub fn to_dense_matrix(&self) -> Result<DenseTensor> {
        self.to_dense_matrix_with_cap(DEFAULT_MAX_DENSE_STATES)
    }

    pub fn to_dense_matrix_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        let dim_out = hilbert_dim(&self.sites.iter().map(|w| w.out).collect::<Vec<_>>(), cap)?;
        let dim_in = hilbert_dim(&self.site_dims(), cap)?;
        let need = dim_out.checked_mul(dim_in).ok_or_else(|| Error::Resource("matrix size overflows".into()))?;
        let mut probe: Vec<C64> = Vec::new();
        probe
            .try_reserve_exact(need)
            .map_err(|_| Error::Resource(format!("cannot allocate a {dim_out}x{dim_in} matrix")))?;
        drop(probe);
        // acc: [out prefix, in prefix, bond]
        let (mut po, mut pi) = (1usize, 1usize);
        let mut acc = vec![C64::new(1.0, 0.0)];
        let mut tmp = Vec::new();
        for w in &self.sites {
            let mut x = vec![zero(); po * pi * w.out * w.inp * w.right];
            gemm(&mut x, &acc, &w.data, po * pi, w.left, w.out * w.inp * w.right);
            permute_into(&mut tmp, &x, &[po, pi, w.out, w.inp, w.right], &[0, 2, 1, 3, 4]);
            std::mem::swap(&mut acc, &mut tmp);
            po *= w.out;
            pi *= w.inp;
        }
        DenseTensor::new(vec![po, pi], acc)
    }
}

fn check_compatible(op: &MatrixProductOperator, m: &MatrixProductState) -> Result<()> {
    if op.site_dims() != m.site_dims() {
        return Err(Error::InvalidShape(format!(
            "operator on local dims {:?} applied to a state on {:?}",
            op.site_dims(),
            m.site_dims()
        )));
    }
    Ok(())
}

/// Exact product `O|psi⟩`; bond dimensions multiply.
pub fn apply_mpo(op: &MatrixProductOperator, m: &MatrixProductState) -> Result<MatrixProductState> {
    check_compatible(op, m)?;
    let mut sites = Vec::with_capacity(m.num_sites());
    let mut a_perm = Vec::new();
    let mut out = Vec::new();
    for (w, a) in op.sites.iter().zip(m.sites()) {
        let (l, s, r) = (a.left_dim(), a.phys_dim(), a.right_dim());
        permute_into(&mut a_perm, a.data(), &[l, s, r], &[0, 2, 1]);
        let w_perm = w.view().permuted(&[2, 0, 1, 3]);
        let mut x = vec![zero(); l * r * w.left * w.out * w.right];
        gemm(&mut x, &a_perm, &w_perm, l * r, s, w.left * w.out * w.right);
        permute_into(&mut out, &x, &[l, r, w.left, w.out, w.right], &[0, 2, 3, 1, 4]);
        sites.push(SiteTensor::new(l * w.left, w.out, r * w.right, out.clone())?);
    }
    let max_bond = sites.iter().map(|s| s.right_dim()).max().unwrap_or(1);
    MatrixProductState::new(sites, max_bond)
}

/// `⟨psi|O|psi⟩ / ⟨psi|psi⟩`, contracted as a three-layer sandwich.
pub fn expectation_value(op: &MatrixProductOperator, m: &MatrixProductState) -> Result<C64> {
    check_compatible(op, m)?;
    let mut env = vec![C64::new(1.0, 0.0)];
    for (w, a) in op.sites.iter().zip(m.sites()) {
        env = extend_left_env(&env, a.view(), w.view(), a.view());
    }
    let nrm = super::overlap(m, m)?.re;
    if nrm.is_nan() || nrm <= 0.0 {
        return Err(Error::InvalidInput("expectation value in the zero state".into()));
    }
    Ok(env[0] / nrm)
}

/// Borrowed `[left, phys, right]` site block.
#[derive(Clone, Copy)]
pub(crate) struct SiteView<'a, T> {
    pub data: &'a [T],
    pub left: usize,
    pub phys: usize,
    pub right: usize,
}

/// Borrowed `[left, out, in, right]` operator block.
#[derive(Clone, Copy)]
pub(crate) struct OpView<'a, T> {
    pub data: &'a [T],
    pub left: usize,
    pub out: usize,
    pub inp: usize,
    pub right: usize,
}

impl<T: Copy> OpView<'_, T> {
    pub(crate) fn permuted(&self, perm: &[usize]) -> Vec<T> {
        let mut out = Vec::new();
        permute_into(&mut out, self.data, &[self.left, self.out, self.inp, self.right], perm);
        out
    }
}

impl SiteTensor {
    pub(crate) fn view(&self) -> SiteView<'_, C64> {
        SiteView { data: self.data(), left: self.left_dim(), phys: self.phys_dim(), right: self.right_dim() }
    }
}

impl MpoSite {
    pub(crate) fn view(&self) -> OpView<'_, C64> {
        OpView { data: &self.data, left: self.left, out: self.out, inp: self.inp, right: self.right }
    }
}

/// Moves a left environment `[w, bra, ket]` across one site.
pub(crate) fn extend_left_env<T: Scalar>(env: &[T], bra: SiteView<T>, w: OpView<T>, ket: SiteView<T>) -> Vec<T> {
    let (a, bl, kl) = (w.left, bra.left, ket.left);
    let (s, kr) = (ket.phys, ket.right);
    let (t, br, b) = (bra.phys, bra.right, w.right);
    debug_assert_eq!(env.len(), a * bl * kl);
    let mut x1 = vec![T::ZERO; a * bl * s * kr];
    gemm(&mut x1, env, ket.data, a * bl, kl, s * kr);
    let mut p = Vec::new();
    permute_into(&mut p, &x1, &[a, bl, s, kr], &[1, 3, 0, 2]);
    let w_perm = w.permuted(&[0, 2, 1, 3]);
    let mut x2 = vec![T::ZERO; bl * kr * t * b];
    gemm(&mut x2, &p, &w_perm, bl * kr, a * s, t * b);
    permute_into(&mut p, &x2, &[bl, kr, t, b], &[0, 2, 3, 1]);
    let mut x3 = vec![T::ZERO; br * b * kr];
    gemm_adj_lhs(&mut x3, bra.data, &p, bl * t, br, b * kr);
    let mut out = Vec::new();
    permute_into(&mut out, &x3, &[br, b, kr], &[1, 0, 2]);
    out
}

/// Moves a right environment `[w, ket, bra]` across one site.
pub(crate) fn extend_right_env<T: Scalar>(env: &[T], bra: SiteView<T>, w: OpView<T>, ket: SiteView<T>) -> Vec<T> {
    let (b, kr, br) = (w.right, ket.right, bra.right);
    let (kl, s) = (ket.left, ket.phys);
    let (a, t, bl) = (w.left, bra.phys, bra.left);
    debug_assert_eq!(env.len(), b * kr * br);
    let mut p = Vec::new();
    permute_into(&mut p, env, &[b, kr, br], &[1, 0, 2]);
    let mut x1 = vec![T::ZERO; kl * s * b * br];
    gemm(&mut x1, ket.data, &p, kl * s, kr, b * br);
    permute_into(&mut p, &x1, &[kl, s, b, br], &[0, 3, 1, 2]);
    let w_perm = w.permuted(&[2, 3, 0, 1]);
    let mut x2 = vec![T::ZERO; kl * br * a * t];
    gemm(&mut x2, &p, &w_perm, kl * br, s * b, a * t);
    permute_into(&mut p, &x2, &[kl, br, a, t], &[2, 0, 3, 1]);
    let mut out = vec![T::ZERO; a * kl * bl];
    gemm_adj_rhs(&mut out, &p, bra.data, a * kl, t * br, bl);
    out
}
