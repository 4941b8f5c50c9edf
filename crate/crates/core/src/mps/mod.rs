//! Pure states of open chains with mixed local dimensions, either as a full
//! amplitude vector ([`DenseState`]) or as a matrix product state
//! ([`MatrixProductState`]).
//!
//! Site tensors are stored as `[left bond, physical, right bond]` in row-major
//! order, and basis states of a chain are enumerated with the first site as
//! the most significant digit. Both conventions are shared with the dense
//! Hamiltonian builders, so a [`DenseState`] amplitude vector can be fed to a
//! dense matrix directly.
//!
//! ```text
//!   A[0] -- A[1] -- A[2] -- ... -- A[n-1]
//!    |       |       |              |
//!   s_0     s_1     s_2           s_{n-1}
//! ```

mod mpo;
mod refine;

pub use mpo::{apply_mpo, expectation_value, MatrixProductOperator, MpoSite};
pub(crate) use mpo::{extend_left_env, extend_right_env, OpView, SiteView};
pub use refine::refine_overlap;

use crate::error::{Error, Result};
use crate::tensor::{gemm, gemm_adj_lhs, numerical_rank, qr, svd, DenseTensor, C64};

/// Default cap on the number of basis states a dense object may span.
pub const DEFAULT_MAX_DENSE_STATES: usize = 1 << 20;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Checks a list of local dimensions and returns the Hilbert-space size, or a
/// resource error when it exceeds `cap`.
pub(crate) fn hilbert_dim(site_dims: &[usize], cap: usize) -> Result<usize> {
    let mut total: usize = 1;
    for &d in site_dims {
        total = total.checked_mul(d).filter(|&t| t <= cap).ok_or_else(|| {
            Error::Resource(format!("chain with local dims {site_dims:?} exceeds {cap} basis states"))
        })?;
    }
    Ok(total)
}

/// A pure state as a full vector of amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    site_dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(site_dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        if site_dims.is_empty() || site_dims.contains(&0) {
            return Err(Error::InvalidShape(format!("invalid local dimensions {site_dims:?}")));
        }
        let total: usize = site_dims.iter().product();
        if total != amplitudes.len() {
            return Err(Error::InvalidShape(format!(
                "{} amplitudes for local dimensions {site_dims:?} ({total} expected)",
                amplitudes.len()
            )));
        }
        Ok(Self { site_dims, amplitudes })
    }

    /// Computational basis state `|s_0 s_1 ...⟩`.
    pub fn basis_state(site_dims: Vec<usize>, config: &[usize]) -> Result<Self> {
        if config.len() != site_dims.len() || config.iter().zip(&site_dims).any(|(&s, &d)| s >= d) {
            return Err(Error::InvalidShape(format!("configuration {config:?} for dims {site_dims:?}")));
        }
        let total = hilbert_dim(&site_dims, DEFAULT_MAX_DENSE_STATES)?;
        let index = config.iter().zip(&site_dims).fold(0, |acc, (&s, &d)| acc * d + s);
        let mut amplitudes = vec![zero(); total];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { site_dims, amplitudes })
    }

    /// Tensor product of single-site vectors.
    pub fn product(local: &[Vec<C64>]) -> Result<Self> {
        let site_dims: Vec<usize> = local.iter().map(Vec::len).collect();
        hilbert_dim(&site_dims, DEFAULT_MAX_DENSE_STATES)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for v in local {
            amps = amps.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
        }
        Self::new(site_dims, amps)
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn num_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::InvalidInput(format!("cannot normalize a state of norm {nrm}")));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= nrm);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Result<C64> {
        if self.site_dims != other.site_dims {
            return Err(Error::InvalidShape(format!("{:?} vs {:?}", self.site_dims, other.site_dims)));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Rank-3 tensor `A[left, phys, right]` of one chain site.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if left == 0 || phys == 0 || right == 0 || data.len() != left * phys * right {
            return Err(Error::InvalidShape(format!("site tensor {left}x{phys}x{right} with {} entries", data.len())));
        }
        Ok(Self { left, phys, right, data })
    }

    /// Builds a site from one `left x right` matrix per physical index.
    pub fn from_matrices(mats: &[DenseTensor]) -> Result<Self> {
        let first = mats.first().ok_or_else(|| Error::InvalidShape("no matrices".into()))?;
        let (l, r) = match first.dims() {
            [l, r] => (*l, *r),
            d => return Err(Error::InvalidShape(format!("expected matrices, got {d:?}"))),
        };
        if mats.iter().any(|m| m.dims() != [l, r]) {
            return Err(Error::InvalidShape("matrices of different shapes".into()));
        }
        let p = mats.len();
        let mut data = vec![zero(); l * p * r];
        for (s, m) in mats.iter().enumerate() {
            for a in 0..l {
                for b in 0..r {
                    data[(a * p + s) * r + b] = m.at(a, b);
                }
            }
        }
        Self::new(l, p, r, data)
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn phys_dim(&self) -> usize {
        self.phys
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, l: usize, s: usize, r: usize) -> C64 {
        self.data[(l * self.phys + s) * self.right + r]
    }

    pub fn to_tensor(&self) -> DenseTensor {
        DenseTensor::new(vec![self.left, self.phys, self.right], self.data.clone()).expect("consistent site")
    }

    fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|z| *z *= alpha);
    }

    fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sum_l m[a, l] * A[l, s, r]`
    fn left_multiply(&self, m: &DenseTensor) -> SiteTensor {
        let rows = m.dims()[0];
        let mut data = vec![zero(); rows * self.phys * self.right];
        gemm(&mut data, m.data(), &self.data, rows, self.left, self.phys * self.right);
        SiteTensor { left: rows, phys: self.phys, right: self.right, data }
    }

    /// `sum_r A[l, s, r] * m[r, b]`
    fn right_multiply(&self, m: &DenseTensor) -> SiteTensor {
        let cols = m.dims()[1];
        let mut data = vec![zero(); self.left * self.phys * cols];
        gemm(&mut data, &self.data, m.data(), self.left * self.phys, self.right, cols);
        SiteTensor { left: self.left, phys: self.phys, right: cols, data }
    }

    /// Largest deviation of `sum_{l,s} conj(A) A` from the identity.
    pub fn left_orthogonality_defect(&self) -> f64 {
        let mut g = vec![zero(); self.right * self.right];
        gemm_adj_lhs(&mut g, &self.data, &self.data, self.left * self.phys, self.right, self.right);
        identity_defect(&g, self.right)
    }

    /// Largest deviation of `sum_{s,r} A conj(A)` from the identity.
    pub fn right_orthogonality_defect(&self) -> f64 {
        let m = DenseTensor::new(vec![self.left, self.phys * self.right], self.data.clone()).expect("site");
        let g = m.matmul(&m.adjoint().expect("matrix")).expect("shapes");
        identity_defect(g.data(), self.left)
    }
}

fn identity_defect(g: &[C64], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[i * n + j] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// An open-boundary matrix product state.
#[derive(Clone, Debug)]
pub struct MatrixProductState {
    sites: Vec<SiteTensor>,
    max_bond: usize,
    canonical_center: Option<usize>,
}

impl MatrixProductState {
    /// Validates bond chaining and boundary extents. `max_bond` is the bond
    /// dimension cap the state was built with; every bond must respect it.
    pub fn new(sites: Vec<SiteTensor>, max_bond: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidShape("an MPS needs at least one site".into()));
        }
        if max_bond == 0 {
            return Err(Error::InvalidParameter("bond dimension must be at least 1".into()));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::InvalidShape("outer bonds of an open chain must have extent 1".into()));
        }
        for (k, pair) in sites.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::InvalidShape(format!(
                    "bond {k}: right extent {} of site {k} vs left extent {} of site {}",
                    pair[0].right,
                    pair[1].left,
                    k + 1
                )));
            }
            if pair[0].right > max_bond {
                return Err(Error::InvalidShape(format!("bond {k} extent {} exceeds {max_bond}", pair[0].right)));
            }
        }
        Ok(Self { sites, max_bond, canonical_center: None })
    }

    fn from_parts(sites: Vec<SiteTensor>, center: Option<usize>) -> Self {
        let max_bond = sites.iter().map(|s| s.right).max().unwrap_or(1).max(1);
        Self { sites, max_bond, canonical_center: center }
    }

    /// Product state from one local vector per site.
    pub fn product(local: &[Vec<C64>]) -> Result<Self> {
        let sites = local.iter().map(|v| SiteTensor::new(1, v.len(), 1, v.clone())).collect::<Result<Vec<_>>>()?;
        Self::new(sites, 1)
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn max_bond(&self) -> usize {
        self.max_bond
    }

    pub fn canonical_center(&self) -> Option<usize> {
        self.canonical_center
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.phys).collect()
    }

    /// Extents of the `n - 1` internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s.right).collect()
    }

    pub fn norm(&self) -> f64 {
        overlap(self, self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
    }

    /// Rescales to unit norm without touching the gauge.
    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::InvalidInput(format!("cannot normalize an MPS of norm {nrm}")));
        }
        let k = self.canonical_center.unwrap_or(0);
        self.sites[k].scale(1.0 / nrm);
        Ok(())
    }

    pub(crate) fn set_center(&mut self, center: Option<usize>) {
        self.canonical_center = center;
        self.max_bond = self.sites.iter().map(|s| s.right).max().unwrap_or(1).max(1);
    }
}

/// Either representation of a pure state, for operations that accept both.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Dense(&'a DenseState),
    Mps(&'a MatrixProductState),
}

impl<'a> From<&'a DenseState> for StateRef<'a> {
    fn from(s: &'a DenseState) -> Self {
        StateRef::Dense(s)
    }
}

impl<'a> From<&'a MatrixProductState> for StateRef<'a> {
    fn from(s: &'a MatrixProductState) -> Self {
        StateRef::Mps(s)
    }
}

impl StateRef<'_> {
    pub fn site_dims(&self) -> Vec<usize> {
        match self {
            StateRef::Dense(d) => d.site_dims.clone(),
            StateRef::Mps(m) => m.site_dims(),
        }
    }
}

/// Splits `data` (interpreted as `rows x cols`) with a truncated SVD, keeping
/// at most `chi` singular values and never more than the numerical rank.
/// Returns `(u, s, vdag, kept, discarded weight)`.
fn truncated_split(
    data: Vec<C64>,
    rows: usize,
    cols: usize,
    chi: usize,
) -> Result<(DenseTensor, Vec<f64>, DenseTensor, f64)> {
    let m = DenseTensor::new(vec![rows, cols], data)?;
    let full = svd(&m)?;
    let keep = chi.min(numerical_rank(&full.s)).max(1);
    let t = full.truncated(keep);
    Ok((t.u, t.s, t.vdag, t.discarded_weight))
}

fn scale_rows(m: &mut DenseTensor, s: &[f64]) {
    let cols = m.dims()[1];
    for (row, &w) in m.data_mut().chunks_mut(cols).zip(s) {
        row.iter_mut().for_each(|z| *z *= w);
    }
}

/// Compresses a dense state into an MPS of bond dimension at most `chi` by a
/// single left-to-right sweep of truncated SVDs. At each cut the `chi`
/// largest singular values are kept and the singular values are absorbed into
/// the remainder. The result is left-canonical with unit norm.
pub fn compress(state: &DenseState, chi: usize) -> Result<MatrixProductState> {
    if chi == 0 {
        return Err(Error::InvalidParameter("bond dimension must be at least 1".into()));
    }
    let dims = state.site_dims();
    let n = dims.len();
    let mut sites = Vec::with_capacity(n);
    let mut rem = state.amplitudes.clone();
    let mut left = 1usize;
    for &d in &dims[..n - 1] {
        let rows = left * d;
        let cols = rem.len() / rows;
        let (u, s, mut vdag, _) = truncated_split(rem, rows, cols, chi)?;
        let keep = s.len();
        sites.push(SiteTensor::new(left, d, keep, u.into_data())?);
        scale_rows(&mut vdag, &s);
        rem = vdag.into_data();
        left = keep;
    }
    let mut last = SiteTensor::new(left, dims[n - 1], 1, rem)?;
    let nrm = last.norm();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(Error::InvalidInput("cannot compress the zero state".into()));
    }
    last.scale(1.0 / nrm);
    sites.push(last);
    let mut m = MatrixProductState::new(sites, chi.max(1))?;
    m.canonical_center = Some(n - 1);
    Ok(m)
}

/// Contracts an MPS into its full amplitude vector.
pub fn to_dense(m: &MatrixProductState) -> Result<DenseState> {
    to_dense_with_cap(m, DEFAULT_MAX_DENSE_STATES)
}

pub fn to_dense_with_cap(m: &MatrixProductState, cap: usize) -> Result<DenseState> {
    let dims = m.site_dims();
    hilbert_dim(&dims, cap)?;
    // acc: [prefix configurations, bond]
    let mut acc = vec![C64::new(1.0, 0.0)];
    let mut prefix = 1usize;
    for site in &m.sites {
        let mut next = vec![zero(); prefix * site.phys * site.right];
        gemm(&mut next, &acc, &site.data, prefix, site.left, site.phys * site.right);
        acc = next;
        prefix *= site.phys;
    }
    DenseState::new(dims, acc)
}

/// `⟨a|b⟩`, conjugating `a`. MPS-MPS overlaps are contracted site by site
/// without building either dense vector.
pub fn overlap<'a, 'b>(a: impl Into<StateRef<'a>>, b: impl Into<StateRef<'b>>) -> Result<C64> {
    let (a, b) = (a.into(), b.into());
    let (da, db) = (a.site_dims(), b.site_dims());
    if da != db {
        return Err(Error::InvalidShape(format!("overlap of states with local dims {da:?} and {db:?}")));
    }
    match (a, b) {
        (StateRef::Dense(x), StateRef::Dense(y)) => x.inner(y),
        (StateRef::Mps(x), StateRef::Mps(y)) => Ok(mps_overlap(x, y)),
        (StateRef::Mps(x), StateRef::Dense(y)) => Ok(mps_dense_overlap(x, y)),
        (StateRef::Dense(x), StateRef::Mps(y)) => Ok(mps_dense_overlap(y, x).conj()),
    }
}

fn mps_overlap(a: &MatrixProductState, b: &MatrixProductState) -> C64 {
    // env: [bond of a, bond of b]
    let mut env = vec![C64::new(1.0, 0.0)];
    for (x, y) in a.sites.iter().zip(&b.sites) {
        let mut t = vec![zero(); x.left * y.phys * y.right];
        gemm(&mut t, &env, &y.data, x.left, y.left, y.phys * y.right);
        let mut next = vec![zero(); x.right * y.right];
        gemm_adj_lhs(&mut next, &x.data, &t, x.left * x.phys, x.right, y.right);
        env = next;
    }
    env[0]
}

/// `⟨m|psi⟩` by absorbing the conjugated site tensors into the amplitude
/// vector from the left.
fn mps_dense_overlap(m: &MatrixProductState, psi: &DenseState) -> C64 {
    let mut acc = psi.amplitudes.clone();
    let mut bond = 1usize;
    for site in &m.sites {
        let rest = acc.len() / (bond * site.phys);
        let mut next = vec![zero(); site.right * rest];
        gemm_adj_lhs(&mut next, &site.data, &acc, bond * site.phys, site.right, rest);
        acc = next;
        bond = site.right;
    }
    acc[0]
}

/// Thin QR with the diagonal of `r` made real and non-negative, so that the
/// factorization of an isometry is the isometry itself.
fn positive_qr(m: &DenseTensor) -> Result<(DenseTensor, DenseTensor)> {
    let (mut q, mut r) = qr(m)?;
    let k = r.dims()[0];
    let (qrows, rcols) = (q.dims()[0], r.dims()[1]);
    for i in 0..k {
        let d = r.at(i, i);
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for j in 0..rcols {
            r.data_mut()[i * rcols + j] *= phase.conj();
        }
        for row in 0..qrows {
            q.data_mut()[row * k + i] *= phase;
        }
    }
    Ok((q, r))
}

/// Brings sites left of `center` into left-orthogonal form and sites right of
/// it into right-orthogonal form. The represented state is unchanged.
pub fn canonicalize(m: &MatrixProductState, center: usize) -> Result<MatrixProductState> {
    let n = m.num_sites();
    if center >= n {
        return Err(Error::InvalidParameter(format!("center {center} outside a chain of {n} sites")));
    }
    let mut sites = m.sites.clone();
    for k in 0..center {
        let s = &sites[k];
        let mat = DenseTensor::new(vec![s.left * s.phys, s.right], s.data.clone())?;
        let (q, r) = positive_qr(&mat)?;
        let keep = q.dims()[1];
        sites[k] = SiteTensor::new(s.left, s.phys, keep, q.into_data())?;
        sites[k + 1] = sites[k + 1].left_multiply(&r);
    }
    for k in (center + 1..n).rev() {
        let s = &sites[k];
        // A = L Q with Q right-orthogonal, via QR of the adjoint
        let mat = DenseTensor::new(vec![s.left, s.phys * s.right], s.data.clone())?;
        let (q, r) = positive_qr(&mat.adjoint()?)?;
        let keep = q.dims()[1];
        let qdag = q.adjoint()?;
        sites[k] = SiteTensor::new(keep, s.phys, s.right, qdag.into_data())?;
        sites[k - 1] = sites[k - 1].right_multiply(&r.adjoint()?);
    }
    Ok(MatrixProductState::from_parts(sites, Some(center)))
}

/// Truncates every bond to at most `chi` by a left-to-right sweep of
/// truncated SVDs starting from the right-canonical form. On an exact MPS of
/// a dense state this reproduces [`compress`] of that state. The result is
/// normalized and left-canonical.
pub fn truncate(m: &MatrixProductState, chi: usize) -> Result<MatrixProductState> {
    if chi == 0 {
        return Err(Error::InvalidParameter("bond dimension must be at least 1".into()));
    }
    let rc = canonicalize(m, 0)?;
    truncate_right_canonical(&rc, chi)
}

/// Left-to-right truncation sweep of a state already canonicalized at site 0.
pub(crate) fn truncate_right_canonical(rc: &MatrixProductState, chi: usize) -> Result<MatrixProductState> {
    debug_assert_eq!(rc.canonical_center, Some(0));
    let n = rc.num_sites();
    let mut sites = Vec::with_capacity(n);
    let mut carry = rc.sites[0].clone();
    for k in 0..n - 1 {
        let (u, s, mut vdag, _) = truncated_split(carry.data.clone(), carry.left * carry.phys, carry.right, chi)?;
        let keep = s.len();
        sites.push(SiteTensor::new(carry.left, carry.phys, keep, u.into_data())?);
        scale_rows(&mut vdag, &s);
        carry = rc.sites[k + 1].left_multiply(&vdag);
    }
    let nrm = carry.norm();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(Error::InvalidInput("cannot truncate the zero state".into()));
    }
    carry.scale(1.0 / nrm);
    sites.push(carry);
    let mut out = MatrixProductState::new(sites, chi)?;
    out.canonical_center = Some(n - 1);
    Ok(out)
}

/// Fidelity `|⟨a|b⟩|^2 / (⟨a|a⟩⟨b|b⟩)`.
pub fn fidelity<'a, 'b>(a: impl Into<StateRef<'a>>, b: impl Into<StateRef<'b>>) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    let ab = overlap(a, b)?;
    let aa = overlap(a, a)?.re;
    let bb = overlap(b, b)?.re;
    Ok(ab.norm_sqr() / (aa * bb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::c64;

    fn ghz(n: usize) -> DenseState {
        let mut amps = vec![zero(); 1 << n];
        amps[0] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[(1 << n) - 1] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DenseState::new(vec![2; n], amps).unwrap()
    }

    #[test]
    fn product_state_compresses_to_bond_one() {
        let v = |a: f64, b: f64| vec![c64(a.cos(), 0.0), c64(0.0, a.sin() * b)];
        let psi = DenseState::product(&[v(0.3, 1.0), v(1.1, -1.0), v(0.7, 1.0), vec![c64(0.0, 1.0), zero(), zero()]])
            .unwrap();
        let m = compress(&psi, 1).unwrap();
        assert!(m.bond_dims().iter().all(|&b| b == 1));
        assert!((fidelity(&psi, &m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_has_exact_bond_two() {
        let psi = ghz(4);
        let m = compress(&psi, 2).unwrap();
        assert_eq!(m.bond_dims(), vec![2, 2, 2]);
        let back = to_dense(&m).unwrap();
        assert!((overlap(&psi, &back).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compress_rejects_zero_chi() {
        assert!(matches!(compress(&ghz(3), 0), Err(Error::InvalidParameter(_))));
        let m = compress(&ghz(3), 2).unwrap();
        assert!(matches!(truncate(&m, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn single_site_mps_is_its_vector() {
        let psi = DenseState::new(vec![3], vec![c64(0.6, 0.0), zero(), c64(0.0, 0.8)]).unwrap();
        let m = compress(&psi, 4).unwrap();
        assert_eq!(m.num_sites(), 1);
        assert_eq!(to_dense(&m).unwrap().amplitudes(), psi.amplitudes());
    }

    #[test]
    fn orthogonal_basis_states_have_zero_overlap() {
        let a = DenseState::basis_state(vec![2, 3], &[0, 1]).unwrap();
        let b = DenseState::basis_state(vec![2, 3], &[0, 2]).unwrap();
        assert_eq!(overlap(&a, &b).unwrap(), zero());
        let (ma, mb) = (compress(&a, 1).unwrap(), compress(&b, 1).unwrap());
        assert!(overlap(&ma, &mb).unwrap().norm() < 1e-15);
        assert!((overlap(&ma, &a).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_dimension_mismatch() {
        let a = DenseState::basis_state(vec![2, 2], &[0, 0]).unwrap();
        let b = DenseState::basis_state(vec![2, 3], &[0, 0]).unwrap();
        assert!(matches!(overlap(&a, &b), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn ghz_truncated_to_product_has_half_fidelity() {
        let m = compress(&ghz(4), 2).unwrap();
        let t = truncate(&m, 1).unwrap();
        assert!((fidelity(&m, &t).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn to_dense_respects_cap() {
        let m = MatrixProductState::product(&vec![vec![c64(1.0, 0.0), zero()]; 12]).unwrap();
        assert!(matches!(to_dense_with_cap(&m, 1 << 10), Err(Error::Resource(_))));
        assert!(to_dense_with_cap(&m, 1 << 12).is_ok());
    }

    #[test]
    fn invalid_chaining_is_rejected() {
        let a = SiteTensor::new(1, 2, 2, vec![zero(); 4]).unwrap();
        let b = SiteTensor::new(3, 2, 1, vec![zero(); 6]).unwrap();
        assert!(MatrixProductState::new(vec![a.clone(), b], 4).is_err());
        let c = SiteTensor::new(2, 2, 1, vec![zero(); 4]).unwrap();
        assert!(MatrixProductState::new(vec![a.clone(), c.clone()], 1).is_err());
        assert!(MatrixProductState::new(vec![a, c], 2).is_ok());
    }
}
