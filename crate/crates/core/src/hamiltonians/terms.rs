//! Hamiltonians as sums of one- and two-site operators, with dense,
//! magnetization-sector and MPO realizations.

use crate::error::{Error, Result};
use crate::mps::{MatrixProductOperator, MpoSite, DEFAULT_MAX_DENSE_STATES};
use crate::tensor::{numerical_rank, svd, DenseTensor, C64};

use super::spin::SpinSite;

/// A two-site operator on sites `first < second`, as a
/// `(d_first d_second) x (d_first d_second)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub first: usize,
    pub second: usize,
    pub op: DenseTensor,
}

/// `H = sum_j onsite_j + sum couplings`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerms {
    sites: Vec<SpinSite>,
    onsite: Vec<Option<DenseTensor>>,
    couplings: Vec<Coupling>,
}

/// Nonzero `(row, value)` entries of each column.
type SparseColumns = Vec<Vec<(usize, C64)>>;

fn sparse_columns(op: &DenseTensor) -> SparseColumns {
    let (rows, cols) = (op.dims()[0], op.dims()[1]);
    (0..cols).map(|c| (0..rows).map(|r| (r, op.at(r, c))).filter(|&(_, v)| v != C64::new(0.0, 0.0)).collect()).collect()
}

impl LocalTerms {
    pub fn new(sites: Vec<SpinSite>) -> Self {
        let n = sites.len();
        Self { sites, onsite: vec![None; n], couplings: Vec::new() }
    }

    pub fn sites(&self) -> &[SpinSite] {
        &self.sites
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(SpinSite::dim).collect()
    }

    pub fn onsite(&self) -> &[Option<DenseTensor>] {
        &self.onsite
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn add_onsite(&mut self, site: usize, op: DenseTensor) -> Result<()> {
        let d = self.sites.get(site).ok_or_else(|| Error::InvalidParameter(format!("no site {site}")))?.dim();
        if op.dims() != [d, d] {
            return Err(Error::InvalidShape(format!("onsite operator {:?} on a site of dimension {d}", op.dims())));
        }
        self.onsite[site] = Some(match self.onsite[site].take() {
            Some(prev) => prev.add_scaled(&op, C64::new(1.0, 0.0))?,
            None => op,
        });
        Ok(())
    }

    /// Adds a two-site term. Only nearest and next-nearest neighbours are
    /// supported.
    pub fn add_coupling(&mut self, first: usize, second: usize, op: DenseTensor) -> Result<()> {
        if first >= second || second >= self.sites.len() || second - first > 2 {
            return Err(Error::InvalidParameter(format!("unsupported coupling between sites {first} and {second}")));
        }
        let d = self.sites[first].dim() * self.sites[second].dim();
        if op.dims() != [d, d] {
            return Err(Error::InvalidShape(format!("coupling operator {:?} for pair dimension {d}", op.dims())));
        }
        self.couplings.push(Coupling { first, second, op });
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let dims = self.site_dims();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        strides
    }

    /// Calls `f(row, value)` for every nonzero `H[row, col]` contribution of
    /// a single term, for all terms.
    fn column_visitor(&self) -> impl Fn(usize, &mut dyn FnMut(usize, C64)) + '_ {
        let strides = self.strides();
        let dims = self.site_dims();
        let onsite: Vec<(usize, SparseColumns)> = self
            .onsite
            .iter()
            .enumerate()
            .filter_map(|(k, op)| op.as_ref().map(|op| (k, sparse_columns(op))))
            .collect();
        let pairs: Vec<(usize, usize, SparseColumns)> =
            self.couplings.iter().map(|c| (c.first, c.second, sparse_columns(&c.op))).collect();
        move |col: usize, f: &mut dyn FnMut(usize, C64)| {
            for (k, cols) in &onsite {
                let s = (col / strides[*k]) % dims[*k];
                for &(t, v) in &cols[s] {
                    f(col + t * strides[*k] - s * strides[*k], v);
                }
            }
            for (i, j, cols) in &pairs {
                let (si, sj) = ((col / strides[*i]) % dims[*i], (col / strides[*j]) % dims[*j]);
                let base = col - si * strides[*i] - sj * strides[*j];
                for &(r, v) in &cols[si * dims[*j] + sj] {
                    let (ti, tj) = (r / dims[*j], r % dims[*j]);
                    f(base + ti * strides[*i] + tj * strides[*j], v);
                }
            }
        }
    }

    pub fn to_dense_matrix(&self) -> Result<DenseTensor> {
        self.to_dense_matrix_with_cap(DEFAULT_MAX_DENSE_STATES)
    }

    /// Dense matrix in the product basis. Fails with a resource error when
    /// the Hilbert space exceeds `cap` states or the matrix cannot be
    /// allocated.
    pub fn to_dense_matrix_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        let dim = crate::mps::hilbert_dim(&self.site_dims(), cap)?;
        let mut data = alloc_matrix(dim)?;
        let visit = self.column_visitor();
        for col in 0..dim {
            visit(col, &mut |row, v| data[row * dim + col] += v);
        }
        DenseTensor::new(vec![dim, dim], data)
    }

    /// `2 S^z_total` of a product basis state.
    pub fn twice_sz_of(&self, index: usize) -> i32 {
        let strides = self.strides();
        self.sites.iter().zip(&strides).map(|(s, &st)| s.twice_m((index / st) % s.dim())).sum()
    }

    /// Whether every term commutes with total `S^z`.
    pub fn conserves_sz(&self) -> bool {
        let single = |site: SpinSite, op: &DenseTensor| {
            sparse_columns(op)
                .iter()
                .enumerate()
                .all(|(c, col)| col.iter().all(|&(r, _)| site.twice_m(r) == site.twice_m(c)))
        };
        let onsite_ok = self.onsite.iter().zip(&self.sites).all(|(op, &s)| op.as_ref().is_none_or(|op| single(s, op)));
        onsite_ok
            && self.couplings.iter().all(|c| {
                let (a, b) = (self.sites[c.first], self.sites[c.second]);
                let m = |x: usize| a.twice_m(x / b.dim()) + b.twice_m(x % b.dim());
                sparse_columns(&c.op)
                    .iter()
                    .enumerate()
                    .all(|(col, entries)| entries.iter().all(|&(r, _)| m(r) == m(col)))
            })
    }

    /// All values of `2 S^z_total` in decreasing order.
    pub fn sz_sectors(&self) -> Vec<i32> {
        let max: i32 = self.sites.iter().map(|s| s.twice_m(0)).sum();
        (-max..=max).rev().step_by(2).collect()
    }

    /// Block of `H` in the sector `2 S^z_total = twice_sz`, together with the
    /// product-basis indices spanning it (ascending). Requires a
    /// magnetization-conserving Hamiltonian.
    pub fn sector_matrix(&self, twice_sz: i32, cap: usize) -> Result<(Vec<usize>, DenseTensor)> {
        if !self.conserves_sz() {
            return Err(Error::InvalidInput("Hamiltonian does not conserve total S^z".into()));
        }
        let dim = crate::mps::hilbert_dim(&self.site_dims(), cap)?;
        let basis: Vec<usize> = (0..dim).filter(|&b| self.twice_sz_of(b) == twice_sz).collect();
        if basis.is_empty() {
            return Err(Error::InvalidParameter(format!("empty magnetization sector {twice_sz}")));
        }
        let mut position = vec![usize::MAX; dim];
        for (k, &b) in basis.iter().enumerate() {
            position[b] = k;
        }
        let m = basis.len();
        let mut data = alloc_matrix(m)?;
        let visit = self.column_visitor();
        for (col, &b) in basis.iter().enumerate() {
            visit(b, &mut |row, v| data[position[row] * m + col] += v);
        }
        Ok((basis, DenseTensor::new(vec![m, m], data)?))
    }

    /// MPO built as a finite-state machine. Two-site terms leaving a site are
    /// split into sums of products through one SVD per site, and the left
    /// factors are shared between nearest- and next-nearest-neighbour terms.
    pub fn to_mpo(&self) -> Result<MatrixProductOperator> {
        let n = self.sites.len();
        let dims = self.site_dims();
        let mut nn: Vec<Option<DenseTensor>> = vec![None; n];
        let mut nnn: Vec<Option<DenseTensor>> = vec![None; n];
        for c in &self.couplings {
            let slot = if c.second - c.first == 1 { &mut nn[c.first] } else { &mut nnn[c.first] };
            *slot = Some(match slot.take() {
                Some(prev) => prev.add_scaled(&c.op, C64::new(1.0, 0.0))?,
                None => c.op.clone(),
            });
        }
        let splits =
            (0..n).map(|k| split_site(k, &dims, nn[k].as_ref(), nnn[k].as_ref())).collect::<Result<Vec<_>>>()?;
        // channels on bond k (right of site k): start, started at k, in transit from k-1, done
        let started = |k: usize| splits[k].left.len();
        let transit = |k: usize| if k >= 1 && !splits[k - 1].second.is_empty() { splits[k - 1].left.len() } else { 0 };
        let width = |k: usize| 2 + started(k) + transit(k);
        let mut sites = Vec::with_capacity(n);
        for k in 0..n {
            let d = dims[k];
            let id = DenseTensor::identity(d);
            let first = k == 0;
            let last = k + 1 == n;
            let (wl, wr) = (if first { 1 } else { width(k - 1) }, if last { 1 } else { width(k) });
            let done_l = wl - 1;
            let done_r = wr - 1;
            let mut w = MpoSite::zeros(wl, d, wr);
            if !last {
                w.add_block(0, 0, &id)?;
                for (m, p) in splits[k].left.iter().enumerate() {
                    w.add_block(0, 1 + m, p)?;
                }
            }
            if let Some(op) = &self.onsite[k] {
                w.add_block(0, done_r, op)?;
            }
            if !first {
                w.add_block(done_l, done_r, &id)?;
                let prev = &splits[k - 1];
                for (m, q) in prev.first.iter().enumerate() {
                    w.add_block(1 + m, done_r, q)?;
                }
                if !prev.second.is_empty() {
                    for m in 0..prev.left.len() {
                        w.add_block(1 + m, 1 + started(k) + m, &id)?;
                    }
                }
                if k >= 2 {
                    let origin = &splits[k - 2];
                    for (m, q) in origin.second.iter().enumerate() {
                        w.add_block(1 + started(k - 1) + m, done_r, q)?;
                    }
                }
            }
            sites.push(w);
        }
        MatrixProductOperator::new(sites)
    }
}

fn alloc_matrix(dim: usize) -> Result<Vec<C64>> {
    let len = dim.checked_mul(dim).ok_or_else(|| Error::Resource("matrix size overflows".into()))?;
    let mut data = Vec::new();
    data.try_reserve_exact(len).map_err(|_| Error::Resource(format!("cannot allocate a {dim}x{dim} matrix")))?;
    data.resize(len, C64::new(0.0, 0.0));
    Ok(data)
}

/// Operator-Schmidt factors of the couplings leaving one site:
/// `nn = sum_m left[m] (x) first[m]`, `nnn = sum_m left[m] (x) 1 (x) second[m]`.
struct SiteSplit {
    left: Vec<DenseTensor>,
    first: Vec<DenseTensor>,
    second: Vec<DenseTensor>,
}

/// Rearranges `O[(t_a t_b), (s_a s_b)]` into `R[(t_a s_a), (t_b s_b)]`.
fn reshuffle(op: &DenseTensor, da: usize, db: usize) -> Result<DenseTensor> {
    op.reshape(&[da, db, da, db])?.permute(&[0, 2, 1, 3])?.into_reshape(&[da * da, db * db])
}

fn split_site(k: usize, dims: &[usize], nn: Option<&DenseTensor>, nnn: Option<&DenseTensor>) -> Result<SiteSplit> {
    let da = dims[k];
    let db = if nn.is_some() { dims[k + 1] } else { 0 };
    let dc = if nnn.is_some() { dims[k + 2] } else { 0 };
    let (cb, cc) = (db * db, dc * dc);
    if cb + cc == 0 {
        return Ok(SiteSplit { left: vec![], first: vec![], second: vec![] });
    }
    let rows = da * da;
    let mut stacked = vec![C64::new(0.0, 0.0); rows * (cb + cc)];
    if let Some(op) = nn {
        let r = reshuffle(op, da, db)?;
        for i in 0..rows {
            stacked[i * (cb + cc)..i * (cb + cc) + cb].copy_from_slice(&r.data()[i * cb..(i + 1) * cb]);
        }
    }
    if let Some(op) = nnn {
        let r = reshuffle(op, da, dc)?;
        for i in 0..rows {
            stacked[i * (cb + cc) + cb..(i + 1) * (cb + cc)].copy_from_slice(&r.data()[i * cc..(i + 1) * cc]);
        }
    }
    let dec = svd(&DenseTensor::new(vec![rows, cb + cc], stacked)?)?;
    let rank = numerical_rank(&dec.s).min(dec.s.len());
    let mut split = SiteSplit { left: vec![], first: vec![], second: vec![] };
    let all_zero = |t: &DenseTensor| t.data().iter().all(|z| z.norm() == 0.0);
    for m in 0..rank {
        if dec.s[m] == 0.0 {
            break;
        }
        let p = DenseTensor::matrix_from_fn(da, da, |t, s| dec.u.at(t * da + s, m) * dec.s[m]);
        split.left.push(p);
        if nn.is_some() {
            split.first.push(DenseTensor::matrix_from_fn(db, db, |t, s| dec.vdag.at(m, t * db + s)));
        }
        if nnn.is_some() {
            split.second.push(DenseTensor::matrix_from_fn(dc, dc, |t, s| dec.vdag.at(m, cb + t * dc + s)));
        }
    }
    if split.first.iter().all(all_zero) {
        split.first.clear();
    }
    if split.second.iter().all(all_zero) {
        split.second.clear();
    }
    Ok(split)
}
