//! Dense complex tensors in row-major order, plus the handful of linear
//! algebra kernels the rest of the crate is built on (matrix products,
//! contraction, thin SVD, thin QR and Hermitian eigendecomposition).
//!
//! Decompositions are delegated to `faer`, which is built without its thread
//! pool so that results are bit-for-bit reproducible for identical inputs.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Singular values below `RANK_CUTOFF * s_max` count as exact zeros when
/// reporting ranks.
pub const RANK_CUTOFF: f64 = 1e-14;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for super::C64 {}
}

/// Element type of the generic kernels: `f64` or [`C64`].
pub trait Scalar:
    faer::traits::ComplexField
    + Copy
    + Send
    + Sync
    + std::fmt::Debug
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::iter::Sum
    + sealed::Sealed
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    fn from_real(x: f64) -> Self;
    fn to_c64(self) -> C64;
    /// Real part only for `f64`.
    fn from_c64(z: C64) -> Self;
    fn conjugate(self) -> Self;
    fn abs2(self) -> f64;
    fn real(self) -> f64;
    fn scale_by(self, x: f64) -> Self;
    fn is_finite_value(self) -> bool;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_real(x: f64) -> Self {
        x
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn conjugate(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn real(self) -> f64 {
        self
    }
    fn scale_by(self, x: f64) -> Self {
        self * x
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for C64 {
    const ZERO: Self = C64::new(0.0, 0.0);
    const ONE: Self = C64::new(1.0, 0.0);
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn real(self) -> f64 {
        self.re
    }
    fn scale_by(self, x: f64) -> Self {
        self * x
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Row-major view of a slice as an `rows x cols` matrix.
#[inline]
pub(crate) fn mat_ref<T: Scalar>(data: &[T], rows: usize, cols: usize) -> MatRef<'_, T> {
    debug_assert_eq!(data.len(), rows * cols);
    MatRef::from_row_major_slice(data, rows, cols)
}

/// `dst = lhs * rhs` for row-major buffers, `lhs: m x k`, `rhs: k x n`.
pub(crate) fn gemm<T: Scalar>(dst: &mut [T], lhs: &[T], rhs: &[T], m: usize, k: usize, n: usize) {
    let dst_mat = faer::MatMut::from_row_major_slice_mut(dst, m, n);
    matmul(dst_mat, Accum::Replace, mat_ref(lhs, m, k), mat_ref(rhs, k, n), T::ONE, Par::Seq);
}

/// `dst = lhs^† * rhs` for row-major buffers, `lhs: k x m`, `rhs: k x n`.
pub(crate) fn gemm_adj_lhs<T: Scalar>(dst: &mut [T], lhs: &[T], rhs: &[T], k: usize, m: usize, n: usize) {
    let dst_mat = faer::MatMut::from_row_major_slice_mut(dst, m, n);
    matmul(dst_mat, Accum::Replace, mat_ref(lhs, k, m).adjoint(), mat_ref(rhs, k, n), T::ONE, Par::Seq);
}

/// `dst = lhs * rhs^†` for row-major buffers, `lhs: m x k`, `rhs: n x k`.
pub(crate) fn gemm_adj_rhs<T: Scalar>(dst: &mut [T], lhs: &[T], rhs: &[T], m: usize, k: usize, n: usize) {
    let dst_mat = faer::MatMut::from_row_major_slice_mut(dst, m, n);
    matmul(dst_mat, Accum::Replace, mat_ref(lhs, m, k), mat_ref(rhs, n, k).adjoint(), T::ONE, Par::Seq);
}

/// Thin SVD of a row-major `rows x cols` buffer: `(u, s, vdag)` with `u` of
/// shape `rows x k`, `vdag` of shape `k x cols`, `k = min(rows, cols)`.
pub(crate) fn svd_raw<T: Scalar>(data: &[T], rows: usize, cols: usize) -> Result<(Vec<T>, Vec<f64>, Vec<T>)> {
    if !data.iter().all(|z| z.is_finite_value()) {
        return Err(Error::Numerical("non-finite entries in input".into()));
    }
    let dec = mat_ref(data, rows, cols).thin_svd().map_err(|e| {
        let norm = data.iter().map(|z| z.abs2()).sum::<f64>().sqrt();
        Error::Numerical(format!("SVD of {rows}x{cols} matrix (norm {norm:.3e}) did not converge: {e:?}"))
    })?;
    let k = rows.min(cols);
    let (u, sv, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let s = (0..k).map(|i| sv[i].real().max(0.0)).collect();
    let mut ud = Vec::with_capacity(rows * k);
    for i in 0..rows {
        ud.extend((0..k).map(|j| u[(i, j)]));
    }
    let mut vd = Vec::with_capacity(k * cols);
    for i in 0..k {
        vd.extend((0..cols).map(|j| v[(j, i)].conjugate()));
    }
    Ok((ud, s, vd))
}

/// Permutes the axes of a row-major buffer. `out` receives the data with axes
/// reordered so that output axis `i` is input axis `perm[i]`.
pub(crate) fn permute_into<T: Copy>(out: &mut Vec<T>, data: &[T], dims: &[usize], perm: &[usize]) {
    let rank = dims.len();
    out.clear();
    out.reserve(data.len());
    if rank == 0 {
        out.extend_from_slice(data);
        return;
    }
    let mut strides = vec![1usize; rank];
    for k in (0..rank - 1).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();
    let inner_dim = new_dims[rank - 1];
    let inner_stride = new_strides[rank - 1];
    let outer: usize = new_dims[..rank - 1].iter().product();
    let mut idx = vec![0usize; rank.saturating_sub(1)];
    let mut base = 0usize;
    for _ in 0..outer {
        if inner_stride == 1 {
            out.extend_from_slice(&data[base..base + inner_dim]);
        } else {
            out.extend((0..inner_dim).map(|t| data[base + t * inner_stride]));
        }
        // odometer over the outer axes
        for ax in (0..rank - 1).rev() {
            idx[ax] += 1;
            base += new_strides[ax];
            if idx[ax] < new_dims[ax] {
                break;
            }
            base -= new_strides[ax] * new_dims[ax];
            idx[ax] = 0;
        }
    }
}

/// A dense complex tensor with positive extents stored in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero extent in {dims:?}")));
        }
        let size: usize = dims.iter().product();
        if size != data.len() {
            return Err(Error::InvalidShape(format!(
                "dims {dims:?} hold {size} elements but {} were supplied",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let size = dims.iter().product();
        Self { dims, data: vec![C64::new(0.0, 0.0); size] }
    }

    pub fn scalar(value: C64) -> Self {
        Self { dims: Vec::new(), data: vec![value] }
    }

    pub fn identity(n: usize) -> Self {
        Self::matrix_from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn matrix_from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { dims: vec![rows, cols], data }
    }

    /// Builds a real matrix from nested rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        Self::new(vec![r, c], rows.iter().flatten().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Element of a rank-2 tensor.
    pub fn at(&self, i: usize, j: usize) -> C64 {
        debug_assert_eq!(self.rank(), 2);
        self.data[i * self.dims[1] + j]
    }

    pub fn reshape(&self, new_dims: &[usize]) -> Result<Self> {
        self.clone().into_reshape(new_dims)
    }

    pub fn into_reshape(self, new_dims: &[usize]) -> Result<Self> {
        let size: usize = new_dims.iter().product();
        if size != self.data.len() || new_dims.contains(&0) {
            return Err(Error::InvalidShape(format!(
                "cannot reshape {:?} ({} elements) into {new_dims:?}",
                self.dims,
                self.data.len()
            )));
        }
        Ok(Self { dims: new_dims.to_vec(), data: self.data })
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank {
            return Err(Error::InvalidShape(format!("permutation {perm:?} for rank {rank}")));
        }
        for &p in perm {
            if p >= rank || seen[p] {
                return Err(Error::InvalidShape(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut out = Vec::new();
        permute_into(&mut out, &self.data, &self.dims, perm);
        Ok(Self { dims: perm.iter().map(|&p| self.dims[p]).collect(), data: out })
    }

    pub fn conj(&self) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|&z| alpha * z).collect() }
    }

    /// Elementwise `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: C64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::InvalidShape(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + alpha * b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn matrix_dims(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::InvalidShape(format!("expected a matrix, got dims {:?}", self.dims))),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let (m, k) = self.matrix_dims()?;
        let (k2, n) = other.matrix_dims()?;
        if k != k2 {
            return Err(Error::InvalidShape(format!("matmul {m}x{k} by {k2}x{n}")));
        }
        let mut data = vec![C64::new(0.0, 0.0); m * n];
        gemm(&mut data, &self.data, &other.data, m, k, n);
        Ok(Self { dims: vec![m, n], data })
    }

    /// Conjugate transpose of a matrix.
    pub fn adjoint(&self) -> Result<Self> {
        self.matrix_dims()?;
        Ok(self.permute(&[1, 0])?.conj())
    }

    /// Kronecker product of two matrices.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.matrix_dims()?;
        let (c, d) = other.matrix_dims()?;
        Ok(Self::matrix_from_fn(a * c, b * d, |i, j| self.at(i / c, j / d) * other.at(i % c, j % d)))
    }

    /// Largest elementwise deviation from hermiticity, `max |m_ij - conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        let (r, c) = self.matrix_dims()?;
        if r != c {
            return Err(Error::InvalidShape(format!("{r}x{c} matrix is not square")));
        }
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i..r {
                worst = worst.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        Ok(worst)
    }

    pub(crate) fn from_faer(m: MatRef<'_, C64>) -> Self {
        Self::matrix_from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Reshape without changing the linear data order.
pub fn reshape(t: &DenseTensor, new_dims: &[usize]) -> Result<DenseTensor> {
    t.reshape(new_dims)
}

/// Contracts axis pairs `(axis of a, axis of b)`. The result carries the
/// unpaired axes of `a` followed by the unpaired axes of `b`, each in order.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in pairs {
        if ia >= a.rank() || ib >= b.rank() || used_a[ia] || used_b[ib] {
            return Err(Error::InvalidShape(format!("bad contraction pair ({ia}, {ib})")));
        }
        if a.dims[ia] != b.dims[ib] {
            return Err(Error::InvalidShape(format!(
                "extent mismatch on pair ({ia}, {ib}): {} vs {}",
                a.dims[ia], b.dims[ib]
            )));
        }
        used_a[ia] = true;
        used_b[ib] = true;
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&i| !used_b[i]).collect();
    let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
    let m: usize = free_a.iter().map(|&i| a.dims[i]).product();
    let k: usize = pairs.iter().map(|p| a.dims[p.0]).product();
    let n: usize = free_b.iter().map(|&i| b.dims[i]).product();
    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;
    let mut data = vec![C64::new(0.0, 0.0); m * n];
    gemm(&mut data, &pa.data, &pb.data, m, k, n);
    let dims: Vec<usize> = free_a.iter().map(|&i| a.dims[i]).chain(free_b.iter().map(|&i| b.dims[i])).collect();
    Ok(DenseTensor { dims, data })
}

/// Thin singular value decomposition `m = u · diag(s) · vdag`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `rows x k`, orthonormal columns.
    pub u: DenseTensor,
    /// Non-increasing, non-negative.
    pub s: Vec<f64>,
    /// `k x cols`, orthonormal rows.
    pub vdag: DenseTensor,
    /// Sum of squared singular values removed by truncation.
    pub discarded_weight: f64,
}

impl SvdResult {
    /// Number of singular values above `RANK_CUTOFF * s_max`.
    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.s)
    }

    /// Keeps the leading `keep` singular triplets (at least one).
    pub fn truncated(self, keep: usize) -> Self {
        let k = self.s.len();
        let keep = keep.clamp(1, k);
        if keep == k {
            return self;
        }
        let rows = self.u.dims[0];
        let cols = self.vdag.dims[1];
        let dropped: f64 = self.s[keep..].iter().map(|x| x * x).sum();
        let u_data: Vec<C64> = self.u.data.chunks(k).flat_map(|row| row[..keep].iter().copied()).collect();
        let vdag_data = self.vdag.data[..keep * cols].to_vec();
        Self {
            u: DenseTensor { dims: vec![rows, keep], data: u_data },
            s: self.s[..keep].to_vec(),
            vdag: DenseTensor { dims: vec![keep, cols], data: vdag_data },
            discarded_weight: self.discarded_weight + dropped,
        }
    }
}

pub fn numerical_rank(s: &[f64]) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    s.iter().take_while(|&&x| x > RANK_CUTOFF * smax).count()
}

fn check_finite(t: &DenseTensor) -> Result<()> {
    if t.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite entries in input".into()))
    }
}

/// Thin SVD of a rank-2 tensor. Output is deterministic for identical input.
pub fn svd(m: &DenseTensor) -> Result<SvdResult> {
    let (rows, cols) = m.matrix_dims()?;
    let (u, s, vdag) = svd_raw(&m.data, rows, cols)?;
    let k = s.len();
    Ok(SvdResult {
        u: DenseTensor { dims: vec![rows, k], data: u },
        s,
        vdag: DenseTensor { dims: vec![k, cols], data: vdag },
        discarded_weight: 0.0,
    })
}

/// Thin QR decomposition `m = q · r` with `q: rows x k`, `r: k x cols`.
pub fn qr(m: &DenseTensor) -> Result<(DenseTensor, DenseTensor)> {
    let (rows, cols) = m.matrix_dims()?;
    check_finite(m)?;
    let dec = mat_ref(&m.data, rows, cols).qr();
    let q = dec.compute_thin_Q();
    let r = dec.thin_R();
    Ok((DenseTensor::from_faer(q.as_ref()), DenseTensor::from_faer(r)))
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching eigenvectors as the columns of the returned matrix. Only the
/// lower triangle is read.
pub fn eigh(h: &DenseTensor) -> Result<(Vec<f64>, DenseTensor)> {
    let (r, c) = h.matrix_dims()?;
    if r != c {
        return Err(Error::InvalidShape(format!("{r}x{c} matrix is not square")));
    }
    check_finite(h)?;
    if h.data.iter().all(|z| z.im == 0.0) {
        // real symmetric input: roughly four times cheaper
        let real = Mat::<f64>::from_fn(r, r, |i, j| h.data[i * r + j].re);
        let dec = real
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let vals = dec.S().column_vector().iter().copied().collect();
        let u = dec.U();
        Ok((vals, DenseTensor::matrix_from_fn(r, r, |i, j| C64::new(u[(i, j)], 0.0))))
    } else {
        let dec = mat_ref(&h.data, r, r)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let vals = dec.S().column_vector().iter().map(|z| z.re).collect();
        Ok((vals, DenseTensor::from_faer(dec.U())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(dims: Vec<usize>, xs: &[f64]) -> DenseTensor {
        DenseTensor::new(dims, xs.iter().map(|&x| c64(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn flatten_preserves_order() {
        let t = real(vec![2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let f = reshape(&t, &[4]).unwrap();
        assert_eq!(f.dims(), &[4]);
        assert_eq!(f.data(), t.data());
        let back = reshape(&f, &[2, 2]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn reshape_size_mismatch() {
        let t = DenseTensor::zeros(vec![2, 3]);
        assert!(matches!(reshape(&t, &[5]), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn zero_extent_rejected() {
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn permute_transposes() {
        let t = real(vec![2, 3], &[1., 2., 3., 4., 5., 6.]);
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        assert_eq!(p.data().iter().map(|z| z.re).collect::<Vec<_>>(), vec![1., 4., 2., 5., 3., 6.]);
        assert!(t.permute(&[0, 0]).is_err());
    }

    #[test]
    fn permute_rank4_matches_index_formula() {
        let dims = [2, 3, 4, 5];
        let t = DenseTensor::new(dims.to_vec(), (0..120).map(|x| c64(x as f64, 0.0)).collect()).unwrap();
        let p = t.permute(&[2, 0, 3, 1]).unwrap();
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..4 {
                    for d in 0..5 {
                        let src = ((a * 3 + b) * 4 + c) * 5 + d;
                        let dst = ((c * 2 + a) * 5 + d) * 3 + b;
                        assert_eq!(p.data()[dst].re, src as f64);
                    }
                }
            }
        }
    }

    #[test]
    fn svd_of_identity_and_diagonal() {
        let id = DenseTensor::identity(2);
        assert_eq!(svd(&id).unwrap().s, vec![1.0, 1.0]);
        let d = real(vec![2, 2], &[3.0, 0.0, 0.0, 4.0]);
        let r = svd(&d).unwrap();
        assert!((r.s[0] - 4.0).abs() < 1e-14 && (r.s[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_of_bell_matrix() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = svd(&real(vec![2, 2], &[h, 0.0, 0.0, h])).unwrap();
        for s in r.s {
            assert!((s - h).abs() < 1e-15);
        }
    }

    #[test]
    fn svd_rejects_non_matrix() {
        assert!(matches!(svd(&DenseTensor::zeros(vec![2, 2, 2])), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn svd_rejects_nan() {
        let t = real(vec![1, 2], &[f64::NAN, 1.0]);
        assert!(matches!(svd(&t), Err(Error::Numerical(_))));
    }

    #[test]
    fn truncation_accumulates_discarded_weight() {
        let d = real(vec![3, 3], &[3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let r = svd(&d).unwrap().truncated(1);
        assert_eq!(r.s.len(), 1);
        assert!((r.discarded_weight - 5.0).abs() < 1e-12);
        assert_eq!(r.u.dims(), &[3, 1]);
        assert_eq!(r.vdag.dims(), &[1, 3]);
    }

    #[test]
    fn numerical_rank_ignores_roundoff() {
        assert_eq!(numerical_rank(&[1.0, 1e-3, 1e-15, 0.0]), 2);
        assert_eq!(numerical_rank(&[0.0]), 0);
    }

    #[test]
    fn contract_matrix_vector() {
        let m = real(vec![2, 3], &[1., 2., 3., 4., 5., 6.]);
        let v = real(vec![3], &[1., 0., -1.]);
        let r = contract(&m, &v, &[(1, 0)]).unwrap();
        assert_eq!(r.dims(), &[2]);
        assert_eq!(r.data()[0].re, -2.0);
        assert_eq!(r.data()[1].re, -2.0);
    }

    #[test]
    fn contract_with_identity_is_identity_map() {
        let t = DenseTensor::new(vec![2, 3, 2], (0..12).map(|x| c64(x as f64, 0.5 * x as f64)).collect()).unwrap();
        let r = contract(&t, &DenseTensor::identity(3), &[(1, 0)]).unwrap();
        assert_eq!(r.permute(&[0, 2, 1]).unwrap(), t);
    }

    #[test]
    fn contract_norm_of_normalized_vector() {
        let v = DenseTensor::new(vec![2], vec![c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap();
        let r = contract(&v.conj(), &v, &[(0, 0)]).unwrap();
        assert!(r.dims().is_empty());
        assert!((r.data()[0] - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn contract_extent_mismatch() {
        let a = DenseTensor::zeros(vec![2, 3]);
        let b = DenseTensor::zeros(vec![2, 3]);
        assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn eigh_of_diagonal() {
        let d = real(vec![3, 3], &[2., 0., 0., 0., 1., 0., 0., 0., 3.]);
        let (vals, _) = eigh(&d).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn qr_reconstructs() {
        let m =
            DenseTensor::new(vec![4, 3], (0..12).map(|x| c64((x * x % 7) as f64, (x % 3) as f64)).collect()).unwrap();
        let (q, r) = qr(&m).unwrap();
        let back = q.matmul(&r).unwrap();
        assert!(back.add_scaled(&m, c64(-1.0, 0.0)).unwrap().norm() < 1e-12);
        let qq = q.adjoint().unwrap().matmul(&q).unwrap();
        assert!(qq.add_scaled(&DenseTensor::identity(3), c64(-1.0, 0.0)).unwrap().norm() < 1e-12);
    }
}
