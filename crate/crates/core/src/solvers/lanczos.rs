//! Lowest eigenpair of a Hermitian operator given only as a matrix-vector
//! product.

use crate::error::{Error, Result};
use crate::tensor::{eigh, DenseTensor, Scalar, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosConfig {
    /// Krylov space size cap.
    pub max_iter: usize,
    /// Stop once the Ritz residual `||H v - theta v||` drops below this.
    pub tol: f64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { max_iter: 40, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult<T = C64> {
    pub value: f64,
    pub vector: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x.conjugate() * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|z| z.abs2()).sum::<f64>().sqrt()
}

fn axpy<T: Scalar>(y: &mut [T], alpha: T, x: &[T]) {
    y.iter_mut().zip(x).for_each(|(yi, &xi)| *yi += alpha * xi);
}

fn scaled<T: Scalar>(v: &[T], f: f64) -> Vec<T> {
    v.iter().map(|z| z.scale_by(f)).collect()
}

/// Lowest eigenpair of the tridiagonal matrix with diagonal `alpha` and
/// off-diagonal `beta`.
fn tridiagonal_ground(alpha: &[f64], beta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = alpha.len();
    let t = DenseTensor::matrix_from_fn(k, k, |i, j| {
        let v = if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        };
        C64::new(v, 0.0)
    });
    let (vals, vecs) = eigh(&t)?;
    Ok((vals[0], (0..k).map(|i| vecs.at(i, 0).re).collect()))
}

/// Lanczos iteration with full reorthogonalization, started from `start`.
pub fn lowest_eigenpair<T: Scalar>(
    apply: impl Fn(&[T]) -> Vec<T>,
    start: &[T],
    cfg: &LanczosConfig,
) -> Result<LanczosResult<T>> {
    let dim = start.len();
    let n0 = norm(start);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidInput("Lanczos start vector must be nonzero and finite".into()));
    }
    let max_iter = cfg.max_iter.max(1).min(dim);
    let mut basis: Vec<Vec<T>> = vec![scaled(start, 1.0 / n0)];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut ritz = (0.0, vec![1.0]);
    let mut residual = f64::INFINITY;
    for j in 0..max_iter {
        let mut w = apply(&basis[j]);
        if w.len() != dim || w.iter().any(|z| !z.is_finite_value()) {
            return Err(Error::Numerical("operator produced an invalid vector".into()));
        }
        let a = dot(&basis[j], &w).real();
        alpha.push(a);
        // two passes of Gram-Schmidt against the whole Krylov basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(&mut w, T::ZERO - c, v);
            }
        }
        let b = norm(&w);
        ritz = tridiagonal_ground(&alpha, &beta)?;
        residual = b * ritz.1[j].abs();
        let scale = alpha.iter().map(|x| x.abs()).fold(1.0, f64::max);
        if residual < cfg.tol || b < 1e-14 * scale || j + 1 == max_iter {
            break;
        }
        beta.push(b);
        basis.push(scaled(&w, 1.0 / b));
    }
    let mut vector = vec![T::ZERO; dim];
    for (v, &y) in basis.iter().zip(&ritz.1) {
        axpy(&mut vector, T::from_real(y), v);
    }
    let vector = scaled(&vector, 1.0 / norm(&vector));
    Ok(LanczosResult { value: ritz.0, vector, iterations: alpha.len(), residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_lowest_eigenvalue_of_a_diagonal_operator() {
        let diag: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 3.0 + i as f64 * 0.01).collect();
        let apply = |v: &[C64]| v.iter().zip(&diag).map(|(z, d)| z * d).collect::<Vec<_>>();
        let start: Vec<C64> = (0..50).map(|i| C64::new(1.0, 0.1 * i as f64)).collect();
        let r = lowest_eigenpair(apply, &start, &LanczosConfig { max_iter: 50, tol: 1e-12 }).unwrap();
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((r.value - min).abs() < 1e-10);
        let hv = apply(&r.vector);
        let res: f64 = hv.iter().zip(&r.vector).map(|(a, b)| (a - b * r.value).norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-8);
    }

    #[test]
    fn exact_start_vector_stops_immediately() {
        let apply = |v: &[C64]| vec![v[0] * 2.0, v[1] * 5.0];
        let r = lowest_eigenpair(apply, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &LanczosConfig::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!((r.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn real_arithmetic_matches_complex() {
        let diag: Vec<f64> = (0..30).map(|i| (i as f64 * 1.3).cos()).collect();
        let start: Vec<f64> = (0..30).map(|i| 1.0 + 0.01 * i as f64).collect();
        let cfg = LanczosConfig { max_iter: 30, tol: 1e-12 };
        let r = lowest_eigenpair(|v: &[f64]| v.iter().zip(&diag).map(|(a, b)| a * b).collect(), &start, &cfg).unwrap();
        let zstart: Vec<C64> = start.iter().map(|&x| C64::new(x, 0.0)).collect();
        let z = lowest_eigenpair(|v: &[C64]| v.iter().zip(&diag).map(|(a, b)| a * b).collect(), &zstart, &cfg).unwrap();
        assert!((r.value - z.value).abs() < 1e-12);
    }

    #[test]
    fn zero_start_is_rejected() {
        let apply = |v: &[C64]| v.to_vec();
        assert!(lowest_eigenpair(apply, &[C64::new(0.0, 0.0)], &LanczosConfig::default()).is_err());
    }
}
