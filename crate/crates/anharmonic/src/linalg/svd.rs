use num_complex::Complex64 as C64;

use super::lu::Lu;
use super::matrix::{dot, normalize, vec_norm};
use super::tridiag::symmetric_tridiagonal_eig;
use super::{DenseMatrix, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallestSingular {
    pub sigma_min: f64,
    /// Lanczos residual of the top eigenpair of `(A^H A)^{-1}`, relative to its eigenvalue.
    pub relative_residual: f64,
    /// Set when `A` is exactly singular in the LU sense; `sigma_min` is then 0.
    pub singular: bool,
    pub steps: usize,
}

/// σ_min(A) through Lanczos on `(A^H A)^{-1} = A^{-1} A^{-H}` with full
/// reorthogonalization; one LU factorization, two triangular solves per step.
pub fn smallest_singular(a: &DenseMatrix) -> Result<SmallestSingular, LinalgError> {
    smallest_singular_tol(a, 1e-12)
}

pub fn smallest_singular_tol(a: &DenseMatrix, tol: f64) -> Result<SmallestSingular, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape("smallest_singular needs a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let lu = Lu::new(a)?;
    if lu.is_singular() {
        return Ok(SmallestSingular { sigma_min: 0.0, relative_residual: 0.0, singular: true, steps: 0 });
    }
    let max_steps = n.min(200);
    let apply = |x: &[C64]| -> Result<Vec<C64>, LinalgError> { lu.solve(&lu.solve_adjoint(x)?) };

    let mut q: Vec<Vec<C64>> = Vec::with_capacity(max_steps + 1);
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let t = i as f64 + 1.0;
            C64::new((t * 0.754_877_666).fract() + 0.5, (t * 0.569_840_291).fract() - 0.5)
        })
        .collect();
    normalize(&mut v);
    q.push(v);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    let mut resid = f64::INFINITY;
    let mut steps = 0;

    for k in 0..max_steps {
        steps = k + 1;
        let mut w = apply(&q[k])?;
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            // The inverse overflowed: numerically singular.
            return Ok(SmallestSingular { sigma_min: 0.0, relative_residual: 0.0, singular: true, steps });
        }
        let ak = dot(&w, &q[k]).re;
        alpha.push(ak);
        // Full reorthogonalization, applied twice.
        for _ in 0..2 {
            for qj in &q {
                let c = dot(&w, qj);
                for (wi, qi) in w.iter_mut().zip(qj) {
                    *wi -= c * qi;
                }
            }
        }
        let bk = vec_norm(&w);
        let (vals, vecs) = symmetric_tridiagonal_eig(&alpha, &beta, true);
        let m = alpha.len();
        let vecs = vecs.expect("vectors requested");
        theta = vals[m - 1];
        let last = vecs[(m - 1) * m + (m - 1)].abs();
        resid = bk * last / theta.abs().max(f64::MIN_POSITIVE);
        if resid <= tol || bk <= 1e-300 || k + 1 == n {
            break;
        }
        for wi in w.iter_mut() {
            *wi /= bk;
        }
        beta.push(bk);
        q.push(w);
    }
    Ok(SmallestSingular { sigma_min: 1.0 / theta.sqrt(), relative_residual: resid, singular: false, steps })
}
