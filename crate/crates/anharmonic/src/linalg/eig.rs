//! Nonsymmetric complex eigensolver: balancing, Householder reduction to
//! Hessenberg form, single-shift complex QR to Schur form, then right and left
//! eigenvectors from the same Schur factor.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::matrix::{normalize, vec_norm};
use super::{DenseMatrix, LinalgError};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    /// Unit right eigenvectors, one per column.
    pub right_vectors: DenseMatrix,
    /// Unit left eigenvectors (`A^H w = conj(λ) w`), one per column.
    pub left_vectors: DenseMatrix,
    /// max(‖Av − λv‖, ‖A^H w − conj(λ) w‖) / ‖A‖_F per pair.
    pub backward_residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Relative subdiagonal size below which the Hessenberg matrix deflates.
    pub deflation_tol: f64,
    pub balance: bool,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { deflation_tol: f64::EPSILON, balance: true }
    }
}

/// Full eigendecomposition with default options except the deflation tolerance.
pub fn eig(a: &DenseMatrix, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    eig_with(a, EigOptions { deflation_tol: tol.max(f64::EPSILON), ..Default::default() })
}

pub fn eig_with(a: &DenseMatrix, opts: EigOptions) -> Result<EigenDecomposition, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape("eig needs a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let anorm = a.norm_fro();
    if n == 0 {
        return Err(LinalgError::Shape("empty matrix".into()));
    }

    let (mut h, scale) = if opts.balance { balance(a) } else { (a.clone(), vec![1.0; n]) };
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z, opts.deflation_tol)?;

    let values: Vec<C64> = (0..n).map(|k| h[(k, k)]).collect();
    let tnorm = h.norm_fro();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE * n as f64);

    let pairs: Vec<(Vec<C64>, Vec<C64>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = schur_right_vector(&h, k, smin);
            let y = schur_left_vector(&h, k, smin);
            let mut v = apply_partial(&z, &x, 0, k + 1);
            let mut w = apply_partial(&z, &y, k, n);
            for i in 0..n {
                v[i] *= scale[i];
                w[i] /= scale[i];
            }
            normalize(&mut v);
            normalize(&mut w);
            (v, w)
        })
        .collect();

    let mut right = DenseMatrix::zeros(n, n);
    let mut left = DenseMatrix::zeros(n, n);
    for (k, (v, w)) in pairs.iter().enumerate() {
        for i in 0..n {
            right[(i, k)] = v[i];
            left[(i, k)] = w[i];
        }
    }

    let denom = if anorm > 0.0 { anorm } else { 1.0 };
    let backward_residuals = (0..n)
        .into_par_iter()
        .map(|k| {
            let (v, w) = &pairs[k];
            let lam = values[k];
            let av = a.matvec(v);
            let rv: Vec<C64> = av.iter().zip(v).map(|(p, q)| p - lam * q).collect();
            let aw = a.adjoint_matvec(w);
            let rw: Vec<C64> = aw.iter().zip(w).map(|(p, q)| p - lam.conj() * q).collect();
            vec_norm(&rv).max(vec_norm(&rw)) / denom
        })
        .collect();

    Ok(EigenDecomposition { values, right_vectors: right, left_vectors: left, backward_residuals })
}

/// Eigenvalues only (Schur diagonal), skipping the vector work.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<C64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape("eig needs a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let (mut h, _) = balance(a);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z, f64::EPSILON)?;
    Ok((0..a.rows()).map(|k| h[(k, k)]).collect())
}

/// Diagonal scaling `D^{-1} A D` by powers of two; returns the scaled matrix and `diag(D)`.
fn balance(a: &DenseMatrix) -> (DenseMatrix, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut m = a.clone();
    let mut d = vec![1.0; n];
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    (m, d)
}

/// Reduces `h` to upper Hessenberg form in place and returns the unitary `Q`
/// with `A = Q H Q^H`.
fn hessenberg(h: &mut DenseMatrix) -> DenseMatrix {
    let n = h.rows();
    let mut q = DenseMatrix::identity(n);
    if n < 3 {
        return q;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for i in 0..n {
            v[i] = ZERO;
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vn = vec_norm(&v[k + 1..]);
        for vi in v[k + 1..].iter_mut() {
            *vi /= vn;
        }
        // Left: H <- (I - 2 v v^H) H on rows k+1.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * h[(i, j)];
            }
            let s2 = s * 2.0;
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s2;
            }
        }
        // Right: H <- H (I - 2 v v^H) on all rows, columns k+1..
        for i in 0..n {
            let row_mul = |m: &DenseMatrix| {
                let mut s = ZERO;
                for j in k + 1..n {
                    s += m[(i, j)] * v[j];
                }
                s * 2.0
            };
            let s2 = row_mul(h);
            for j in k + 1..n {
                h[(i, j)] -= s2 * v[j].conj();
            }
            let t2 = row_mul(&q);
            for j in k + 1..n {
                q[(i, j)] -= t2 * v[j].conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    q
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
#[inline]
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Single-shift implicit QR on an upper Hessenberg `h`, accumulating into `z`.
fn schur(h: &mut DenseMatrix, z: &mut DenseMatrix, tol: f64) -> Result<(), LinalgError> {
    let n = h.rows();
    if n == 1 {
        return Ok(());
    }
    let smlnum = f64::MIN_POSITIVE * (n as f64 / f64::EPSILON);
    let cap = 30 * n.max(10);
    let mut total = 0usize;
    let mut ihi = n - 1;
    let mut its = 0usize;
    while ihi > 0 {
        // Locate the active unreduced block [l, ihi].
        let mut l = 0;
        for k in (1..=ihi).rev() {
            let sub = h[(k, k - 1)].l1_norm();
            let mut scale = h[(k - 1, k - 1)].l1_norm() + h[(k, k)].l1_norm();
            if scale == 0.0 {
                scale = (k.saturating_sub(2)..=ihi.min(k + 1))
                    .map(|j| h[(j, k - 1)].l1_norm())
                    .sum();
            }
            if sub <= smlnum || sub <= tol * scale {
                h[(k, k - 1)] = ZERO;
                l = k;
                break;
            }
        }
        if l == ihi {
            ihi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > cap {
            return Err(LinalgError::NoConvergence { sweeps: total, unconverged: ihi + 1 });
        }
        let mu = if its % 10 == 0 {
            h[(ihi, ihi)] + 0.75 * h[(ihi, ihi - 1)].re.abs()
        } else if its % 10 == 5 {
            h[(l, l)] + 0.75 * h[(l + 1, l)].re.abs()
        } else {
            wilkinson_shift(
                h[(ihi - 1, ihi - 1)],
                h[(ihi - 1, ihi)],
                h[(ihi, ihi - 1)],
                h[(ihi, ihi)],
            )
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..ihi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let jstart = if k > l { k - 1 } else { l };
            for j in jstart..n {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = p * c + s * q;
                h[(k + 1, j)] = -s.conj() * p + q * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            let iend = (k + 2).min(ihi);
            for i in 0..=iend {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + q * s.conj();
                h[(i, k + 1)] = -p * s + q * c;
            }
            for i in 0..n {
                let p = z[(i, k)];
                let q = z[(i, k + 1)];
                z[(i, k)] = p * c + q * s.conj();
                z[(i, k + 1)] = -p * s + q * c;
            }
        }
    }
    Ok(())
}

/// Solves `(T - t_kk) x = 0` with `x_k = 1`, `x_j = 0` for `j > k`.
fn schur_right_vector(t: &DenseMatrix, k: usize, smin: f64) -> Vec<C64> {
    let lam = t[(k, k)];
    let mut x = vec![ZERO; k + 1];
    x[k] = ONE;
    for j in (0..k).rev() {
        let mut s = ZERO;
        for m in j + 1..=k {
            s += t[(j, m)] * x[m];
        }
        let mut d = t[(j, j)] - lam;
        if d.norm() < smin {
            d = C64::new(smin, 0.0);
        }
        x[j] = -s / d;
        let big = x[j].norm();
        if big > 1e100 {
            for v in x.iter_mut() {
                *v /= big;
            }
        }
    }
    x
}

/// Solves `y^H (T - t_kk) = 0` with `y_k = 1`, `y_j = 0` for `j < k`.
/// Returned vector holds entries `k..n`.
fn schur_left_vector(t: &DenseMatrix, k: usize, smin: f64) -> Vec<C64> {
    let n = t.rows();
    let lam = t[(k, k)];
    let mut y = vec![ZERO; n - k];
    y[0] = ONE;
    for j in k + 1..n {
        let mut s = ZERO;
        for m in k..j {
            s += t[(m, j)].conj() * y[m - k];
        }
        let mut d = (t[(j, j)] - lam).conj();
        if d.norm() < smin {
            d = C64::new(smin, 0.0);
        }
        y[j - k] = -s / d;
        let big = y[j - k].norm();
        if big > 1e100 {
            for v in y.iter_mut() {
                *v /= big;
            }
        }
    }
    y
}

/// `Z[:, lo..hi] * x`.
fn apply_partial(z: &DenseMatrix, x: &[C64], lo: usize, hi: usize) -> Vec<C64> {
    let n = z.rows();
    (0..n)
        .map(|i| {
            let row = &z.row(i)[lo..hi];
            row.iter().zip(x).map(|(a, b)| a * b).sum()
        })
        .collect()
}
