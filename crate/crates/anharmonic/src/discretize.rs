//! Galerkin matrices in the dilated Hermite-function basis
//! `ψ_k(x/ℓ)/√ℓ`, `k = 0..N_b`.

use serde::{Deserialize, Serialize};

use crate::linalg::{eigenvalues, match_eigenvalues, symmetric_tridiagonal_eig, DenseMatrix, LinalgError};
use crate::model::{conjugation_weight, validate, ModelError, OscillatorSpec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assembly {
    /// Exact matrix polynomial in the ladder algebra; polynomial potentials only.
    Ladder,
    /// Gauss–Hermite Galerkin integrals for the potential.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub size: usize,
    /// Coordinate dilation ℓ; `None` picks [`choose_scaling`].
    #[serde(default)]
    pub scaling: Option<f64>,
    /// `None` picks `Ladder` for polynomial potentials and `Quadrature` otherwise.
    #[serde(default)]
    pub assembly: Option<Assembly>,
    /// Gauss–Hermite order; defaults to `2 N_b + 32`.
    #[serde(default)]
    pub quadrature_order: Option<usize>,
    /// Scalar added to the operator (`L + shift`).
    #[serde(default)]
    pub shift: f64,
}

impl BasisSpec {
    pub fn new(size: usize) -> Self {
        Self { size, scaling: None, assembly: None, quadrature_order: None, shift: 0.0 }
    }
    pub fn with_scaling(mut self, l: f64) -> Self {
        self.scaling = Some(l);
        self
    }
    pub fn with_assembly(mut self, a: Assembly) -> Self {
        self.assembly = Some(a);
        self
    }
    pub fn with_shift(mut self, s: f64) -> Self {
        self.shift = s;
        self
    }
    pub fn resolved_scaling(&self, spec: &OscillatorSpec) -> f64 {
        self.scaling.unwrap_or_else(|| choose_scaling(spec, self.size))
    }
    pub fn resolved_assembly(&self, spec: &OscillatorSpec) -> Assembly {
        self.assembly.unwrap_or(if spec.potential_poly().is_some() { Assembly::Ladder } else { Assembly::Quadrature })
    }
    pub fn resolved_quadrature_order(&self) -> usize {
        self.quadrature_order.unwrap_or(2 * self.size + 32)
    }
    /// Same settings at another size; an explicit ℓ is kept, an automatic one is re-chosen.
    pub fn resized(&self, size: usize) -> Self {
        Self { size, quadrature_order: None, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiscretizeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("ladder assembly needs a polynomial potential; {0} is not one")]
    LadderNeedsPolynomial(&'static str),
    #[error("quadrature order {order} is below 2 N_b = {needed}")]
    QuadratureOrder { order: usize, needed: usize },
    #[error("invalid basis: {0}")]
    Basis(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Degree of the dominant potential term.
fn leading_degree(spec: &OscillatorSpec) -> f64 {
    match spec {
        OscillatorSpec::PolynomialL { a, .. } => 2.0 * *a as f64,
        OscillatorSpec::EvenImaginary { b } | OscillatorSpec::Conjugated { b, .. } => *b,
        OscillatorSpec::OddImaginary { b } => 2.0 * *b as f64 + 1.0,
        OscillatorSpec::SelfAdjointPower { l } => *l,
    }
}

/// Dilation balancing the kinetic scale `N/ℓ²` against `(ℓ√N)^m` for a
/// degree-`m` potential: `ℓ = N^{(2−m)/(2(m+2))}`.
pub fn choose_scaling(spec: &OscillatorSpec, basis_size: usize) -> f64 {
    let m = leading_degree(spec);
    (basis_size as f64).powf((2.0 - m) / (2.0 * (m + 2.0)))
}

/// Real dense `n × n` buffer, row-major.
#[derive(Clone)]
struct Real {
    n: usize,
    a: Vec<f64>,
}

impl Real {
    fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

fn ladder(k: usize) -> f64 {
    ((k + 1) as f64 / 2.0).sqrt()
}

/// Position operator, `X[k,k+1] = X[k+1,k] = ℓ√((k+1)/2)`.
pub fn position_matrix(n: usize, l: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 || i == j + 1 {
            C64::new(l * ladder(i.min(j)), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `d/dx`, antisymmetric: `D[k,k+1] = √((k+1)/2)/ℓ`.
pub fn derivative_matrix(n: usize, l: f64) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        let v = if j == i + 1 {
            ladder(i) / l
        } else if i == j + 1 {
            -ladder(j) / l
        } else {
            0.0
        };
        C64::new(v, 0.0)
    })
}

/// `−d²/dx²` from the ladder algebra: diagonal `(2k+1)/2`, second
/// off-diagonals `−√((k+1)(k+2))/2`, all over `ℓ²`.
pub fn kinetic_matrix(n: usize, l: f64) -> DenseMatrix {
    let s = 1.0 / (l * l);
    DenseMatrix::from_fn(n, n, |i, j| {
        let v = if i == j {
            (2 * i + 1) as f64 / 2.0
        } else if j == i + 2 || i == j + 2 {
            let k = i.min(j) as f64;
            -((k + 1.0) * (k + 2.0)).sqrt() / 2.0
        } else {
            0.0
        };
        C64::new(v * s, 0.0)
    })
}

/// `Σ c_j X^j` with complex coefficients `re[j] + i im[j]`, evaluated on a
/// basis enlarged by the degree so the leading `n × n` block is exact.
fn polynomial_of_position(n: usize, l: f64, re: &[f64], im: &[f64]) -> (Real, Real) {
    let deg = re.len().max(im.len()).saturating_sub(1);
    let m = n + deg;
    let mut out_re = Real::zeros(n);
    let mut out_im = Real::zeros(n);
    let mut pow = Real::zeros(m);
    for i in 0..m {
        *pow.at_mut(i, i) = 1.0;
    }
    let xs: Vec<f64> = (0..m).map(|k| l * ladder(k)).collect();
    for j in 0..=deg {
        let (cr, ci) = (re.get(j).copied().unwrap_or(0.0), im.get(j).copied().unwrap_or(0.0));
        if cr != 0.0 || ci != 0.0 {
            for r in 0..n {
                for c in 0..n {
                    let p = pow.at(r, c);
                    *out_re.at_mut(r, c) += cr * p;
                    *out_im.at_mut(r, c) += ci * p;
                }
            }
        }
        if j < deg {
            // pow ← pow · X, using the tridiagonal structure of X.
            let mut next = Real::zeros(m);
            for r in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    if c > 0 {
                        s += pow.at(r, c - 1) * xs[c - 1];
                    }
                    if c + 1 < m {
                        s += pow.at(r, c + 1) * xs[c];
                    }
                    *next.at_mut(r, c) = s;
                }
            }
            pow = next;
        }
    }
    (out_re, out_im)
}

/// Gauss–Hermite nodes with weights already multiplied by `e^{t²}`
/// (so the rule integrates `ψ_j ψ_k f` as `Σ w̃_i ψ_j(t_i) ψ_k(t_i) f(t_i)`).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = vec![0.0; order];
    let off: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let (mut nodes, _) = symmetric_tridiagonal_eig(&diag, &off, false);
    // Newton polish on ψ_order, then w̃ = 1 / Σ_{k<order} ψ_k(t)².
    let weights = nodes
        .iter_mut()
        .map(|t| {
            for _ in 0..2 {
                let psi = hermite_functions(*t, order + 1);
                // ψ_n' = √(2n) ψ_{n−1} − t ψ_n
                let p = psi[order];
                let dp = (2.0 * order as f64).sqrt() * psi[order - 1] - *t * p;
                if dp != 0.0 && p.is_finite() {
                    let step = p / dp;
                    if step.abs() < 1e-6 * (1.0 + t.abs()) {
                        *t -= step;
                    }
                }
            }
            let psi = hermite_functions(*t, order);
            1.0 / psi.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    (nodes, weights)
}

/// Normalized Hermite functions `ψ_0..ψ_{n−1}` at `t`, with a running
/// log-scale so that large `|t|` neither overflows nor underflows early.
pub fn hermite_functions(t: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let base = -0.25 * std::f64::consts::PI.ln() - 0.5 * t * t;
    let mut log_scale = 0.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut raw = vec![(0.0, 0.0); n];
    raw[0] = (cur, log_scale);
    for k in 0..n - 1 {
        let next = (2.0 / (k + 1) as f64).sqrt() * t * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
        raw[k + 1] = (cur, log_scale);
    }
    for (o, (v, s)) in out.iter_mut().zip(raw) {
        *o = v * (s + base).exp();
    }
    out
}

/// Galerkin matrices `⟨ψ_j, f_q ψ_k⟩` for several real functions at once,
/// sampled at the dilated nodes `ℓ t_i`.
fn galerkin(n: usize, l: f64, order: usize, fs: &[&dyn Fn(f64) -> f64]) -> Vec<Real> {
    let (t, w) = gauss_hermite(order);
    let psi: Vec<Vec<f64>> = t.iter().map(|&ti| hermite_functions(ti, n)).collect();
    let mut out = vec![Real::zeros(n); fs.len()];
    for (q, f) in fs.iter().enumerate() {
        let fw: Vec<f64> = t.iter().zip(&w).map(|(&ti, &wi)| wi * f(l * ti)).collect();
        let m = &mut out[q];
        for j in 0..n {
            for k in j..n {
                let s: f64 = (0..order).map(|i| fw[i] * psi[i][j] * psi[i][k]).sum();
                *m.at_mut(j, k) = s;
                *m.at_mut(k, j) = s;
            }
        }
    }
    out
}

fn to_complex(re: &Real, im: Option<&Real>) -> DenseMatrix {
    DenseMatrix::from_fn(re.n, re.n, |i, j| C64::new(re.at(i, j), im.map_or(0.0, |m| m.at(i, j))))
}

/// Matrix of `L + shift` in the basis described by `basis`.
pub fn assemble(spec: &OscillatorSpec, basis: &BasisSpec) -> Result<DenseMatrix, DiscretizeError> {
    validate(spec)?;
    let n = basis.size;
    if n < 4 {
        return Err(DiscretizeError::Basis(format!("N_b = {n} is below 4")));
    }
    let l = basis.resolved_scaling(spec);
    if !(l > 0.0 && l.is_finite()) {
        return Err(DiscretizeError::Basis(format!("scaling must be positive, got {l}")));
    }
    if !basis.shift.is_finite() {
        return Err(DiscretizeError::Basis("shift must be finite".into()));
    }
    let kinetic = kinetic_matrix(n, l);
    let shift = C64::new(basis.shift, 0.0);
    match basis.resolved_assembly(spec) {
        Assembly::Ladder => {
            let (re, im) = spec.potential_poly().ok_or(DiscretizeError::LadderNeedsPolynomial(spec.family_name()))?;
            let (vr, vi) = polynomial_of_position(n, l, &re, &im);
            Ok(kinetic.add(&to_complex(&vr, Some(&vi))).shift(shift))
        }
        Assembly::Quadrature => {
            let order = basis.resolved_quadrature_order();
            if order < 2 * n {
                return Err(DiscretizeError::QuadratureOrder { order, needed: 2 * n });
            }
            let m = match spec {
                OscillatorSpec::Conjugated { b, s } => conjugated(n, l, order, *b, *s),
                _ => {
                    let s = spec.clone();
                    let re = |x: f64| crate::model::potential_eval(&s, C64::new(x, 0.0)).map_or(f64::NAN, |v| v.re);
                    let im = |x: f64| crate::model::potential_eval(&s, C64::new(x, 0.0)).map_or(f64::NAN, |v| v.im);
                    let g = galerkin(n, l, order, &[&re, &im]);
                    to_complex(&g[0], Some(&g[1]))
                }
            };
            Ok(kinetic.add(&m).shift(shift))
        }
    }
}

/// `(−iD + iv')² + |x|^b − (−D²) = 2v'D + v'' − v'² + |x|^b`; the `v'D`
/// product is formed one size up so its leading block is exact.
fn conjugated(n: usize, l: f64, order: usize, b: f64, s: f64) -> DenseMatrix {
    let vp = |x: f64| conjugation_weight(b, s, x).1;
    let rest = |x: f64| {
        let (_, v1, v2) = conjugation_weight(b, s, x);
        v2 - v1 * v1 + x.abs().powf(b)
    };
    let g = galerkin(n + 1, l, order.max(2 * n + 2), &[&vp, &rest]);
    let d = derivative_matrix(n + 1, l);
    let vd = to_complex(&g[0], None).matmul(&d);
    DenseMatrix::from_fn(n, n, |i, j| vd[(i, j)] * 2.0 + C64::new(g[1].at(i, j), 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub lambda: C64,
    pub lambda_doubled: C64,
    pub relative_gap: f64,
    pub trusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub size: usize,
    pub doubled_size: usize,
    pub entries: Vec<ConvergenceEntry>,
}

impl ConvergenceReport {
    pub fn trusted_count(&self) -> usize {
        self.entries.iter().filter(|e| e.trusted).count()
    }
    /// Length of the leading run of trusted eigenvalues.
    pub fn trusted_prefix(&self) -> usize {
        self.entries.iter().take_while(|e| e.trusted).count()
    }
}

pub const TRUST_TOLERANCE: f64 = 1e-8;

/// Sorts by modulus, ties by argument.
pub fn sort_by_modulus(v: &mut [C64]) {
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
}

/// Compares the `m` smallest-modulus eigenvalues at `N_b` and `2 N_b`.
pub fn convergence_check(spec: &OscillatorSpec, basis: &BasisSpec, m: usize) -> Result<ConvergenceReport, DiscretizeError> {
    if 4 * m > basis.size {
        return Err(DiscretizeError::Basis(format!("m = {m} exceeds N_b/4 = {}", basis.size / 4)));
    }
    let doubled = basis.resized(2 * basis.size);
    let (a, b) = rayon::join(|| assemble(spec, basis), || assemble(spec, &doubled));
    let (mut ea, mut eb) = (eigenvalues(&a?)?, eigenvalues(&b?)?);
    sort_by_modulus(&mut ea);
    sort_by_modulus(&mut eb);
    ea.truncate(m);
    let pairs = match_eigenvalues(&ea, &eb);
    let entries = ea
        .iter()
        .zip(pairs)
        .map(|(&lam, (j, dist))| {
            let gap = dist / (1.0 + lam.norm());
            ConvergenceEntry { lambda: lam, lambda_doubled: eb[j], relative_gap: gap, trusted: gap <= TRUST_TOLERANCE }
        })
        .collect();
    Ok(ConvergenceReport { size: basis.size, doubled_size: doubled.size, entries })
}
