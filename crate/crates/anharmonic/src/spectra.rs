//! Ordered biorthogonal spectra, projection norms, resolvent norms and
//! pseudospectra, growth fits, and matrix-level checks of the resolvent
//! partial-fraction identities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{assemble, sort_by_modulus, BasisSpec, DiscretizeError};
use crate::gauge::{eval_f, f_prime_at_zero, zero, GaugeError, GaugeSpec, Terms};
use crate::linalg::{compensated_dot, eig, eigenvalues, match_eigenvalues, smallest_singular, DenseMatrix, LinalgError, Lu};
use crate::model::OscillatorSpec;
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error("mode {0} is not trusted")]
    Untrusted(usize),
    #[error("{0}")]
    Precondition(String),
    #[error("pole collision: {0}")]
    PoleCollision(String),
    #[error("matrix is numerically non-diagonalizable (overlap {overlap:.3e} at eigenvalue {lambda})")]
    NotDiagonalizable { lambda: C64, overlap: f64 },
    #[error("not enough data for a fit: {0}")]
    Fit(String),
}

/// One eigenpair with its biorthogonal data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    /// 1-based position in modulus order.
    pub n: usize,
    pub lambda: C64,
    #[serde(skip)]
    pub right: Vec<C64>,
    #[serde(skip)]
    pub left: Vec<C64>,
    /// `s_n = ⟨f_n, g_n⟩` of the unit right and left vectors.
    pub overlap: C64,
    pub overlap_error: f64,
    /// `‖P_n‖ = 1/|s_n|`.
    pub projection_norm: f64,
    pub backward_residual: f64,
    /// Eigenvalue change under basis doubling, relative to `1 + |λ|`.
    pub convergence_gap: Option<f64>,
    pub clustered: bool,
    pub precision_limited: bool,
    pub trusted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub modes: Vec<Mode>,
    pub dimension: usize,
    /// Frobenius norm of the discretized operator.
    pub matrix_norm: f64,
    /// Untrusted modes preceding the last trusted one; the leading block left out of the analyses.
    pub excluded: Vec<usize>,
    /// Every eigenvalue of the matrix, modulus order.
    pub all_eigenvalues: Vec<C64>,
}

impl Spectrum {
    pub fn trusted(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(|m| m.trusted)
    }
    pub fn mode(&self, n: usize) -> Option<&Mode> {
        self.modes.get(n.checked_sub(1)?)
    }
}

/// When an eigenvalue counts as resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustPolicy {
    /// Doubling gap accepted outright, relative to `1 + |λ|`.
    pub gap_tolerance: f64,
    /// Also accept a doubling gap below the first-order rounding floor
    /// `‖P_n‖·u·‖A‖_F`, provided that floor is below `separation_fraction`
    /// times the distance to the nearest other eigenvalue.
    pub conditioning_floor: bool,
    pub separation_fraction: f64,
    /// `|λ_i − λ_j| < cluster_tolerance·(1 + |λ_i|)` marks both as clustered.
    pub cluster_tolerance: f64,
}

impl Default for TrustPolicy {
    fn default() -> Self {
        Self { gap_tolerance: 1e-8, conditioning_floor: true, separation_fraction: 0.1, cluster_tolerance: 1e-6 }
    }
}

/// Overlap magnitude under which `1/|s|` is limited by double precision.
pub fn precision_threshold(dimension: usize) -> f64 {
    1e3 * dimension as f64 * f64::EPSILON
}

fn build_modes(a: &DenseMatrix, m: usize) -> Result<(Vec<Mode>, Vec<C64>), SpectraError> {
    let e = eig(a, 0.0)?;
    let dim = a.rows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        let (x, y) = (e.values[i], e.values[j]);
        x.norm().total_cmp(&y.norm()).then(x.arg().total_cmp(&y.arg()))
    });
    let all: Vec<C64> = order.iter().map(|&i| e.values[i]).collect();
    let limit = precision_threshold(dim);
    let modes = order
        .iter()
        .take(m)
        .enumerate()
        .map(|(k, &i)| {
            let right = e.right_vectors.col(i);
            let left = e.left_vectors.col(i);
            let d = compensated_dot(&right, &left);
            let s = d.value.norm();
            Mode {
                n: k + 1,
                lambda: e.values[i],
                overlap: d.value,
                overlap_error: d.error_bound,
                projection_norm: 1.0 / s,
                backward_residual: e.backward_residuals[i],
                convergence_gap: None,
                clustered: false,
                precision_limited: s < limit,
                trusted: false,
                right,
                left,
            }
        })
        .collect();
    Ok((modes, all))
}

fn mark_clusters(modes: &mut [Mode], all: &[C64], tol: f64) {
    for m in modes.iter_mut() {
        let lam = m.lambda;
        let close = all.iter().filter(|&&z| (z - lam).norm() < tol * (1.0 + lam.norm())).count();
        m.clustered = close > 1;
    }
}

fn separation(all: &[C64], lam: C64) -> f64 {
    all.iter()
        .map(|&z| (z - lam).norm())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

fn finish(modes: Vec<Mode>, all: Vec<C64>, dim: usize, norm: f64) -> Spectrum {
    let last = modes.iter().rposition(|m| m.trusted);
    let excluded = match last {
        Some(l) => modes[..l].iter().filter(|m| !m.trusted).map(|m| m.n).collect(),
        None => Vec::new(),
    };
    Spectrum { modes, dimension: dim, matrix_norm: norm, excluded, all_eigenvalues: all }
}

/// Spectrum of an operator family; trust comes from a basis-doubling run.
pub fn compute_spectrum(spec: &OscillatorSpec, basis: &BasisSpec, m: usize) -> Result<Spectrum, SpectraError> {
    compute_spectrum_with(spec, basis, m, &TrustPolicy::default())
}

pub fn compute_spectrum_with(
    spec: &OscillatorSpec,
    basis: &BasisSpec,
    m: usize,
    policy: &TrustPolicy,
) -> Result<Spectrum, SpectraError> {
    if m == 0 || m > basis.size {
        return Err(SpectraError::Precondition(format!("mode count {m} must lie in 1..={}", basis.size)));
    }
    let doubled = basis.resized(2 * basis.size);
    let a = assemble(spec, basis)?;
    let (built, big) = rayon::join(
        || build_modes(&a, m),
        || -> Result<Vec<C64>, SpectraError> {
            let mut v = eigenvalues(&assemble(spec, &doubled)?)?;
            sort_by_modulus(&mut v);
            Ok(v)
        },
    );
    let (mut modes, all) = built?;
    let big = big?;
    let norm = a.norm_fro();
    let lams: Vec<C64> = modes.iter().map(|m| m.lambda).collect();
    let pairs = match_eigenvalues(&lams, &big);
    mark_clusters(&mut modes, &all, policy.cluster_tolerance);
    for (mode, (_, dist)) in modes.iter_mut().zip(pairs) {
        let scale = 1.0 + mode.lambda.norm();
        let gap = dist / scale;
        mode.convergence_gap = Some(gap);
        let floor = mode.projection_norm * f64::EPSILON * norm;
        let by_floor = policy.conditioning_floor
            && dist <= floor
            && floor <= policy.separation_fraction * separation(&all, mode.lambda);
        mode.trusted = !mode.clustered && mode.projection_norm.is_finite() && (gap <= policy.gap_tolerance || by_floor);
    }
    Ok(finish(modes, all, a.rows(), norm))
}

/// Spectrum of an explicit matrix. Without a discretization to refine, a mode
/// is trusted when its backward residual is small and it is not clustered.
pub fn spectrum_of_matrix(a: &DenseMatrix, m: Option<usize>) -> Result<Spectrum, SpectraError> {
    let m = m.unwrap_or(a.rows()).min(a.rows());
    let (mut modes, all) = build_modes(a, m)?;
    mark_clusters(&mut modes, &all, TrustPolicy::default().cluster_tolerance);
    for mode in modes.iter_mut() {
        mode.trusted = !mode.clustered && mode.backward_residual <= 1e-10 && mode.projection_norm.is_finite();
    }
    Ok(finish(modes, all, a.rows(), a.norm_fro()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionEntry {
    pub n: usize,
    pub lambda: C64,
    pub overlap_abs: f64,
    pub norm: f64,
    pub precision_limited: bool,
}

/// `(n, ‖P_n‖)` over trusted modes.
pub fn projection_norms(s: &Spectrum) -> Vec<ProjectionEntry> {
    s.trusted()
        .map(|m| ProjectionEntry {
            n: m.n,
            lambda: m.lambda,
            overlap_abs: m.overlap.norm(),
            norm: m.projection_norm,
            precision_limited: m.precision_limited,
        })
        .collect()
}

pub fn projection_norm(s: &Spectrum, n: usize) -> Result<f64, SpectraError> {
    match s.mode(n) {
        Some(m) if m.trusted => Ok(m.projection_norm),
        _ => Err(SpectraError::Untrusted(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventSample {
    pub z: C64,
    /// `‖(z − A)^{-1}‖ = 1/σ_min(z − A)`; infinite on the spectrum.
    pub norm: f64,
    /// Distance from `z` to the nearest eigenvalue of the matrix.
    pub dist_to_spectrum: f64,
    /// Relative Lanczos residual behind `norm`.
    pub certificate: f64,
}

/// A discretized operator prepared for repeated resolvent sampling.
#[derive(Debug, Clone)]
pub struct ResolventOperator {
    pub matrix: DenseMatrix,
    pub eigenvalues: Vec<C64>,
}

impl ResolventOperator {
    pub fn new(matrix: DenseMatrix) -> Result<Self, SpectraError> {
        let mut ev = eigenvalues(&matrix)?;
        sort_by_modulus(&mut ev);
        Ok(Self { matrix, eigenvalues: ev })
    }

    pub fn from_spec(spec: &OscillatorSpec, basis: &BasisSpec) -> Result<Self, SpectraError> {
        Self::new(assemble(spec, basis)?)
    }

    pub fn sample(&self, z: C64) -> Result<ResolventSample, SpectraError> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(SpectraError::Precondition("z must be finite".into()));
        }
        let dist = self.eigenvalues.iter().map(|&l| (l - z).norm()).fold(f64::INFINITY, f64::min);
        let shifted = self.matrix.scale(C64::new(-1.0, 0.0)).shift(z);
        let s = smallest_singular(&shifted)?;
        let norm = if s.singular || s.sigma_min == 0.0 { f64::INFINITY } else { 1.0 / s.sigma_min };
        Ok(ResolventSample { z, norm, dist_to_spectrum: dist, certificate: s.relative_residual })
    }
}

pub fn resolvent_norm(spec: &OscillatorSpec, basis: &BasisSpec, z: C64) -> Result<ResolventSample, SpectraError> {
    ResolventOperator::from_spec(spec, basis)?.sample(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudospectrumGrid {
    pub nx: usize,
    pub ny: usize,
    /// Row-major: `samples[j * nx + i]` has `Im z` index `j` and `Re z` index `i`.
    pub samples: Vec<ResolventSample>,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Resolvent norms on a rectangle. A zero-width side collapses that axis to one point.
pub fn pseudospectra_grid(op: &ResolventOperator, rect: Rect, nx: usize, ny: usize) -> Result<PseudospectrumGrid, SpectraError> {
    if nx < 2 || ny < 2 {
        return Err(SpectraError::Precondition(format!("grid needs nx, ny >= 2, got {nx} x {ny}")));
    }
    if !(rect.re_min <= rect.re_max && rect.im_min <= rect.im_max) {
        return Err(SpectraError::Precondition("rectangle bounds are inverted".into()));
    }
    let xs = axis(rect.re_min, rect.re_max, nx);
    let ys = axis(rect.im_min, rect.im_max, ny);
    let points: Vec<C64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| C64::new(x, y))).collect();
    let samples = points.par_iter().map(|&z| op.sample(z)).collect::<Result<Vec<_>, _>>()?;
    Ok(PseudospectrumGrid { nx: xs.len(), ny: ys.len(), samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    /// Spectral norm of LHS − RHS.
    pub residual: f64,
    pub lhs_norm: f64,
    pub terms_used: usize,
}

fn norm2(a: &DenseMatrix) -> f64 {
    a.norm2()
}

fn resolvent_at(a: &DenseMatrix, z: C64, what: &str) -> Result<DenseMatrix, SpectraError> {
    let m = a.scale(C64::new(-1.0, 0.0)).shift(z);
    let lu = Lu::new(&m)?;
    if lu.is_singular() {
        return Err(SpectraError::PoleCollision(format!("{what} = {z} is an eigenvalue")));
    }
    Ok(lu.inverse()?)
}

fn check_off_spectrum(values: &[C64], p: C64, what: &str, scale: f64) -> Result<(), SpectraError> {
    for &l in values {
        if (l - p).norm() <= 1e-12 * scale.max(1.0) {
            return Err(SpectraError::PoleCollision(format!("{what} = {p} coincides with eigenvalue {l}")));
        }
    }
    Ok(())
}

/// `B_z` from the eigendecomposition, `Σ_j P_j/((z−λ_j)F(λ_j))`, against
/// `(1/F(z))(z−A)^{-1} + Σ_n (a_n + A)^{-1}/((z+a_n)F'(−a_n))`; ρ < 1/2.
pub fn bz_identity_check(a: &DenseMatrix, g: &GaugeSpec, z: C64, terms: Terms) -> Result<IdentityReport, SpectraError> {
    g.validate()?;
    if g.rho >= 0.5 {
        return Err(SpectraError::Precondition(format!("the operator expansion needs rho < 1/2, got {}", g.rho)));
    }
    let n = a.rows();
    let e = eig(a, 0.0)?;
    let scale = a.norm_fro();
    for &l in &e.values {
        if l.re <= 0.0 {
            return Err(SpectraError::Precondition(format!("eigenvalue {l} is not in the open right half-plane")));
        }
    }
    check_off_spectrum(&e.values, z, "z", scale)?;
    eval_f(g, z)?;

    // Left side: Σ_j f_j g_j^H / (s_j (z − λ_j) F(λ_j)), s_j = g_j^H f_j.
    let mut lhs = DenseMatrix::zeros(n, n);
    let mut data = lhs.as_slice().to_vec();
    for j in 0..n {
        let f = e.right_vectors.col(j);
        let gv = e.left_vectors.col(j);
        let s = compensated_dot(&f, &gv).value;
        if s.norm() < 1e-10 {
            return Err(SpectraError::NotDiagonalizable { lambda: e.values[j], overlap: s.norm() });
        }
        let coef = eval_f(g, e.values[j])?.recip() / ((z - e.values[j]) * s);
        for r in 0..n {
            for c in 0..n {
                data[r * n + c] += coef * f[r] * gv[c].conj();
            }
        }
    }
    lhs = DenseMatrix::from_row_major(n, n, data)?;

    let mut rhs = resolvent_at(a, z, "z")?.scale(eval_f(g, z)?.recip());
    let count = match terms {
        Terms::Fixed(t) => t,
        Terms::Adaptive => {
            // Term n is bounded by |c_n| ‖(a_n + A)^{-1}‖ / |z + a_n|; stop after three negligible terms.
            let lhs_norm = norm2(&lhs).max(1e-300);
            let mut k = 1;
            let mut small = 0;
            while small < 3 {
                if k > g.max_terms {
                    return Err(SpectraError::Gauge(GaugeError::Truncation { terms: g.max_terms, achieved: f64::NAN }));
                }
                let an = zero(g, k);
                let dist = e.values.iter().map(|&l| (l + an).norm()).fold(f64::INFINITY, f64::min);
                let bound = f_prime_at_zero(g, k)?.recip().abs() / ((z + an).norm() * dist);
                small = if bound <= 1e-17 * lhs_norm { small + 1 } else { 0 };
                k += 1;
            }
            k - 1
        }
    };
    for k in 1..=count {
        let an = zero(g, k);
        if (z + an).norm() == 0.0 {
            return Err(SpectraError::PoleCollision(format!("z = {z} sits on the gauge zero -a_{k}")));
        }
        let c = f_prime_at_zero(g, k)?.recip();
        let inv = resolvent_at(a, C64::new(-an, 0.0), "-a_n")?.scale(C64::new(-1.0, 0.0));
        rhs = rhs.add(&inv.scale(c / (z + an)));
    }
    let residual = norm2(&lhs.sub(&rhs));
    Ok(IdentityReport { residual, lhs_norm: norm2(&lhs), terms_used: count })
}

/// Finite identity `(z−A)^{-1} Π_{k≤m} (k+A)^{-1} = (z−A)^{-1}/Φ(z) + Σ_k c_k (k+A)^{-1}/(z+k)`
/// with `Φ(w) = Π (w+k)` and `c_k = 1/Φ'(−k)`.
pub fn davies_identity_check(a: &DenseMatrix, z: C64, m: usize) -> Result<IdentityReport, SpectraError> {
    if m == 0 {
        return Err(SpectraError::Precondition("m must be positive".into()));
    }
    if !a.is_square() {
        return Err(SpectraError::Precondition("matrix must be square".into()));
    }
    for k in 1..=m {
        if z == C64::new(-(k as f64), 0.0) {
            return Err(SpectraError::PoleCollision(format!("z = {z} equals -{k}")));
        }
    }
    let rz = resolvent_at(a, z, "z")?;
    let mut lhs = rz.clone();
    let mut ks = Vec::with_capacity(m);
    for k in 1..=m {
        // (k + A)^{-1} = −(−k − A)^{-1}
        let inv = resolvent_at(a, C64::new(-(k as f64), 0.0), "-k")?.scale(C64::new(-1.0, 0.0));
        lhs = lhs.matmul(&inv);
        ks.push(inv);
    }
    let phi_z: C64 = (1..=m).map(|k| z + k as f64).product();
    let mut rhs = rz.scale(phi_z.inv());
    for (k, inv) in (1..=m).zip(&ks) {
        let dphi: f64 = (1..=m).filter(|&j| j != k).map(|j| (j as f64) - (k as f64)).product();
        rhs = rhs.add(&inv.scale(C64::new(1.0 / dphi, 0.0) / (z + k as f64)));
    }
    Ok(IdentityReport { residual: norm2(&lhs.sub(&rhs)), lhs_norm: norm2(&lhs), terms_used: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub gamma_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> Result<GrowthFit, SpectraError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(SpectraError::Fit("degenerate design: all abscissae equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(GrowthFit { gamma_hat: slope, intercept, r_squared: r2 })
}

/// Least squares of `log value` against `n^σ`.
pub fn fit_growth(norms: &[(f64, f64)], sigma: f64) -> Result<GrowthFit, SpectraError> {
    if norms.len() < 5 {
        return Err(SpectraError::Fit(format!("{} points, need at least 5", norms.len())));
    }
    if norms.iter().any(|&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(SpectraError::Fit("values must be positive and finite".into()));
    }
    let x: Vec<f64> = norms.iter().map(|&(n, _)| n.powf(sigma)).collect();
    let y: Vec<f64> = norms.iter().map(|&(_, v)| v.ln()).collect();
    least_squares(&x, &y)
}

/// σ-free mode: regresses `log log value` on `log n`; `gamma_hat` is then the order σ.
pub fn fit_growth_order(norms: &[(f64, f64)]) -> Result<GrowthFit, SpectraError> {
    if norms.len() < 5 {
        return Err(SpectraError::Fit(format!("{} points, need at least 5", norms.len())));
    }
    if norms.iter().any(|&(n, v)| !(v > 1.0 && v.is_finite() && n > 0.0)) {
        return Err(SpectraError::Fit("order fits need values > 1 and n > 0".into()));
    }
    let x: Vec<f64> = norms.iter().map(|&(n, _)| n.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|&(_, v)| v.ln().ln()).collect();
    least_squares(&x, &y)
}

/// Largest `|arg λ_n − π/(b+2)|` over trusted modes with `n ≤ max_n`.
pub fn ray_angle_check(s: &Spectrum, b: f64, max_n: usize) -> Result<f64, SpectraError> {
    let theta = std::f64::consts::PI / (b + 2.0);
    let devs: Vec<f64> = s.trusted().filter(|m| m.n <= max_n).map(|m| (m.lambda.arg() - theta).abs()).collect();
    if devs.is_empty() {
        return Err(SpectraError::Precondition("no trusted modes to check".into()));
    }
    Ok(devs.into_iter().fold(0.0, f64::max))
}
