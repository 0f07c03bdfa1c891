//! WKB quasimodes `u = χ e^{iφ} Σ_{j≤N} a_j` for `-d² + x^{2a} + V₁` near the
//! turning point `y_β`, their residual quality `q = ‖(λ−L)u‖/‖u‖`, and the
//! resolvent lower bound `1/q` checked against the discretized operator.

mod cheb;
mod cutoff;

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{hermite_functions, BasisSpec};
use crate::model::{admissible_region, constants, turning_points, validate, ModelError, OscillatorSpec, Poly};
use crate::spectra::{least_squares, ResolventOperator, SpectraError};
use crate::C64;
use cheb::{composite_rule, lobatto, Cheb};
use cutoff::Plateau;

/// Documented replacement for the asymptotic `δ = (1 − ζ)/32`, which makes the
/// support vanishingly small at moderate `Re λ`.
pub const RECOMMENDED_DELTA: f64 = 0.3;

/// Projection defect above which a certificate is withheld.
pub const MAX_PROJECTION_DEFECT: f64 = 0.1;

const PANEL: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PseudomodeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("λ is not admissible: {0}")]
    Inadmissible(String),
    #[error("support reaches past the turning point: min(α − |V|) = {margin:.4e} ≤ 0")]
    Support { margin: f64 },
    #[error("λ − V crosses the negative real axis near x = {x}")]
    Branch { x: f64 },
    #[error("‖u‖ underflows")]
    Underflow,
    #[error("fit failed: {0}")]
    Fit(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PseudomodeParams {
    pub epsilon: f64,
    /// Replaces `δ = (1 − ζ)/32`.
    pub delta_override: Option<f64>,
    /// Fixed number of correction terms; adaptive when absent.
    pub n_terms: Option<usize>,
    pub cheb_order: usize,
    pub quad_order: usize,
    /// Lower-envelope offset for even `b`; defaults to `ω₀/2`.
    pub omega: Option<f64>,
    pub allow_inadmissible: bool,
    /// Accept supports on which `α − |V|` changes sign, provided `λ − V`
    /// stays off the branch cut.
    pub allow_beyond_turning_point: bool,
    /// Relative slack in `1/q ≤ ‖(λ−L)^{-1}‖ (1 + slack)`.
    pub slack: f64,
    pub samples: usize,
}

impl Default for PseudomodeParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            delta_override: None,
            n_terms: None,
            cheb_order: 1024,
            quad_order: 2048,
            omega: None,
            allow_inadmissible: false,
            allow_beyond_turning_point: false,
            slack: 0.1,
            samples: 201,
        }
    }
}

impl PseudomodeParams {
    pub fn with_delta(mut self, d: f64) -> Self {
        self.delta_override = Some(d);
        self
    }

    pub fn beyond_turning_point(mut self) -> Self {
        self.allow_beyond_turning_point = true;
        self
    }

    fn check(&self, cb: f64) -> Result<(), PseudomodeError> {
        let mut bad = Vec::new();
        if !(self.epsilon > 0.0 && self.epsilon < cb) {
            bad.push(format!("epsilon must lie in (0, {cb}), got {}", self.epsilon));
        }
        if let Some(d) = self.delta_override {
            if !(d > 0.0 && d.is_finite()) {
                bad.push(format!("delta_override must be positive, got {d}"));
            }
        }
        if self.cheb_order < 16 {
            bad.push(format!("cheb_order must be at least 16, got {}", self.cheb_order));
        }
        if self.quad_order < 2 * self.cheb_order {
            bad.push(format!("quad_order must be at least 2·cheb_order = {}, got {}", 2 * self.cheb_order, self.quad_order));
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            bad.push(format!("slack must be nonnegative, got {}", self.slack));
        }
        if self.samples < 2 {
            bad.push("samples must be at least 2".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(PseudomodeError::Params(bad.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudomodeResult {
    pub lambda: C64,
    pub delta: f64,
    pub delta_lambda: f64,
    pub mu_lambda: f64,
    pub n_used: usize,
    /// `floor(Δ / (e ‖1/φ′‖))` on the support.
    pub n_ceiling: usize,
    pub support: (f64, f64),
    pub q: f64,
    pub lower_bound: f64,
    /// `q` for `N = 0, 1, …` as evaluated.
    pub q_history: Vec<f64>,
    /// `min (α − |V|)` over the support.
    pub branch_margin: f64,
    pub u_norm: f64,
    pub phi_at_center: C64,
    pub a0_at_center: C64,
    pub samples: Vec<(f64, C64)>,
}

/// The constructed quasimode, evaluable anywhere.
struct Quasimode {
    lambda: C64,
    center: f64,
    delta_lambda: f64,
    lo: f64,
    hi: f64,
    re: Poly,
    im: Poly,
    plateau: Plateau,
    phi: Cheb,
    /// `a_j` with first and second derivatives.
    terms: Vec<[Cheb; 3]>,
    r: Vec<C64>,
    nodes: Vec<f64>,
}

impl Quasimode {
    fn potential(&self, x: f64) -> C64 {
        C64::new(self.re.eval_real(x), self.im.eval_real(x))
    }

    /// `s = (λ − V)^{1/2}`, so `φ′ = −s`.
    fn s(&self, x: f64) -> C64 {
        (self.lambda - self.potential(x)).sqrt()
    }

    fn push_term(&mut self) {
        let prev = &self.terms.last().expect("a_0 present")[2];
        // a_j = −i/r(x) ∫_{y}^{x} a_{j−1}″ / (2r), with r = s^{1/2} and φ′^{1/2} = i r.
        let g: Vec<C64> = self.nodes.iter().zip(&self.r).map(|(&x, &r)| prev.eval(x) / (2.0 * r)).collect();
        let big_g = Cheb::from_values(self.lo, self.hi, &g).antiderivative_from(self.center);
        let vals: Vec<C64> =
            self.nodes.iter().zip(&self.r).map(|(&x, &r)| -C64::i() * big_g.eval(x) / r).collect();
        self.terms.push(derivs(Cheb::from_values(self.lo, self.hi, &vals)));
    }

    fn cutoff(&self, x: f64) -> (f64, f64, f64) {
        let (h, h1, h2) = self.plateau.eval((x - self.center) / self.delta_lambda);
        (h, h1 / self.delta_lambda, h2 / (self.delta_lambda * self.delta_lambda))
    }

    /// `u(x) e^{−shift}` with `n` correction terms.
    fn eval_scaled(&self, x: f64, n: usize, shift: f64) -> C64 {
        let (chi, _, _) = self.cutoff(x);
        if chi == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let phi = self.phi.eval(x);
        let sum: C64 = self.terms[..=n].iter().map(|t| t[0].eval(x)).sum();
        (C64::i() * phi - shift).exp() * sum * chi
    }
}

fn derivs(a: Cheb) -> [Cheb; 3] {
    let d = a.derivative();
    let dd = d.derivative();
    [a, d, dd]
}


/// Quadrature nodes on the support with everything the residual identity needs.
struct NormNodes {
    x: Vec<f64>,
    w: Vec<f64>,
    chi: Vec<(f64, f64, f64)>,
    /// `e^{−2 Im φ − 2 shift}`.
    mag2: Vec<f64>,
    dphi: Vec<C64>,
    /// `[a_j, a_j′, a_j″]` per term, per node.
    a: Vec<Vec<[C64; 3]>>,
    shift: f64,
}

impl NormNodes {
    fn new(qm: &Quasimode, quad_order: usize) -> Self {
        let per_side = (quad_order / (4 * PANEL)).max(1);
        let (y, d) = (qm.center, qm.delta_lambda);
        let (mut x, mut w) = (Vec::new(), Vec::new());
        for (lo, hi, p) in [(y - 2.0 * d, y - d, per_side), (y - d, y + d, 2 * per_side), (y + d, y + 2.0 * d, per_side)] {
            let (xs, ws) = composite_rule(lo, hi, p, PANEL);
            x.extend(xs);
            w.extend(ws);
        }
        let phis: Vec<C64> = x.iter().map(|&t| qm.phi.eval(t)).collect();
        let shift = phis.iter().map(|p| -p.im).fold(f64::NEG_INFINITY, f64::max);
        Self {
            chi: x.iter().map(|&t| qm.cutoff(t)).collect(),
            mag2: phis.iter().map(|p| (-2.0 * p.im - 2.0 * shift).exp()).collect(),
            dphi: x.iter().map(|&t| -qm.s(t)).collect(),
            a: Vec::new(),
            x,
            w,
            shift,
        }
    }

    fn add_term(&mut self, t: &[Cheb; 3]) {
        self.a.push(self.x.iter().map(|&x| [t[0].eval(x), t[1].eval(x), t[2].eval(x)]).collect());
    }

    /// `(q, ‖u‖ e^{−shift})` with terms `0..=n`; the residual is
    /// `e^{iφ}[χ″ S + 2χ′(iφ′ S + S′) + χ a_n″]`.
    fn quality(&self, n: usize) -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..self.x.len() {
            let (chi, chi1, chi2) = self.chi[i];
            if chi == 0.0 && chi1 == 0.0 && chi2 == 0.0 {
                continue;
            }
            let (mut s, mut s1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for t in &self.a[..=n] {
                s += t[i][0];
                s1 += t[i][1];
            }
            let res = s * chi2 + (C64::i() * self.dphi[i] * s + s1) * (2.0 * chi1) + self.a[n][i][2] * chi;
            let m = self.w[i] * self.mag2[i];
            num += m * res.norm_sqr();
            den += m * chi * chi * s.norm_sqr();
        }
        ((num / den).sqrt(), den.sqrt())
    }
}

struct Setup {
    delta: f64,
    mu_lambda: f64,
    n_ceiling: usize,
    margin: f64,
}

fn construct(spec: &OscillatorSpec, lambda: C64, p: &PseudomodeParams) -> Result<(Quasimode, Setup), PseudomodeError> {
    validate(spec)?;
    let (_, b, cb) = spec.polynomial_exponents().ok_or_else(|| {
        PseudomodeError::Model(ModelError::Domain("pseudomodes are built for the polynomial_l family only".into()))
    })?;
    p.check(cb)?;
    let k = constants(spec)?;
    if !p.allow_inadmissible {
        let omega = p.omega.unwrap_or(0.5 * k.omega0.unwrap_or(0.0));
        let adm = admissible_region(spec, lambda, p.epsilon, omega)?;
        if !adm.admissible {
            return Err(PseudomodeError::Inadmissible(adm.reason));
        }
    }
    let (xa, yb) = turning_points(spec, lambda)?;
    let zeta = (1.0 - p.epsilon / cb).powf(1.0 / b as f64);
    let delta = p.delta_override.unwrap_or((1.0 - zeta) / 32.0);
    let big_delta = delta * if b % 2 == 1 { xa } else { yb };
    if !(big_delta > 0.0 && big_delta.is_finite()) {
        return Err(PseudomodeError::Params(format!("Δ_λ = {big_delta} is not positive")));
    }
    let mu_lambda = big_delta.powi(b as i32 + 1) / lambda.re.sqrt();
    let (lo, hi) = (yb - 2.0 * big_delta, yb + 2.0 * big_delta);

    let (re, im) = spec.potential_poly().expect("polynomial family");
    let (re, im) = (Poly(re), Poly(im));
    let m = p.cheb_order;

    // Branch and turning-point checks on a fine uniform grid.
    let fine = 8 * m;
    let mut margin = f64::INFINITY;
    let mut inv_dphi = 0.0f64;
    let mut prev: Option<C64> = None;
    for i in 0..=fine {
        let x = lo + (hi - lo) * i as f64 / fine as f64;
        let v = C64::new(re.eval_real(x), im.eval_real(x));
        let g = lambda - v;
        margin = margin.min(lambda.re - v.norm());
        if g.norm() == 0.0 || (g.re < 0.0 && g.im == 0.0) {
            return Err(PseudomodeError::Branch { x });
        }
        if let Some(g0) = prev {
            if g.re < 0.0 && g0.re < 0.0 && g.im.signum() != g0.im.signum() {
                return Err(PseudomodeError::Branch { x });
            }
        }
        prev = Some(g);
        inv_dphi = inv_dphi.max(1.0 / g.norm().sqrt());
    }
    if margin <= 0.0 && !p.allow_beyond_turning_point {
        return Err(PseudomodeError::Support { margin });
    }
    let n_ceiling = (big_delta / (E * inv_dphi)).floor() as usize;

    let nodes = lobatto(lo, hi, m);
    let s_at = |x: f64| (lambda - C64::new(re.eval_real(x), im.eval_real(x))).sqrt();
    let r: Vec<C64> = nodes.iter().map(|&x| s_at(x).sqrt()).collect();
    let phi = Cheb::from_fn(lo, hi, m, |x| -s_at(x)).antiderivative_from(yb);
    let r0 = s_at(yb).sqrt();
    let a0: Vec<C64> = r.iter().map(|&rk| r0 / rk).collect();
    let qm = Quasimode {
        lambda,
        center: yb,
        delta_lambda: big_delta,
        lo,
        hi,
        re,
        im,
        plateau: Plateau::new(),
        phi,
        terms: vec![derivs(Cheb::from_values(lo, hi, &a0))],
        r,
        nodes,
    };
    Ok((qm, Setup { delta, mu_lambda, n_ceiling, margin }))
}

fn finish(
    mut qm: Quasimode,
    setup: Setup,
    p: &PseudomodeParams,
) -> Result<(Quasimode, NormNodes, PseudomodeResult), PseudomodeError> {
    let mut nn = NormNodes::new(&qm, p.quad_order);
    nn.add_term(&qm.terms[0]);
    let mut hist = vec![nn.quality(0).0];
    let mut best = 0;
    match p.n_terms {
        Some(n) => {
            for j in 1..=n {
                qm.push_term();
                nn.add_term(&qm.terms[j]);
                hist.push(nn.quality(j).0);
            }
            best = n;
        }
        None => {
            for j in 1..=setup.n_ceiling {
                qm.push_term();
                nn.add_term(&qm.terms[j]);
                let q = nn.quality(j).0;
                hist.push(q);
                if !(q < hist[j - 1]) {
                    break;
                }
                best = j;
            }
        }
    }
    let (q, scaled_norm) = nn.quality(best);
    let log_norm = scaled_norm.ln() + nn.shift;
    if !(scaled_norm > 0.0) || log_norm < 1e-300f64.ln() {
        return Err(PseudomodeError::Underflow);
    }
    let (lo, hi) = (qm.lo, qm.hi);
    let samples = (0..p.samples)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (p.samples - 1) as f64;
            (x, qm.eval_scaled(x, best, 0.0))
        })
        .collect();
    let res = PseudomodeResult {
        lambda: qm.lambda,
        delta: setup.delta,
        delta_lambda: qm.delta_lambda,
        mu_lambda: setup.mu_lambda,
        n_used: best,
        n_ceiling: setup.n_ceiling,
        support: (lo, hi),
        q,
        lower_bound: 1.0 / q,
        q_history: hist,
        branch_margin: setup.margin,
        u_norm: log_norm.exp(),
        phi_at_center: qm.phi.eval(qm.center),
        a0_at_center: qm.terms[0][0].eval(qm.center),
        samples,
    };
    Ok((qm, nn, res))
}

/// Builds the quasimode at `lambda` and measures its residual quality.
pub fn build(spec: &OscillatorSpec, lambda: C64, params: &PseudomodeParams) -> Result<PseudomodeResult, PseudomodeError> {
    let (qm, setup) = construct(spec, lambda, params)?;
    finish(qm, setup, params).map(|(_, _, r)| r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub lambda: C64,
    pub q: Option<f64>,
    pub lower_bound: Option<f64>,
    pub mu_lambda: Option<f64>,
    pub n_used: Option<usize>,
    pub error: Option<String>,
}

/// `log(1/q) ≈ intercept + slope · abscissa`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanFit {
    pub abscissa: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    /// Slope against `μ_λ`.
    pub eta_hat: f64,
    pub r_squared: f64,
    /// The `μ_λ` fit first, then the growth-rate readings in `Re λ`, `Im λ`.
    pub fits: Vec<ScanFit>,
}

impl ScanPoint {
    pub fn from_build(lambda: C64, r: &Result<PseudomodeResult, PseudomodeError>) -> Self {
        match r {
            Ok(r) => Self {
                lambda,
                q: Some(r.q),
                lower_bound: Some(r.lower_bound),
                mu_lambda: Some(r.mu_lambda),
                n_used: Some(r.n_used),
                error: None,
            },
            Err(e) => Self { lambda, q: None, lower_bound: None, mu_lambda: None, n_used: None, error: Some(e.to_string()) },
        }
    }
}

/// Builds along `curve` in parallel and fits `log(1/q)` over the successful points.
pub fn quality_scan(spec: &OscillatorSpec, curve: &[C64], params: &PseudomodeParams) -> Result<ScanReport, PseudomodeError> {
    let points: Vec<ScanPoint> = curve.par_iter().map(|&l| ScanPoint::from_build(l, &build(spec, l, params))).collect();
    fit_scan(spec, points, params)
}

/// Fits `log(1/q)` against `μ_λ` and against the growth-rate readings in `λ`.
pub fn fit_scan(spec: &OscillatorSpec, points: Vec<ScanPoint>, params: &PseudomodeParams) -> Result<ScanReport, PseudomodeError> {
    let k = constants(spec)?;
    let (_, b, _) = spec.polynomial_exponents().ok_or_else(|| {
        PseudomodeError::Model(ModelError::Domain("pseudomodes are built for the polynomial_l family only".into()))
    })?;
    let ok: Vec<&ScanPoint> = points.iter().filter(|p| p.q.is_some_and(|q| q > 0.0 && q.is_finite())).collect();
    if ok.len() < 3 {
        return Err(PseudomodeError::Fit(format!("{} successful builds, need at least 3", ok.len())));
    }
    let y: Vec<f64> = ok.iter().map(|p| -p.q.unwrap().ln()).collect();
    let bf = b as f64;
    let tau = k.tau.expect("set for polynomial_l");
    let mut readings: Vec<(&'static str, Vec<f64>)> = vec![("mu_lambda", ok.iter().map(|p| p.mu_lambda.unwrap()).collect())];
    if b % 2 == 1 {
        readings.push(("re_lambda_pow_tau", ok.iter().map(|p| p.lambda.re.powf(tau)).collect()));
    } else {
        let omega = params.omega.unwrap_or(0.5 * k.omega0.unwrap_or(0.0));
        readings.push((
            "im_pow_over_sqrt_re",
            ok.iter().map(|p| p.lambda.im.powf((bf + 1.0) / bf) / p.lambda.re.sqrt()).collect(),
        ));
        readings.push(("re_lambda_pow_omega", ok.iter().map(|p| p.lambda.re.powf(omega * (bf + 1.0) / bf)).collect()));
    }
    let mut fits = Vec::new();
    for (name, x) in readings {
        let f = least_squares(&x, &y).map_err(|e| PseudomodeError::Fit(e.to_string()))?;
        fits.push(ScanFit { abscissa: name, slope: f.gamma_hat, intercept: f.intercept, r_squared: f.r_squared });
    }
    Ok(ScanReport { eta_hat: fits[0].slope, r_squared: fits[0].r_squared, points, fits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub lambda: C64,
    pub q: f64,
    pub lower_bound: f64,
    pub resolvent_norm: f64,
    /// `‖u − Πu‖/‖u‖` for the orthogonal projection onto the Hermite basis.
    pub projection_defect: f64,
    pub slack: f64,
    pub basis_size: usize,
    /// `1/q ≤ resolvent_norm · (1 + slack)`.
    pub holds: bool,
    /// Projection defect within [`MAX_PROJECTION_DEFECT`].
    pub valid: bool,
    /// `q < 1`; otherwise the bound says nothing.
    pub informative: bool,
    pub pseudomode: PseudomodeResult,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.valid && self.holds
    }
}

/// Compares `1/q` with the resolvent norm of the discretized operator at `λ`.
pub fn certify_against_svd(
    spec: &OscillatorSpec,
    basis: &BasisSpec,
    lambda: C64,
    params: &PseudomodeParams,
) -> Result<Certificate, PseudomodeError> {
    let (qm, setup) = construct(spec, lambda, params)?;
    let (qm, nn, pm) = finish(qm, setup, params)?;
    let ell = basis.resolved_scaling(spec);
    let nb = basis.size;

    // Resolve both the WKB oscillation and the highest Hermite function.
    let kmax = (0..=256)
        .map(|i| qm.s(qm.lo + (qm.hi - qm.lo) * i as f64 / 256.0).re.abs())
        .fold(0.0, f64::max)
        + (2.0 * nb as f64 + 1.0).sqrt() / ell;
    let panels = ((qm.hi - qm.lo) * kmax / std::f64::consts::PI).ceil() as usize + 8;
    let (xs, ws) = composite_rule(qm.lo, qm.hi, panels, PANEL);
    // Fixed chunks summed in order keep the result independent of scheduling.
    let partial: Vec<(Vec<C64>, f64)> = xs
        .par_chunks(256)
        .zip(ws.par_chunks(256))
        .map(|(xc, wc)| {
            let mut c = vec![C64::new(0.0, 0.0); nb];
            let mut n2 = 0.0;
            for (&x, &w) in xc.iter().zip(wc) {
                let u = qm.eval_scaled(x, pm.n_used, nn.shift);
                if u.norm_sqr() > 0.0 {
                    n2 += w * u.norm_sqr();
                    for (ck, psi) in c.iter_mut().zip(hermite_functions(x / ell, nb)) {
                        *ck += u * (w * psi / ell.sqrt());
                    }
                }
            }
            (c, n2)
        })
        .collect();
    let mut c = vec![C64::new(0.0, 0.0); nb];
    let mut norm2 = 0.0;
    for (pc, pn) in partial {
        for (a, b) in c.iter_mut().zip(pc) {
            *a += b;
        }
        norm2 += pn;
    }
    let captured: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let projection_defect = ((norm2 - captured).max(0.0) / norm2).sqrt();

    let op = ResolventOperator::from_spec(spec, basis)?;
    let resolvent_norm = op.sample(lambda + basis.shift)?.norm;
    Ok(Certificate {
        lambda,
        q: pm.q,
        lower_bound: pm.lower_bound,
        resolvent_norm,
        projection_defect,
        slack: params.slack,
        basis_size: nb,
        holds: pm.lower_bound <= resolvent_norm * (1.0 + params.slack),
        valid: projection_defect <= MAX_PROJECTION_DEFECT,
        informative: pm.q < 1.0,
        pseudomode: pm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(λ − L) e^{iφ} Σ_{j≤N} a_j = e^{iφ} a_N″` where `χ = 1`.
    #[test]
    fn transport_identity_holds_inside_the_plateau() {
        let spec = OscillatorSpec::shifted_ho(C64::new(0.0, 1.0), C64::new(0.0, 0.0));
        let p = PseudomodeParams { cheb_order: 512, quad_order: 1024, ..PseudomodeParams::default() }.with_delta(0.4);
        let (mut qm, _) = construct(&spec, C64::new(100.0, 0.0), &p).unwrap();
        qm.push_term();
        qm.push_term();
        let w = |x: f64, n: usize| {
            let s: C64 = qm.terms[..=n].iter().map(|t| t[0].eval(x)).sum();
            (C64::i() * qm.phi.eval(x)).exp() * s
        };
        let h = 1e-3;
        for n in 0..=2 {
            for x in [-2.5, 0.7, 3.1] {
                let d2 = (-w(x + 2.0 * h, n) + w(x + h, n) * 16.0 - w(x, n) * 30.0 + w(x - h, n) * 16.0 - w(x - 2.0 * h, n))
                    / (12.0 * h * h);
                let lhs = (qm.lambda - qm.potential(x)) * w(x, n) + d2;
                let rhs = (C64::i() * qm.phi.eval(x)).exp() * qm.terms[n][2].eval(x);
                assert!((lhs - rhs).norm() < 1e-6 * (1.0 + rhs.norm()) + 1e-7, "n={n} x={x}: {lhs} vs {rhs}");
            }
        }
    }
}
