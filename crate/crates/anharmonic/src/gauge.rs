//! The gauge function `F(w) = ∏_{k≥1} (1 + w/a_k)` with zeros `a_k = (k/ν)^{1/ρ}`,
//! its derivative at the zeros, and the partial-fraction expansions of `1/F`.
//!
//! Products are accumulated as (log-modulus, argument) pairs. Past the index
//! `K` where `a_{K+1} ≥ 2|w|` the remaining log-factors are summed in closed
//! form through the power series of `log(1+x)` and scaled Hurwitz-type sums,
//! which leaves only a geometrically small, explicitly bounded remainder.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::special::{scaled_power_tail, KahanC};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaugeError {
    #[error("invalid gauge spec: {0}")]
    InvalidSpec(String),
    #[error("truncation failed after {terms} terms; achieved tail bound {achieved:e}")]
    Truncation { terms: usize, achieved: f64 },
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("point {point} lies within {distance:e} of the pole -a_{k}")]
    PoleProximity { point: C64, k: usize, distance: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("kernel evaluated at coincident points z = w")]
    CoincidentPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub nu: f64,
    pub rho: f64,
    #[serde(default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
}

fn default_tail_tolerance() -> f64 {
    1e-12
}
fn default_max_terms() -> usize {
    20_000_000
}

impl GaugeSpec {
    pub fn new(nu: f64, rho: f64) -> Result<Self, GaugeError> {
        let g = Self { nu, rho, tail_tolerance: default_tail_tolerance(), max_terms: default_max_terms() };
        g.validate()?;
        Ok(g)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self, GaugeError> {
        self.tail_tolerance = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_terms(mut self, m: usize) -> Result<Self, GaugeError> {
        self.max_terms = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GaugeError> {
        let mut bad = Vec::new();
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            bad.push(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            bad.push(format!("rho must lie in (0,1), got {}", self.rho));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            bad.push(format!("tail_tolerance must lie in (0,1), got {}", self.tail_tolerance));
        }
        if self.max_terms < 1 {
            bad.push("max_terms must be at least 1".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(GaugeError::InvalidSpec(bad.join("; ")))
        }
    }

    /// Exponent `b = 1/ρ`.
    pub fn b(&self) -> f64 {
        1.0 / self.rho
    }

    fn is_half(&self) -> bool {
        (self.rho - 0.5).abs() < 1e-14
    }
}

/// `a_k = (k/ν)^{1/ρ}`.
pub fn zero(g: &GaugeSpec, k: usize) -> f64 {
    assert!(k >= 1, "zeros are indexed from 1");
    (k as f64 / g.nu).powf(g.b())
}

/// `F(w)` in polar-logarithmic form. `arg` carries the accumulated winding and
/// is not reduced to (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub log_abs: f64,
    pub arg: f64,
    /// Bound on the modulus of the neglected part of `log F`.
    pub tail_bound: f64,
    /// Factors multiplied explicitly plus series terms used for the rest.
    pub terms: usize,
}

impl FValue {
    pub fn value(&self) -> C64 {
        if self.log_abs == f64::NEG_INFINITY {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar(self.log_abs.exp(), self.arg)
    }

    pub fn recip(&self) -> C64 {
        if self.log_abs == f64::NEG_INFINITY {
            return C64::new(f64::INFINITY, 0.0);
        }
        C64::from_polar((-self.log_abs).exp(), -self.arg)
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }
}

/// `log(1 + z)` split as (ln|1+z|, arg(1+z)) without cancellation for small z.
#[inline]
fn log1p_c(z: C64) -> (f64, f64) {
    let la = if z.norm() < 0.5 {
        0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p()
    } else {
        // 1 + re is exact near the zero at re = −1.
        (1.0 + z.re).hypot(z.im).ln()
    };
    (la, z.im.atan2(1.0 + z.re))
}

/// Sums `Σ_{m≥1} sign^{m+1} x^m R(b m, c)/m` where `R(s,c) = Σ_{k≥c}(c/k)^s`, with `|x| ≤ 1/2`.
/// `sign = -1` gives `Σ_{k≥c} log(1 + x (c/k)^b)`; `sign = 1` the `−log(1 − ·)` variant.
/// Returns (sum, remainder bound, terms).
fn log_tail_series(x: C64, b: f64, c: u64, sign: f64, tol: f64) -> (C64, f64, usize) {
    let q = x.norm();
    let mut sum = C64::new(0.0, 0.0);
    if q == 0.0 {
        return (sum, 0.0, 0);
    }
    debug_assert!(q <= 0.5 + 1e-12);
    let mut pw = C64::new(1.0, 0.0);
    let mut m = 0usize;
    loop {
        m += 1;
        pw *= x;
        let s = b * m as f64;
        let r = scaled_power_tail(s, c);
        let term = pw * (r / m as f64);
        let sgn = if sign < 0.0 && m % 2 == 0 { -1.0 } else { 1.0 };
        sum += term * sgn;
        let next_r = scaled_power_tail(b * (m + 1) as f64, c);
        let bound = q.powi(m as i32 + 1) * next_r / ((m + 1) as f64 * (1.0 - q));
        if bound <= tol || m >= 400 {
            return (sum, bound, m);
        }
    }
}

/// Distance from `w` to the nearest pole `−a_k`, with `k`.
pub fn nearest_pole(g: &GaugeSpec, w: C64) -> (usize, f64) {
    let guess = if w.re < 0.0 { g.nu * (-w.re).powf(g.rho) } else { 1.0 };
    let k0 = (guess.floor() as usize).max(1);
    (k0.saturating_sub(2).max(1)..=k0 + 2)
        .map(|k| (k, (w + zero(g, k)).norm()))
        .fold((1, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
}

fn check_pole(g: &GaugeSpec, w: C64) -> Result<(), GaugeError> {
    let (k, d) = nearest_pole(g, w);
    let radius = 1e-6 * zero(g, k).max(1.0);
    if d < radius {
        Err(GaugeError::PoleProximity { point: w, k, distance: d })
    } else {
        Ok(())
    }
}

/// `F(w) = ∏ (1 + w/a_k)`.
pub fn eval_f(g: &GaugeSpec, w: C64) -> Result<FValue, GaugeError> {
    g.validate()?;
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(GaugeError::Domain("w must be finite".into()));
    }
    let b = g.b();
    let aw = w.norm();
    // Smallest K with a_{K+1} ≥ 2|w|.
    let k_split = ((g.nu * (2.0 * aw).powf(g.rho)).ceil() as usize).saturating_sub(1);
    let k_split = (k_split..k_split + 3).find(|&k| zero(g, k + 1) >= 2.0 * aw).unwrap_or(k_split + 3);
    if k_split > g.max_terms {
        let kf = g.max_terms as f64;
        let achieved = aw * g.nu.powf(b) * kf.powf(1.0 - b) / (b - 1.0).max(f64::EPSILON);
        return Err(GaugeError::Truncation { terms: g.max_terms, achieved });
    }
    let mut la = KahanC::default();
    let mut zero_hit = false;
    for k in 1..=k_split {
        let z = w / zero(g, k);
        if z == C64::new(-1.0, 0.0) {
            zero_hit = true;
            break;
        }
        let (l, a) = log1p_c(z);
        la.add(C64::new(l, a));
    }
    if zero_hit {
        return Ok(FValue { log_abs: f64::NEG_INFINITY, arg: 0.0, tail_bound: 0.0, terms: k_split });
    }
    let x = w / zero(g, k_split + 1);
    let tol = (0.25 * f64::EPSILON).min(g.tail_tolerance);
    let (tail, bound, m) = log_tail_series(x, b, k_split as u64 + 1, -1.0, tol);
    la.add(tail);
    let s = la.value();
    Ok(FValue { log_abs: s.re, arg: s.im, tail_bound: bound, terms: k_split + m })
}

/// Leading term `πν r^ρ cos(θρ)/sin(πρ)` of `log|F(r e^{iθ})|`.
pub fn log_asymptote(g: &GaugeSpec, r: f64, theta: f64) -> Result<f64, GaugeError> {
    g.validate()?;
    if !(r > 0.0) {
        return Err(GaugeError::Domain(format!("r must be positive, got {r}")));
    }
    if !(theta.abs() < PI) {
        return Err(GaugeError::Domain(format!("theta must lie in (-π, π), got {theta}")));
    }
    Ok(PI * g.nu * r.powf(g.rho) * (theta * g.rho).cos() / (PI * g.rho).sin())
}

/// `log A(n;b)` where `A(n;b) = (−1)^{n−1} ∏_{k≠n} (1 − n^b/k^b) > 0`.
pub fn log_a_product(n: usize, b: f64, tolerance: f64) -> Result<f64, GaugeError> {
    if n < 1 {
        return Err(GaugeError::Domain("n must be at least 1".into()));
    }
    if !(b > 1.0) || !b.is_finite() {
        return Err(GaugeError::Domain(format!("b must exceed 1, got {b}")));
    }
    if !(tolerance > 0.0) {
        return Err(GaugeError::Domain("tolerance must be positive".into()));
    }
    if b >= 2.0 {
        log_a_paired(n, b, tolerance)
    } else {
        log_a_direct(n, b, tolerance)
    }
}

pub fn a_product(n: usize, b: f64, tolerance: f64) -> Result<f64, GaugeError> {
    log_a_product(n, b, tolerance).map(f64::exp)
}

/// Index where explicit multiplication stops in the A(n;b) products.
fn a_split(n: usize) -> usize {
    (2 * n).max(n + 16)
}

/// Raw factors `|1 − (n/k)^b|` with a log-series tail.
#[doc(hidden)]
pub fn log_a_direct(n: usize, b: f64, tolerance: f64) -> Result<f64, GaugeError> {
    let kmax = a_split(n);
    let nf = n as f64;
    let mut acc = KahanC::default();
    for k in 1..=kmax {
        if k == n {
            continue;
        }
        let kf = k as f64;
        // b·ln(n/k) computed through ln_1p for k near n.
        let l = b * ((nf - kf) / kf).ln_1p();
        let f = if k < n { l.exp_m1() } else { -l.exp_m1() };
        acc.add(C64::new(f.ln(), 0.0));
    }
    let c = kmax as u64 + 1;
    let x = (nf / c as f64).powf(b);
    // Σ_{k≥c} ln(1 − (n/k)^b) = −Σ_m x^m R(bm,c)/m
    let (t, bound, _) = log_tail_series(C64::new(x, 0.0), b, c, 1.0, 0.01 * tolerance);
    if bound > tolerance {
        return Err(GaugeError::Truncation { terms: kmax, achieved: bound });
    }
    acc.add(-t);
    Ok(acc.value().re)
}

/// `A(n;b) = ½ ∏_{k≠n} r(k/n)` with `r(t) = (1 − t^{−b})/(1 − t^{−2})`, the
/// ratio to the `b = 2` product which telescopes to ½. Each factor is O(1)
/// and free of cancellation near `k = n`.
#[doc(hidden)]
pub fn log_a_paired(n: usize, b: f64, tolerance: f64) -> Result<f64, GaugeError> {
    let kmax = a_split(n);
    let nf = n as f64;
    let mut acc = KahanC::default();
    acc.add(C64::new(-std::f64::consts::LN_2, 0.0));
    for k in 1..=kmax {
        if k == n {
            continue;
        }
        let kf = k as f64;
        let lv = 2.0 * ((nf - kf) / kf).ln_1p(); // ln v, v = (n/k)²
        let r = (0.5 * b * lv).exp_m1() / lv.exp_m1();
        acc.add(C64::new(r.ln(), 0.0));
    }
    let c = kmax as u64 + 1;
    let y = nf / c as f64;
    // Σ_{k≥c} ln r = Σ_m (1/m)[Σ v^m − Σ v^{bm/2}], v = (n/k)²
    let (t2, e2, _) = log_tail_series(C64::new(y * y, 0.0), 2.0, c, 1.0, 0.005 * tolerance);
    let (tb, eb, _) = log_tail_series(C64::new(y.powf(b), 0.0), b, c, 1.0, 0.005 * tolerance);
    if e2 + eb > tolerance {
        return Err(GaugeError::Truncation { terms: kmax, achieved: e2 + eb });
    }
    acc.add(C64::new(t2.re - tb.re, 0.0));
    Ok(acc.value().re)
}

/// `F′(−a_n)` as sign and log-modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FPrime {
    pub sign: f64,
    pub log_abs: f64,
}

impl FPrime {
    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }
    pub fn recip(&self) -> f64 {
        self.sign * (-self.log_abs).exp()
    }
}

/// `F′(−a_n) = (−1)^{n−1} ν^b n^{−b} A(n;b)`, `b = 1/ρ`.
///
/// Differentiating the product gives `(1/a_n) ∏_{k≠n}(1 − a_n/a_k)` and
/// `1/a_n = ν^b n^{−b}`; the `n^{−b}` factor matters for every n > 1.
pub fn f_prime_at_zero(g: &GaugeSpec, n: usize) -> Result<FPrime, GaugeError> {
    g.validate()?;
    let b = g.b();
    let la = log_a_product(n, b, 1e-15)?;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(FPrime { sign, log_abs: b * g.nu.ln() - b * (n as f64).ln() + la })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfdReport {
    pub value_direct: C64,
    pub value_series: C64,
    pub residual: f64,
    pub terms_used: usize,
}

/// Term count for series evaluation: fixed, or chosen from an explicit tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    Fixed(usize),
    Adaptive,
}

/// Reciprocal derivatives `1/F′(−a_n)`, n = 1..=count.
pub fn pfd_coefficients(g: &GaugeSpec, count: usize) -> Result<Vec<f64>, GaugeError> {
    (1..=count).map(|n| f_prime_at_zero(g, n).map(|f| f.recip())).collect()
}

/// Number of terms of `Σ c_n/(w + a_n)` (ρ < 1/2) needed so that the
/// next terms are negligible; the coefficients decay like `exp(−πn cot(πρ))`.
fn adaptive_count(g: &GaugeSpec, scale: f64, tol: f64, term: impl Fn(usize) -> Result<f64, GaugeError>) -> Result<usize, GaugeError> {
    let mut n = 1;
    let mut small = 0;
    loop {
        if n > g.max_terms {
            return Err(GaugeError::Truncation { terms: g.max_terms, achieved: term(n - 1)? });
        }
        let t = term(n)?;
        if t <= tol * scale.max(f64::MIN_POSITIVE) {
            small += 1;
            if small >= 3 {
                return Ok(n);
            }
        } else {
            small = 0;
        }
        n += 1;
    }
}

/// Partial fractions `1/F(w) = Σ 1/(F′(−a_n)(w + a_n))`, valid for ρ < 1/2.
pub fn pfd_eval(g: &GaugeSpec, w: C64, terms: Terms) -> Result<PfdReport, GaugeError> {
    g.validate()?;
    if g.rho >= 0.5 {
        return Err(GaugeError::UnsupportedRegime(format!(
            "the plain expansion needs rho < 1/2, got {}",
            g.rho
        )));
    }
    check_pole(g, w)?;
    let direct = eval_f(g, w)?.recip();
    let count = match terms {
        Terms::Fixed(t) => t.min(g.max_terms),
        Terms::Adaptive => adaptive_count(g, direct.norm(), 1e-3 * g.tail_tolerance.min(1e-13), |n| {
            Ok(f_prime_at_zero(g, n)?.recip().abs() / (w + zero(g, n)).norm())
        })?,
    };
    let mut acc = KahanC::default();
    for n in 1..=count {
        let c = f_prime_at_zero(g, n)?.recip();
        acc.add(c / (w + zero(g, n)));
    }
    let series = acc.value();
    Ok(PfdReport { value_direct: direct, value_series: series, residual: (direct - series).norm(), terms_used: count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summation {
    /// Adjacent terms combined before summation; each pair counts as one term.
    Paired,
    /// Terms summed one at a time in index order.
    Unpaired,
}

/// Pair count for a paired ρ = 1/2 series whose pairs behave like `scale·ν²/(2j³)`
/// for large j, so the tail after J pairs is about `scale·ν²/(4J²)`. J is taken
/// twice as large as that estimate requires (tail four times smaller), and large
/// enough that `a_{2J} ≥ 10 |pole argument|` so the asymptotics apply.
fn half_pairs_for(g: &GaugeSpec, scale: f64, big: f64, tol: f64) -> usize {
    let j_est = 2.0 * (scale * g.nu * g.nu / (4.0 * tol)).sqrt();
    let j_min = ((g.nu * (10.0 * big).sqrt()).ceil() as usize) / 2 + 1;
    (j_est.ceil() as usize).max(j_min).max(1)
}

/// The ρ = 1/2 alternating form `1/F(w) = 1 + 2 Σ (−1)^n w/(w + a_n)`.
/// On the positive axis `value_direct` is the closed form `πν√w / sinh(πν√w)`.
pub fn pfd_half_eval(g: &GaugeSpec, w: C64, terms: Terms, summation: Summation) -> Result<PfdReport, GaugeError> {
    g.validate()?;
    if !g.is_half() {
        return Err(GaugeError::UnsupportedRegime(format!("the alternating form needs rho = 1/2, got {}", g.rho)));
    }
    check_pole(g, w)?;
    let direct = if w.im == 0.0 && w.re >= 0.0 {
        let x = PI * g.nu * w.re.sqrt();
        C64::new(if x == 0.0 { 1.0 } else { x / x.sinh() }, 0.0)
    } else {
        eval_f(g, w)?.recip()
    };
    let count = match terms {
        Terms::Fixed(t) => t,
        Terms::Adaptive => half_pairs_for(g, 2.0 * w.norm(), w.norm(), g.tail_tolerance),
    };
    if count > g.max_terms {
        let m = g.max_terms as f64;
        return Err(GaugeError::Truncation { terms: g.max_terms, achieved: w.norm() * g.nu * g.nu / (2.0 * m * m) });
    }
    let mut acc = KahanC::default();
    acc.add(C64::new(1.0, 0.0));
    match summation {
        Summation::Paired => {
            for j in 1..=count {
                let a1 = zero(g, 2 * j - 1);
                let a2 = zero(g, 2 * j);
                let diff = ((4 * j - 1) as f64) / (g.nu * g.nu);
                acc.add(-2.0 * w * diff / ((w + a1) * (w + a2)));
            }
        }
        Summation::Unpaired => {
            for n in 1..=count {
                let s = if n % 2 == 0 { 2.0 } else { -2.0 };
                acc.add(s * w / (w + zero(g, n)));
            }
        }
    }
    let series = acc.value();
    Ok(PfdReport { value_direct: direct, value_series: series, residual: (direct - series).norm(), terms_used: count })
}

/// Both sides of a kernel identity and their discrepancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub terms_used: usize,
}

/// `1/((z−w)F(w)) = 1/(F(z)(z−w)) + Σ_n 1/((z+a_n)F′(−a_n)(w+a_n))` for ρ < 1/2,
/// and for ρ = 1/2 the same with the sum replaced by `2Σ(−1)^{n+1} a_n/((z+a_n)(w+a_n))`.
pub fn cauchy_kernel_pfd(g: &GaugeSpec, z: C64, w: C64) -> Result<f64, GaugeError> {
    power_pfd_report(g, z, w, 1).map(|r| r.residual)
}

/// The p-power variant `1/((z−w)F(w^p)) = 1/(F(z^p)(z−w)) + Σ_n S_p(z,w)/((z^p+a_n)F′(−a_n)(w^p+a_n))`
/// with `S_p = Σ_{k<p} w^k z^{p−1−k}`; returns the absolute discrepancy.
pub fn power_pfd(g: &GaugeSpec, z: C64, w: C64, p: u32) -> Result<f64, GaugeError> {
    power_pfd_report(g, z, w, p).map(|r| r.residual)
}

pub fn power_pfd_report(g: &GaugeSpec, z: C64, w: C64, p: u32) -> Result<KernelReport, GaugeError> {
    g.validate()?;
    if p == 0 {
        return Err(GaugeError::Domain("p must be positive".into()));
    }
    if z == w {
        return Err(GaugeError::CoincidentPoints);
    }
    if g.rho > 0.5 && !g.is_half() {
        return Err(GaugeError::UnsupportedRegime(format!("kernel expansions need rho <= 1/2, got {}", g.rho)));
    }
    let zp = z.powu(p);
    let wp = w.powu(p);
    check_pole(g, zp)?;
    check_pole(g, wp)?;
    let s: C64 = (0..p).map(|k| w.powu(k) * z.powu(p - 1 - k)).sum();
    let fz = eval_f(g, zp)?;
    let fw = eval_f(g, wp)?;
    let lhs = fw.recip() / (z - w);
    let mut acc = KahanC::default();
    acc.add(fz.recip() / (z - w));
    let terms;
    if g.is_half() {
        // Paired alternating sum; 2S(1/a_{2j−1} − 1/a_{2j}) ≈ |S|ν²/(2j³) per pair.
        let big = zp.norm().max(wp.norm());
        let count = half_pairs_for(g, s.norm(), big, g.tail_tolerance);
        if count > g.max_terms {
            let m = g.max_terms as f64;
            return Err(GaugeError::Truncation { terms: g.max_terms, achieved: s.norm() * g.nu * g.nu / (4.0 * m * m) });
        }
        let h = |a: f64| a / ((zp + a) * (wp + a));
        for j in 1..=count {
            let pair = h(zero(g, 2 * j - 1)) - h(zero(g, 2 * j));
            acc.add(2.0 * s * pair);
        }
        terms = count;
    } else {
        let scale = lhs.norm();
        let tol = 1e-3 * g.tail_tolerance.min(1e-13);
        let count = adaptive_count(g, scale, tol, |n| {
            let a = zero(g, n);
            Ok(s.norm() * f_prime_at_zero(g, n)?.recip().abs() / ((zp + a) * (wp + a)).norm())
        })?;
        for n in 1..=count {
            let a = zero(g, n);
            acc.add(s * f_prime_at_zero(g, n)?.recip() / ((zp + a) * (wp + a)));
        }
        terms = count;
    }
    let rhs = acc.value();
    Ok(KernelReport { lhs, rhs, residual: (lhs - rhs).norm(), terms_used: terms })
}
