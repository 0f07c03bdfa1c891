//! Operator families `-d²/dx² + V`, their parameter constraints, and the
//! closed-form constants attached to them.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::special::{ln_beta, ln_gamma};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OscillatorSpec {
    /// `x^{2a} + V₁(x)` with polynomial `V₁`; coefficients low to high degree.
    #[serde(rename = "polynomial_l")]
    PolynomialL {
        a: u32,
        #[serde(default)]
        re_coeffs: Vec<f64>,
        im_coeffs: Vec<f64>,
    },
    /// `i|x|^b`, b > 0.
    EvenImaginary { b: f64 },
    /// `i x^{2b+1}`, b ≥ 1.
    OddImaginary { b: u32 },
    /// `(-i d/dx + i v')² + |x|^b` with `v = x^{(2+b)s/2}/2` for x > 1.
    Conjugated { b: f64, s: f64 },
    /// `|x|^l`.
    SelfAdjointPower { l: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub constraint: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.constraint, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid oscillator spec: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("the {0} potential is only defined for real arguments")]
    RealOnly(&'static str),
    #[error("{0}")]
    Domain(String),
}

/// Dense polynomial, coefficients from degree 0 upward.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    /// Degree after dropping trailing zeros; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0.0)
    }
    pub fn leading(&self) -> f64 {
        self.degree().map_or(0.0, |d| self.0[d])
    }
    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
    pub fn eval_real(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }
}

impl OscillatorSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            Self::PolynomialL { .. } => "polynomial_l",
            Self::EvenImaginary { .. } => "even_imaginary",
            Self::OddImaginary { .. } => "odd_imaginary",
            Self::Conjugated { .. } => "conjugated",
            Self::SelfAdjointPower { .. } => "self_adjoint_power",
        }
    }

    /// Shifted harmonic oscillator `x² + α₁x + α₀` as a `PolynomialL` spec
    /// (requires Im α₁ > 0 to satisfy the family constraints).
    pub fn shifted_ho(alpha1: C64, alpha0: C64) -> Self {
        Self::PolynomialL {
            a: 1,
            re_coeffs: vec![alpha0.re, alpha1.re],
            im_coeffs: vec![alpha0.im, alpha1.im],
        }
    }

    /// Real and imaginary parts of `V₁` for `PolynomialL`.
    pub fn v1(&self) -> Option<(Poly, Poly)> {
        match self {
            Self::PolynomialL { re_coeffs, im_coeffs, .. } => {
                Some((Poly(re_coeffs.clone()), Poly(im_coeffs.clone())))
            }
            _ => None,
        }
    }

    /// `(a, b, c_b)` for `PolynomialL`.
    pub fn polynomial_exponents(&self) -> Option<(u32, u32, f64)> {
        let (_, im) = self.v1()?;
        let Self::PolynomialL { a, .. } = self else { return None };
        let b = im.degree()? as u32;
        Some((*a, b, im.leading()))
    }

    /// Full potential as a polynomial (low to high) when it is one.
    pub fn potential_poly(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Self::PolynomialL { a, re_coeffs, im_coeffs } => {
                let deg = 2 * *a as usize;
                let mut re = vec![0.0; deg + 1];
                re[deg] = 1.0;
                for (k, &c) in re_coeffs.iter().enumerate() {
                    if k >= re.len() {
                        re.resize(k + 1, 0.0);
                    }
                    re[k] += c;
                }
                Some((re, im_coeffs.clone()))
            }
            Self::EvenImaginary { b } if is_even_integer(*b) => {
                let d = *b as usize;
                let mut im = vec![0.0; d + 1];
                im[d] = 1.0;
                Some((vec![0.0], im))
            }
            Self::OddImaginary { b } => {
                let d = 2 * *b as usize + 1;
                let mut im = vec![0.0; d + 1];
                im[d] = 1.0;
                Some((vec![0.0], im))
            }
            Self::SelfAdjointPower { l } if is_even_integer(*l) => {
                let d = *l as usize;
                let mut re = vec![0.0; d + 1];
                re[d] = 1.0;
                Some((re, vec![0.0]))
            }
            _ => None,
        }
    }
}

pub(crate) fn is_even_integer(x: f64) -> bool {
    x > 0.0 && x.fract() == 0.0 && (x as u64) % 2 == 0 && x < 1e6
}

/// A spec that passed validation, with non-fatal remarks.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub spec: OscillatorSpec,
    pub warnings: Vec<String>,
}

pub fn validate(spec: &OscillatorSpec) -> Result<Validated, ModelError> {
    let mut bad = Vec::new();
    let mut warnings = Vec::new();
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    match spec {
        OscillatorSpec::PolynomialL { a, re_coeffs, im_coeffs } => {
            if *a < 1 {
                bad.push(Violation { constraint: "a is a positive integer", detail: format!("a = {a}") });
            }
            if !finite(re_coeffs) || !finite(im_coeffs) {
                bad.push(Violation { constraint: "coefficients are finite", detail: "non-finite coefficient".into() });
            }
            let re = Poly(re_coeffs.clone());
            let im = Poly(im_coeffs.clone());
            if let Some(dr) = re.degree() {
                if *a >= 1 && dr > 2 * *a as usize - 1 {
                    bad.push(Violation {
                        constraint: "deg Re V1 <= 2a - 1",
                        detail: format!("deg Re V1 = {dr}, a = {a}"),
                    });
                }
            }
            match im.degree() {
                None => bad.push(Violation {
                    constraint: "deg Im V1 = b with a - 1 < b < 2a",
                    detail: "Im V1 is identically zero".into(),
                }),
                Some(b) => {
                    let (a, b) = (*a as i64, b as i64);
                    if !(a - 1 < b && b < 2 * a) {
                        bad.push(Violation {
                            constraint: "deg Im V1 = b with a - 1 < b < 2a",
                            detail: format!("b = {b}, a = {a}"),
                        });
                    }
                    if im.leading() <= 0.0 {
                        bad.push(Violation {
                            constraint: "leading coefficient c_b of Im V1 is positive",
                            detail: format!("c_b = {}", im.leading()),
                        });
                    }
                }
            }
            if bad.is_empty() {
                let low_re = match re.degree() {
                    Some(d) if d % 2 == 1 => true,
                    Some(_) if re.leading() < 0.0 => true,
                    _ => (-200..=200).map(|i| re.eval_real(i as f64 * 0.25)).fold(f64::INFINITY, f64::min) < 1.0,
                };
                if low_re {
                    warnings.push(
                        "Re V1 >= 1 does not hold; spectra are unaffected up to a shift, request one in the basis if needed"
                            .into(),
                    );
                }
            }
        }
        OscillatorSpec::EvenImaginary { b } => {
            if !(*b > 0.0 && b.is_finite()) {
                bad.push(Violation { constraint: "b > 0", detail: format!("b = {b}") });
            }
        }
        OscillatorSpec::OddImaginary { b } => {
            if *b < 1 {
                bad.push(Violation { constraint: "b >= 1", detail: format!("b = {b}") });
            }
        }
        OscillatorSpec::Conjugated { b, s } => {
            if !(*b >= 2.0 && b.is_finite()) {
                bad.push(Violation { constraint: "b >= 2", detail: format!("b = {b}") });
            }
            if !(*s > 0.0 && *s < 1.0) {
                bad.push(Violation { constraint: "0 < s < 1", detail: format!("s = {s}") });
            }
        }
        OscillatorSpec::SelfAdjointPower { l } => {
            if !(*l > 0.0 && l.is_finite()) {
                bad.push(Violation { constraint: "l > 0", detail: format!("l = {l}") });
            }
        }
    }
    if bad.is_empty() {
        Ok(Validated { spec: spec.clone(), warnings })
    } else {
        Err(ModelError::Invalid(bad))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub kappa: f64,
    pub d: f64,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub omega0: Option<f64>,
    pub ray_angle: Option<f64>,
    /// Known limit of `log‖P_n‖ / n`.
    pub slope_constant: Option<f64>,
    /// Exponent `s/κ` in `log‖P_n‖ ≈ λ_n^{s/κ}`.
    pub projection_exponent: Option<f64>,
}

/// `d = √π Γ(3/2 + 1/l)/Γ(1 + 1/l)` for the self-adjoint `|x|^l` oscillator.
pub fn d_power(l: f64) -> f64 {
    (0.5 * PI.ln() + ln_gamma(1.5 + 1.0 / l) - ln_gamma(1.0 + 1.0 / l)).exp()
}

pub fn kappa_power(l: f64) -> f64 {
    2.0 * l / (l + 2.0)
}

pub fn constants(spec: &OscillatorSpec) -> Result<AsymptoticConstants, ModelError> {
    validate(spec)?;
    let none = AsymptoticConstants {
        kappa: 0.0,
        d: 0.0,
        sigma: None,
        tau: None,
        omega0: None,
        ray_angle: None,
        slope_constant: None,
        projection_exponent: None,
    };
    Ok(match spec {
        OscillatorSpec::PolynomialL { a, .. } => {
            let (_, b, _) = spec.polynomial_exponents().expect("validated");
            let (af, bf) = (*a as f64, b as f64);
            let kappa = 2.0 * af / (af + 1.0);
            let tau = (bf + 1.0) / (2.0 * af) - 0.5;
            AsymptoticConstants {
                kappa,
                d: PI / ln_beta(0.5, 1.0 + 1.0 / (2.0 * af)).exp(),
                sigma: Some(kappa * tau),
                tau: Some(tau),
                omega0: Some(bf * tau / (bf + 1.0)),
                ..none
            }
        }
        OscillatorSpec::SelfAdjointPower { l } => {
            AsymptoticConstants { kappa: kappa_power(*l), d: d_power(*l), ..none }
        }
        OscillatorSpec::EvenImaginary { b } => AsymptoticConstants {
            kappa: kappa_power(*b),
            d: d_power(*b),
            ray_angle: Some(PI / (b + 2.0)),
            slope_constant: (*b == 2.0).then(|| (1.0 + 2f64.sqrt()).ln()),
            ..none
        },
        OscillatorSpec::OddImaginary { b } => {
            let m = 2.0 * *b as f64 + 1.0;
            AsymptoticConstants {
                kappa: (4.0 * *b as f64 + 2.0) / (2.0 * *b as f64 + 3.0),
                d: PI / (ln_beta(0.5, 1.0 + 1.0 / m).exp() * (PI / (2.0 * m)).cos()),
                slope_constant: (*b == 1).then(|| PI / 3f64.sqrt()),
                ..none
            }
        }
        OscillatorSpec::Conjugated { b, s } => {
            let kappa = kappa_power(*b);
            AsymptoticConstants { kappa, d: d_power(*b), projection_exponent: Some(s / kappa), ..none }
        }
    })
}

/// Leading eigenvalue model `(dn)^κ`; for the even imaginary family it is
/// rotated onto the ray `arg λ = π/(b+2)`, so only its modulus is `(dn)^κ`.
pub fn predicted_eigenvalue(spec: &OscillatorSpec, n: usize) -> Result<C64, ModelError> {
    if n < 1 {
        return Err(ModelError::Domain("n must be at least 1".into()));
    }
    let k = constants(spec)?;
    let m = (k.d * n as f64).powf(k.kappa);
    Ok(match k.ray_angle {
        Some(theta) => C64::from_polar(m, theta),
        None => C64::new(m, 0.0),
    })
}

/// `λ_n = 2n − 1 + α₀ − α₁²/4` for `x² + α₁x + α₀`.
pub fn exact_shifted_ho(alpha1: C64, alpha0: C64, n: usize) -> C64 {
    C64::new(2.0 * n as f64 - 1.0, 0.0) + alpha0 - alpha1 * alpha1 / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ProjectionModel {
    /// Full asymptotic formula for the shifted harmonic oscillator.
    ShiftedHo { im_alpha1: f64 },
    /// `log‖P_n‖ ~ slope · n`.
    LinearSlope { slope: f64 },
    /// `log‖P_n‖ ~ λ_n^{exponent}`.
    EigenvaluePower { exponent: f64 },
    /// No closed form; `sigma` is the exponential order of the limsup bound when known.
    NoClosedModel { sigma: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionPrediction {
    pub model: ProjectionModel,
    pub value: Option<f64>,
}

/// `2^{-3/4} (π|Im α₁|)^{-1/2} exp(√2 |Im α₁| √n) n^{-1/4}`.
pub fn shifted_ho_projection_norm(im_alpha1: f64, n: usize) -> f64 {
    let t = im_alpha1.abs();
    let nf = n as f64;
    2f64.powf(-0.75) / (PI * t).sqrt() * (2f64.sqrt() * t * nf.sqrt()).exp() / nf.powf(0.25)
}

pub fn predicted_projection_norm(spec: &OscillatorSpec, n: usize) -> Result<ProjectionPrediction, ModelError> {
    let k = constants(spec)?;
    let none = |sigma| ProjectionPrediction { model: ProjectionModel::NoClosedModel { sigma }, value: None };
    Ok(match spec {
        OscillatorSpec::PolynomialL { a: 1, re_coeffs, im_coeffs } => {
            let _ = re_coeffs;
            if im_coeffs.len() >= 2 && Poly(im_coeffs.clone()).degree() == Some(1) {
                let t = im_coeffs[1];
                ProjectionPrediction {
                    model: ProjectionModel::ShiftedHo { im_alpha1: t },
                    value: Some(shifted_ho_projection_norm(t, n)),
                }
            } else {
                none(k.sigma)
            }
        }
        OscillatorSpec::EvenImaginary { .. } | OscillatorSpec::OddImaginary { .. } => match k.slope_constant {
            Some(s) => ProjectionPrediction { model: ProjectionModel::LinearSlope { slope: s }, value: None },
            None => none(k.sigma),
        },
        OscillatorSpec::Conjugated { .. } => ProjectionPrediction {
            model: ProjectionModel::EigenvaluePower { exponent: k.projection_exponent.expect("set") },
            value: None,
        },
        _ => none(k.sigma),
    })
}

/// Exponent `p = (2+b)s/2` of the conjugation weight `v(x) = x^p/2`, x > 1.
pub fn conjugation_power(b: f64, s: f64) -> f64 {
    (2.0 + b) * s / 2.0
}

/// `(v, v', v'')` at real `x`. For `|x| ≤ 1`, when `p < 3`, `v` is the odd
/// quintic matching value, slope and curvature of `x^p/2` at `x = 1`; when
/// `p ≥ 3` the odd extension `sign(x)|x|^p/2` is already C² and is used as is.
pub fn conjugation_weight(b: f64, s: f64, x: f64) -> (f64, f64, f64) {
    let p = conjugation_power(b, s);
    let sg = x.signum();
    let t = x.abs();
    if t > 1.0 || p >= 3.0 {
        if t == 0.0 {
            return (0.0, if p == 1.0 { 0.5 } else { 0.0 }, 0.0);
        }
        let v = 0.5 * t.powf(p);
        let v1 = 0.5 * p * t.powf(p - 1.0);
        let v2 = 0.5 * p * (p - 1.0) * t.powf(p - 2.0);
        return (sg * v, v1, sg * v2);
    }
    let c5 = (p - 1.0) * (p - 3.0) / 16.0;
    let c3 = (p - 1.0) * (5.0 - p) / 8.0;
    let c1 = 0.5 - (p - 1.0) * (7.0 - p) / 16.0;
    let v = x * (c1 + x * x * (c3 + x * x * c5));
    let v1 = c1 + x * x * (3.0 * c3 + 5.0 * c5 * x * x);
    let v2 = x * (6.0 * c3 + 20.0 * c5 * x * x);
    (v, v1, v2)
}

/// Potential `V(z)`. Families with `|x|^b` for non-even-integer `b` and the
/// conjugated family accept only real arguments.
pub fn potential_eval(spec: &OscillatorSpec, z: C64) -> Result<C64, ModelError> {
    validate(spec)?;
    if let Some((re, im)) = spec.potential_poly() {
        return Ok(Poly(re).eval(z) + C64::i() * Poly(im).eval(z));
    }
    if z.im != 0.0 {
        return Err(ModelError::RealOnly(spec.family_name()));
    }
    let x = z.re.abs();
    Ok(match spec {
        OscillatorSpec::EvenImaginary { b } => C64::new(0.0, x.powf(*b)),
        OscillatorSpec::SelfAdjointPower { l } => C64::new(x.powf(*l), 0.0),
        OscillatorSpec::Conjugated { b, .. } => C64::new(x.powf(*b), 0.0),
        _ => unreachable!("polynomial families handled above"),
    })
}

/// `(x_α, y_β) = (α^{1/(2a)}, (β/c_b)^{1/b})` for `λ = α + iβ`.
pub fn turning_points(spec: &OscillatorSpec, lambda: C64) -> Result<(f64, f64), ModelError> {
    validate(spec)?;
    let (a, b, cb) = spec
        .polynomial_exponents()
        .ok_or_else(|| ModelError::Domain("turning points are defined for the polynomial_l family".into()))?;
    if !(lambda.re > 0.0) {
        return Err(ModelError::Domain(format!("Re λ must be positive, got {}", lambda.re)));
    }
    if lambda.im < 0.0 {
        return Err(ModelError::Domain(format!("Im λ must be nonnegative, got {}", lambda.im)));
    }
    Ok((lambda.re.powf(1.0 / (2.0 * a as f64)), (lambda.im / cb).powf(1.0 / b as f64)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub reason: String,
}

/// Whether `λ` lies in the region where pseudomodes give exponential resolvent growth:
/// odd b: `0 ≤ β ≤ (c_b − ε) α^{b/(2a)}`; even b: `α^{b/(2(b+1)) + ω} ≤ β ≤ (c_b − ε) α^{b/(2a)}`.
pub fn admissible_region(spec: &OscillatorSpec, lambda: C64, epsilon: f64, omega: f64) -> Result<Admissibility, ModelError> {
    let k = constants(spec)?;
    let (a, b, cb) = spec
        .polynomial_exponents()
        .ok_or_else(|| ModelError::Domain("admissible regions are defined for the polynomial_l family".into()))?;
    if !(epsilon > 0.0 && epsilon < cb) {
        return Err(ModelError::Domain(format!("epsilon must lie in (0, c_b = {cb}), got {epsilon}")));
    }
    let (alpha, beta) = (lambda.re, lambda.im);
    let (af, bf) = (a as f64, b as f64);
    if !(alpha > 0.0) {
        return Ok(Admissibility { admissible: false, reason: format!("Re λ = {alpha} is not positive") });
    }
    let upper = (cb - epsilon) * alpha.powf(bf / (2.0 * af));
    let lower = if b % 2 == 0 {
        let w0 = k.omega0.expect("set for polynomial_l");
        if !(omega > 0.0 && omega < w0) {
            return Err(ModelError::Domain(format!("omega must lie in (0, omega0 = {w0}), got {omega}")));
        }
        alpha.powf(bf / (2.0 * (bf + 1.0)) + omega)
    } else {
        0.0
    };
    let ok = beta >= lower && beta <= upper;
    let reason = if ok {
        format!("{lower:.6e} <= Im λ = {beta:.6e} <= {upper:.6e}")
    } else if beta < lower {
        format!("Im λ = {beta:.6e} is below the lower envelope {lower:.6e}")
    } else {
        format!("Im λ = {beta:.6e} exceeds the upper envelope {upper:.6e}")
    };
    Ok(Admissibility { admissible: ok, reason })
}
