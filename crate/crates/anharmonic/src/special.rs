//! Small special-function helpers shared across modules.

/// Even-index Bernoulli numbers B_2 .. B_12.
const BERNOULLI_EVEN: [f64; 6] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];

/// `Σ_{k≥c} (c/k)^s` for integer `c ≥ 1` and `s > 1`.
///
/// Direct summation over the first `ceil(s) + 24` terms, Euler–Maclaurin for
/// the rest. Every term is at most 1, so nothing overflows however large `s` is.
pub fn scaled_power_tail(s: f64, c: u64) -> f64 {
    assert!(s > 1.0 && c >= 1);
    let cf = c as f64;
    let direct = s.ceil() as u64 + 24;
    let n0 = c + direct;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in c..n0 {
        let t = (-s * ((k - c) as f64 / cf).ln_1p()).exp();
        // Neumaier: terms fall from 1 towards the tail.
        let y = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - y) + t } else { (t - y) + sum };
        sum = y;
        if t < 1e-18 * sum {
            return sum + comp;
        }
    }
    let n = n0 as f64;
    let fnn = (-s * ((n - cf) / cf).ln_1p()).exp();
    if fnn == 0.0 {
        return sum + comp;
    }
    let mut tail = n * fnn / (s - 1.0) + 0.5 * fnn;
    // rising factorial (s)_{2j-1} / N^{2j-1} / (2j)!
    let mut rising = s / n;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        tail += b / fact * rising * fnn;
        let r = 2 * j as u64 + 1;
        rising *= (s + r as f64) * (s + r as f64 + 1.0) / (n * n);
        fact *= ((2 * j + 3) * (2 * j + 4)) as f64;
    }
    sum + comp + tail
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// log B(p, q) through log-Gamma.
pub fn ln_beta(p: f64, q: f64) -> f64 {
    ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)
}

/// Neumaier-compensated running sum for real or complex data.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanC {
    re: (f64, f64),
    im: (f64, f64),
}

#[inline]
fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c2 = if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
    *acc = (t, c + c2);
}

impl KahanC {
    pub fn add(&mut self, z: num_complex::Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }
    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_tail_matches_zeta() {
        // c = 1: ζ(s).
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((scaled_power_tail(2.0, 1) - z2).abs() < 1e-14);
        let z4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((scaled_power_tail(4.0, 1) - z4).abs() < 1e-15);
        // c = 3, s = 2: 9 (ζ(2) − 1 − 1/4).
        let want = 9.0 * (z2 - 1.25);
        assert!((scaled_power_tail(2.0, 3) - want).abs() < 1e-13);
    }

    #[test]
    fn power_tail_near_one_and_huge_s() {
        // s → ∞: only the first term survives.
        assert!((scaled_power_tail(400.0, 7) - 1.0 - (7.0f64 / 8.0).powf(400.0)).abs() < 1e-15);
        // s = 1.5, c = 1: ζ(3/2) = 2.612375348685488...
        assert!((scaled_power_tail(1.5, 1) - 2.612_375_348_685_488).abs() < 1e-13);
    }

    #[test]
    fn beta_identity() {
        // B(1/2, 3/2) = π/2
        assert!((ln_beta(0.5, 1.5).exp() - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }
}
