//! Chebyshev interpolants on an interval, with spectral differentiation and
//! antiderivatives, plus Gauss–Legendre rules for norm quadrature.

use std::f64::consts::PI;

use crate::C64;

/// `f(x) = c₀/2 + Σ_{j≥1} c_j T_j(t)` with `t = (2x − lo − hi)/(hi − lo)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cheb {
    pub lo: f64,
    pub hi: f64,
    pub c: Vec<C64>,
}

/// Chebyshev–Lobatto points `x_k`, `k = 0..=m`, in decreasing order.
pub(crate) fn lobatto(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (0..=m).map(|k| mid + half * (PI * k as f64 / m as f64).cos()).collect()
}

impl Cheb {
    /// Interpolant through values at [`lobatto`] points.
    pub fn from_values(lo: f64, hi: f64, vals: &[C64]) -> Self {
        let m = vals.len() - 1;
        let mut c = vec![C64::new(0.0, 0.0); m + 1];
        for (j, cj) in c.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (k, &v) in vals.iter().enumerate() {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                // cos(πjk/m) via reduction of jk mod 2m keeps the argument small.
                let r = (j * k) % (2 * m);
                s += v * (w * (PI * r as f64 / m as f64).cos());
            }
            *cj = s * (2.0 / m as f64);
        }
        c[m] *= 0.5;
        Self { lo, hi, c }
    }

    pub fn from_fn(lo: f64, hi: f64, m: usize, f: impl Fn(f64) -> C64) -> Self {
        let v: Vec<C64> = lobatto(lo, hi, m).into_iter().map(f).collect();
        Self::from_values(lo, hi, &v)
    }

    fn to_t(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> C64 {
        let t = self.to_t(x);
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &cj in self.c.iter().skip(1).rev() {
            let b0 = cj + b1 * (2.0 * t) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.c[0] * 0.5 + b1 * t - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.c.len();
        let mut d = vec![C64::new(0.0, 0.0); n + 1];
        for j in (1..n).rev() {
            d[j - 1] = d[j + 1] + self.c[j] * (2.0 * j as f64);
        }
        d.truncate(n.max(1));
        let scale = 2.0 / (self.hi - self.lo);
        Self { lo: self.lo, hi: self.hi, c: d.into_iter().map(|v| v * scale).collect() }
    }

    /// Antiderivative `F` with `F(x0) = 0`.
    pub fn antiderivative_from(&self, x0: f64) -> Self {
        let n = self.c.len();
        let at = |j: usize| if j < n { self.c[j] } else { C64::new(0.0, 0.0) };
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        for (j, cj) in c.iter_mut().enumerate().skip(1) {
            // c₀ enters the recurrence doubled-up under the halved convention.
            let prev = if j == 1 { self.c[0] } else { at(j - 1) };
            *cj = (prev - at(j + 1)) / (2.0 * j as f64);
        }
        let scale = 0.5 * (self.hi - self.lo);
        for v in c.iter_mut() {
            *v *= scale;
        }
        let mut f = Self { lo: self.lo, hi: self.hi, c };
        let shift = f.eval(x0);
        f.c[0] -= shift * 2.0;
        f
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` nodes.
pub(crate) fn composite_rule(lo: f64, hi: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(a + 0.5 * h * (ti + 1.0));
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> C64 {
        move |x| C64::new(f(x), 0.0)
    }

    #[test]
    fn calculus_on_smooth_functions() {
        let f = Cheb::from_fn(-1.0, 3.0, 48, re(|x: f64| (0.7 * x).sin() * x.exp()));
        for x in [-0.9f64, 0.0, 1.3, 2.9] {
            let want = (0.7 * x).sin() * x.exp();
            assert!((f.eval(x).re - want).abs() < 1e-12);
            let d = 0.7 * (0.7 * x).cos() * x.exp() + want;
            assert!((f.derivative().eval(x).re - d).abs() < 1e-10);
        }
        let g = Cheb::from_fn(0.0, 2.0, 32, re(|x: f64| x.cos()));
        let big_g = g.antiderivative_from(0.5);
        assert!(big_g.eval(0.5).norm() < 1e-15);
        assert!((big_g.eval(1.7).re - (1.7f64.sin() - 0.5f64.sin())).abs() < 1e-13);
    }

    #[test]
    fn legendre_rule_is_exact() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let (x, w) = composite_rule(0.0, 1.0, 5, 8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((s - (1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
