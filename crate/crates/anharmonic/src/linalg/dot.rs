//! Error-free transformations for inner products whose result is tiny
//! compared to the summands (biorthogonal overlaps of non-normal modes).

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedDot {
    pub value: C64,
    /// Bound on |value − exact|, where exact is the inner product of the stored doubles.
    pub error_bound: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Real compensated accumulator (Ogita-Rump-Oishi Dot2).
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    s: f64,
    c: f64,
}

impl Acc {
    #[inline]
    fn add_prod(&mut self, a: f64, b: f64) {
        let (p, ep) = two_prod(a, b);
        let (s, es) = two_sum(self.s, p);
        self.s = s;
        self.c += ep + es;
    }
    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// `Σ conj(y_i) x_i` evaluated as if in twice the working precision.
pub fn compensated_dot(x: &[C64], y: &[C64]) -> CompensatedDot {
    assert_eq!(x.len(), y.len(), "compensated_dot needs equal lengths");
    let mut re = Acc::default();
    let mut im = Acc::default();
    let mut abs_sum = 0.0;
    for (a, b) in x.iter().zip(y) {
        // conj(b) a = (br ar + bi ai) + i (br ai − bi ar)
        re.add_prod(b.re, a.re);
        re.add_prod(b.im, a.im);
        im.add_prod(b.re, a.im);
        im.add_prod(-b.im, a.re);
        abs_sum += (b.re * a.re).abs() + (b.im * a.im).abs() + (b.re * a.im).abs() + (b.im * a.re).abs();
    }
    let value = C64::new(re.value(), im.value());
    let u = f64::EPSILON / 2.0;
    let m = 2.0 * x.len() as f64;
    let gamma = m * u / (1.0 - m * u);
    let error_bound = u * value.norm() * std::f64::consts::SQRT_2 + 2.0 * gamma * gamma * abs_sum;
    CompensatedDot { value, error_bound }
}
