//! The smooth plateau `h`: equal to 1 on `[-1, 1]`, 0 outside `(-2, 2)`,
//! built from the bump `E(t) = exp(−1/(1 − 4t²))` on `|t| < 1/2`.

use super::cheb::composite_rule;

fn bump(s: f64) -> f64 {
    let d = 1.0 - 4.0 * s * s;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

fn bump_prime(s: f64) -> f64 {
    let d = 1.0 - 4.0 * s * s;
    if d <= 0.0 {
        0.0
    } else {
        bump(s) * (-8.0 * s / (d * d))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Plateau {
    norm: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Plateau {
    pub fn new() -> Self {
        // Reference rule on [0, 1]; rescaled per call.
        let (nodes, weights) = composite_rule(0.0, 1.0, 16, 20);
        let mut p = Self { norm: 1.0, nodes, weights };
        p.norm = p.integral(0.5);
        p
    }

    /// `∫_{-1/2}^{u} E`.
    fn integral(&self, u: f64) -> f64 {
        let len = u + 0.5;
        if len <= 0.0 {
            return 0.0;
        }
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * len * bump(-0.5 + len * t)).sum()
    }

    /// `(h, h′, h″)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let ax = x.abs();
        if ax <= 1.0 {
            return (1.0, 0.0, 0.0);
        }
        if ax >= 2.0 {
            return (0.0, 0.0, 0.0);
        }
        let s = 1.5 - ax;
        let h = self.integral(s) / self.norm;
        let h1 = bump(s) / self.norm;
        let h2 = bump_prime(s) / self.norm;
        (h, -x.signum() * h1, h2)
    }
}
