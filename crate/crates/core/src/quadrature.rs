//! Gauss–Legendre rules and a few fixed quadrature helpers.

use std::f64::consts::PI;

use crate::linalg::C64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule on `[a, b]` with `panels` equal panels.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (&t, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(lo + 0.5 * width * (t + 1.0));
                ws.push(0.5 * width * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Trapezoid weights for an arbitrary ascending grid.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// `∫_{x0}^{x0+(len−1)h} f(t) e^{iωt} dt` for the piecewise-linear interpolant
/// of the uniform samples `f` (Filon-type rule, exact for the interpolant).
pub fn filon_linear(f: &[C64], x0: f64, h: f64, omega: f64) -> C64 {
    let n = f.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    let th = omega * h;
    // Per-panel weights for f_j (left) and f_{j+1} (right) on [0, h]:
    //   ∫_0^h (1 - s/h) e^{iωs} ds and ∫_0^h (s/h) e^{iωs} ds.
    let (wl, wr) = if th.abs() < 1e-3 {
        let t = C64::new(0.0, th);
        // Series in iθ to avoid cancellation.
        let wl = h * (0.5 + t / 6.0 + t * t / 24.0 + t * t * t / 120.0);
        let wr = h * (0.5 + t / 3.0 + t * t / 8.0 + t * t * t / 30.0);
        (wl, wr)
    } else {
        let e = C64::new(0.0, th).exp();
        let it = C64::new(0.0, th);
        // ∫_0^1 (1-u) e^{iθu} du = (e^{iθ} - 1 - iθ)/(iθ)^2
        // ∫_0^1 u e^{iθu} du     = (iθ e^{iθ} - e^{iθ} + 1)/(iθ)^2
        let wl = h * (e - 1.0 - it) / (it * it);
        let wr = h * (it * e - e + 1.0) / (it * it);
        (wl, wr)
    };
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n - 1 {
        let phase = C64::new(0.0, omega * (x0 + j as f64 * h)).exp();
        acc += phase * (wl * f[j] + wr * f[j + 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let s: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(s, 2.0 / 15.0, epsilon = 1e-14);
        let total: f64 = gl.weights.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_rule_integrates_exponential() {
        let gl = GaussLegendre::new(10);
        let (x, w) = gl.composite(0.0, 5.0, 5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (-2.0 * x).exp()).sum();
        assert_relative_eq!(s, (1.0 - (-10.0f64).exp()) / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn filon_is_exact_for_linear_functions() {
        let h = 0.1;
        let f: Vec<C64> = (0..31).map(|j| C64::new(1.0 + 2.0 * j as f64 * h, 0.0)).collect();
        for &omega in &[0.0, 1e-4, 3.0, 40.0] {
            let got = filon_linear(&f, 0.0, h, omega);
            // ∫_0^3 (1+2t) e^{iωt} dt
            let want = if omega < 1e-2 {
                // Taylor expansion in ω; the closed form cancels badly here
                C64::new(12.0 - 0.5 * omega * omega * 49.5, 22.5 * omega)
            } else {
                let iw = C64::new(0.0, omega);
                let e = (iw * 3.0).exp();
                (7.0 * e - 1.0) / iw - 2.0 * (e - 1.0) / (iw * iw)
            };
            assert!((got - want).norm() < 1e-9, "omega {omega}: {got} vs {want}");
        }
    }
}
