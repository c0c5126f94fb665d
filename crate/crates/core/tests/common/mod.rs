#![allow(dead_code)]

use std::f64::consts::PI;

use marchenko::{Bump, CMat, PotentialSpec, C64};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::StandardNormal;

/// `V diag(e^{iθ_j}) V†` with Haar `V` and `θ_j` uniform in `[−2π/3, 2π/3]`,
/// which keeps every channel away from the Dirichlet phase.
pub fn random_unitary(rng: &mut StdRng, n: usize) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = z.qr();
    let r = qr.r();
    let mut v = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            v[(i, j)] *= ph;
        }
    }
    let phases = DVector::from_fn(n, |_, _| C64::new(0.0, rng.random_range(-2.0 * PI / 3.0..2.0 * PI / 3.0)).exp());
    &v * CMat::from_diagonal(&phases) * v.adjoint()
}

/// Smooth 2×2 hermitian bump supported in `[0.3, 2.7]`.
pub fn bump_2x2() -> PotentialSpec {
    let amplitude = CMat::from_row_slice(
        2,
        2,
        &[C64::new(-3.0, 0.0), C64::new(1.0, 0.5), C64::new(1.0, -0.5), C64::new(1.5, 0.0)],
    );
    PotentialSpec::bumps(vec![Bump { amplitude, center: 1.5, half_width: 1.2 }]).unwrap()
}

/// Bound states `κ` of the Dirichlet well `−v0` on `[0, a)`: roots of
/// `q cos(qa) + κ sin(qa) = 0`, `q = √(v0 − κ²)`, by bracketing and bisection.
pub fn square_well_roots(v0: f64, a: f64) -> Vec<f64> {
    let f = |k: f64| {
        let q = (v0 - k * k).max(0.0).sqrt();
        q * (q * a).cos() + k * (q * a).sin()
    };
    let top = v0.sqrt();
    let m = 100_000;
    let mut roots = Vec::new();
    for i in 0..m {
        let mut lo = top * (i as f64 + 1e-9) / m as f64;
        let mut hi = top * ((i + 1) as f64 / m as f64) * (1.0 - 1e-15);
        if f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// Diagonal `K(x,x)` of the one-bound-state reflectionless kernel.
pub fn reflectionless_kernel(kappa: f64, gamma: f64, x: f64, y: f64) -> f64 {
    -gamma * (-kappa * (x + y)).exp() / (1.0 + gamma * (-2.0 * kappa * x).exp() / (2.0 * kappa))
}

/// `Q = −2 d/dx K(x,x)` for the kernel above, differentiated by hand.
pub fn reflectionless_potential(kappa: f64, gamma: f64, x: f64) -> f64 {
    let e = (-2.0 * kappa * x).exp();
    -4.0 * kappa * gamma * e / (1.0 + gamma * e / (2.0 * kappa)).powi(2)
}
