//! The Marchenko kernel `G(t) = Σ C_l² e^{−κ_l t} + (1/2π)∫(S(k) − Û)e^{ikt} dk`.
//!
//! The continuous part splits `X = S − Û` into a rational tail model
//! `Σ E_m (a + ik)^{−m}`, whose transform is known in closed form, and a
//! rapidly decaying residual integrated by the trapezoid rule on the symmetric
//! grid `[−k_max, k_max]` with a raised-cosine taper near the ends.

use std::f64::consts::PI;

use log::debug;
use nalgebra::DMatrix;

use crate::direct::{BoundStateData, ScatteringData};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, CMat, C64};

/// Largest admissible `‖S(k_max) − Û‖_F`.
pub const DECAY_THRESHOLD: f64 = 0.3;
/// Fraction of the k-range covered by the end taper.
pub const TAPER_FRACTION: f64 = 0.1;
const TAIL_ORDER: usize = 8;
const TAIL_SHIFT: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct GFunction {
    n: usize,
    bound: Vec<(f64, CMat)>,
    /// Tail coefficients `E_1..E_M`.
    tail: Vec<CMat>,
    /// `(k_j, w_j R(k_j), w_j R(−k_j))`, weights include the taper and `1/2π`.
    residual: Vec<(f64, CMat, CMat)>,
    /// Largest `‖X(−k) − X(k)†‖_F` seen while extending the data to `k < 0`.
    pub extension_asymmetry: f64,
}

fn taper(k: f64, k_max: f64) -> f64 {
    let start = (1.0 - TAPER_FRACTION) * k_max;
    if k <= start {
        1.0
    } else {
        0.5 * (1.0 + (PI * (k - start) / (k_max - start)).cos())
    }
}

fn basis(m: usize, k: f64) -> C64 {
    C64::new(TAIL_SHIFT, k).powi(-(m as i32))
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|j| j as f64).product()
}

/// Least-squares fit of `Σ_m e_m r_m(k)` to the entries `(a, b)` and `(b, a)`
/// of `X` over the samples `idx`, with `E_ab = α + iβ`, `E_ba = α − iβ` so
/// that every `E_m` is hermitian.
fn fit_pair(k: &[f64], x: &[CMat], a: usize, b: usize, idx: &[usize], order: usize) -> Option<Vec<C64>> {
    let rows = idx.len();
    let unknowns = if a == b { order } else { 2 * order };
    let eqs = if a == b { 2 * rows } else { 4 * rows };
    let scale: Vec<f64> =
        (1..=order).map(|m| idx.iter().map(|&j| basis(m, k[j]).norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut mat = DMatrix::<f64>::zeros(eqs, unknowns);
    let mut rhs = DMatrix::<f64>::zeros(eqs, 1);
    let o = 2 * rows;
    for (q, &j) in idx.iter().enumerate() {
        for m in 0..order {
            let v = basis(m + 1, k[j]) / scale[m];
            mat[(2 * q, m)] = v.re;
            mat[(2 * q + 1, m)] = v.im;
            if a != b {
                mat[(2 * q, order + m)] = -v.im;
                mat[(2 * q + 1, order + m)] = v.re;
                mat[(o + 2 * q, m)] = v.re;
                mat[(o + 2 * q + 1, m)] = v.im;
                mat[(o + 2 * q, order + m)] = v.im;
                mat[(o + 2 * q + 1, order + m)] = -v.re;
            }
        }
        rhs[(2 * q, 0)] = x[j][(a, b)].re;
        rhs[(2 * q + 1, 0)] = x[j][(a, b)].im;
        if a != b {
            rhs[(o + 2 * q, 0)] = x[j][(b, a)].re;
            rhs[(o + 2 * q + 1, 0)] = x[j][(b, a)].im;
        }
    }
    let svd = mat.svd(true, true);
    let cut = 1e-13 * svd.singular_values.max();
    let sol = svd.solve(&rhs, cut).ok()?;
    Some(
        (0..order)
            .map(|m| {
                let beta = if a == b { 0.0 } else { sol[(order + m, 0)] };
                C64::new(sol[(m, 0)], beta) / scale[m]
            })
            .collect(),
    )
}

fn pair_misfit(k: &[f64], x: &[CMat], a: usize, b: usize, idx: &[usize], coef: &[C64]) -> f64 {
    idx.iter()
        .map(|&j| {
            let model: C64 = coef.iter().enumerate().map(|(m, e)| e * basis(m + 1, k[j])).sum();
            let mut d = (x[j][(a, b)] - model).norm_sqr();
            if a != b {
                let model_t: C64 = coef.iter().enumerate().map(|(m, e)| e.conj() * basis(m + 1, k[j])).sum();
                d += (x[j][(b, a)] - model_t).norm_sqr();
            }
            d
        })
        .sum()
}

/// Fits hermitian tail coefficients entry pair by entry pair on
/// `[k_max/2, k_max]`. The order is chosen per pair by fitting on
/// `[k_max/2, 0.85 k_max]` and scoring the extrapolation to the rest of the
/// range, which rejects models that chase oscillatory terms.
fn fit_tail(k: &[f64], x: &[CMat], n: usize) -> Vec<CMat> {
    let k_max = *k.last().unwrap();
    let idx: Vec<usize> = (0..k.len()).filter(|&j| k[j] >= 0.5 * k_max).collect();
    let split = 0.85 * k_max;
    let train: Vec<usize> = idx.iter().copied().filter(|&j| k[j] <= split).collect();
    let test: Vec<usize> = idx.iter().copied().filter(|&j| k[j] > split).collect();
    let max_order = TAIL_ORDER.min(train.len() / 4);
    if max_order == 0 || test.is_empty() {
        return Vec::new();
    }
    let mut tail = vec![CMat::zeros(n, n); max_order];
    for a in 0..n {
        for b in a..n {
            let mut best = (0, pair_misfit(k, x, a, b, &test, &[]));
            for order in 1..=max_order {
                if let Some(c) = fit_pair(k, x, a, b, &train, order) {
                    let e = pair_misfit(k, x, a, b, &test, &c);
                    if e < best.1 {
                        best = (order, e);
                    }
                }
            }
            if best.0 == 0 {
                continue;
            }
            let Some(coef) = fit_pair(k, x, a, b, &idx, best.0) else { continue };
            for (m, e) in coef.into_iter().enumerate() {
                tail[m][(a, b)] = e;
                tail[m][(b, a)] = e.conj();
            }
        }
    }
    tail
}

fn tail_value(tail: &[CMat], k: f64) -> CMat {
    let n = tail.first().map_or(0, |e| e.nrows());
    let mut out = CMat::zeros(n, n);
    for (m, e) in tail.iter().enumerate() {
        out += e * basis(m + 1, k);
    }
    out
}

/// Lagrange interpolation to `k = 0` through `k_1..k_4` and their mirror
/// images, using the extension of `X` to negative `k`.
fn interpolate_at_zero(k: &[f64], plus: &[CMat], minus: &[CMat]) -> CMat {
    let p = k.len().min(4);
    let pts: Vec<(f64, &CMat)> = (0..p).map(|j| (k[j], &plus[j])).chain((0..p).map(|j| (-k[j], &minus[j]))).collect();
    let mut out = CMat::zeros(plus[0].nrows(), plus[0].ncols());
    for (i, (ki, fi)) in pts.iter().enumerate() {
        let l: f64 = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (kj, _))| kj / (kj - ki))
            .product();
        out += fi.scale(l);
    }
    out
}

impl GFunction {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound_states(&self) -> &[(f64, CMat)] {
        &self.bound
    }

    /// `G(t)` for `t ≥ 0` (right limit at `t = 0`), before hermitization.
    pub fn eval_raw(&self, t: f64) -> CMat {
        let mut g = CMat::zeros(self.n, self.n);
        for (kappa, c2) in &self.bound {
            g += c2.scale((-kappa * t).exp());
        }
        let decay = (-TAIL_SHIFT * t).exp();
        for (m, e) in self.tail.iter().enumerate() {
            g += e.scale(t.powi(m as i32) * decay / factorial(m));
        }
        for (k, rp, rm) in &self.residual {
            let ph = C64::new(0.0, k * t).exp();
            g += rp * ph + rm * ph.conj();
        }
        g
    }

    pub fn eval(&self, t: f64) -> CMat {
        hermitian_part(&self.eval_raw(t))
    }

    /// `G'(t)` for `t > 0`.
    pub fn eval_derivative(&self, t: f64) -> CMat {
        let mut g = CMat::zeros(self.n, self.n);
        for (kappa, c2) in &self.bound {
            g -= c2.scale(kappa * (-kappa * t).exp());
        }
        let decay = (-TAIL_SHIFT * t).exp();
        for (m, e) in self.tail.iter().enumerate() {
            let mut d = -TAIL_SHIFT * t.powi(m as i32);
            if m > 0 {
                d += m as f64 * t.powi(m as i32 - 1);
            }
            g += e.scale(d * decay / factorial(m));
        }
        for (k, rp, rm) in &self.residual {
            let ph = C64::new(0.0, k * t).exp();
            let ik = C64::new(0.0, *k);
            g += (rp * ph - rm * ph.conj()) * ik;
        }
        hermitian_part(&g)
    }

    /// `G` built from the bound-state sum alone.
    pub fn from_bound_states(n: usize, bound_states: &[BoundStateData]) -> Self {
        Self {
            n,
            bound: bound_states.iter().map(|b| (b.kappa, b.c_squared())).collect(),
            tail: Vec::new(),
            residual: Vec::new(),
            extension_asymmetry: 0.0,
        }
    }
}

/// Builds `G` from scattering data; see the module documentation.
#[allow(non_snake_case)]
pub fn kernel_G(sd: &ScatteringData) -> Result<GFunction> {
    let n = sd.n();
    let gap = sd.asymptote_gap();
    if !(gap <= DECAY_THRESHOLD) {
        return Err(Error::InsufficientDecay { residual: gap });
    }
    let k = sd.kgrid.values();
    if k.len() < 3 {
        return Err(Error::InvalidGrid("need at least three k samples".into()));
    }
    let k_max = *k.last().unwrap();
    let x_plus: Vec<CMat> = sd.s.iter().map(|s| s - &sd.uhat).collect();
    let mut x_minus = Vec::with_capacity(k.len());
    let mut asym = 0.0_f64;
    for (s, xp) in sd.s.iter().zip(&x_plus) {
        let inv = s.clone().try_inverse().ok_or(Error::Inadmissible("S(k) is singular".into()))?;
        let xm = inv - &sd.uhat;
        asym = asym.max((&xm - xp.adjoint()).norm());
        x_minus.push(xm);
    }
    debug!("kernel_G: max |X(-k) - X(k)^*| = {asym:e}");

    let tail = fit_tail(k, &x_plus, n);
    let mut nodes = Vec::with_capacity(k.len() + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(k);
    let mut rp = Vec::with_capacity(nodes.len());
    let mut rm = Vec::with_capacity(nodes.len());
    let x0 = interpolate_at_zero(k, &x_plus, &x_minus) - tail_value(&tail, 0.0);
    rp.push(x0.clone());
    rm.push(x0);
    for (j, &kj) in k.iter().enumerate() {
        rp.push(&x_plus[j] - tail_value(&tail, kj));
        rm.push(&x_minus[j] - tail_value(&tail, -kj));
    }
    let mut residual = Vec::with_capacity(nodes.len());
    for j in 0..nodes.len() {
        let left = if j == 0 { 0.0 } else { nodes[j] - nodes[j - 1] };
        let right = if j + 1 == nodes.len() { 0.0 } else { nodes[j + 1] - nodes[j] };
        // k = 0 gets half weight on each side of the symmetric grid
        let w = 0.5 * (left + right) * taper(nodes[j], k_max) / (2.0 * PI);
        if rp[j].iter().chain(rm[j].iter()).any(|v| *v != C64::new(0.0, 0.0)) {
            residual.push((nodes[j], rp[j].scale(w), rm[j].scale(w)));
        }
    }
    let tail_rms = {
        let (s, c) = k
            .iter()
            .zip(&rp[1..])
            .filter(|(kj, _)| **kj >= 0.5 * k_max)
            .fold((0.0, 0usize), |(s, c), (_, r)| (s + r.norm_squared(), c + 1));
        (s / c.max(1) as f64).sqrt()
    };
    debug!("kernel_G: tail order {}, rms fit residual {tail_rms:e}", tail.len());

    Ok(GFunction {
        n,
        bound: sd.bound_states.iter().map(|b| (b.kappa, b.c_squared())).collect(),
        tail,
        residual,
        extension_asymmetry: asym,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::KGrid;
    use crate::linalg::identity;

    fn data(s: impl Fn(f64) -> CMat, uhat: CMat, bs: Vec<BoundStateData>) -> ScatteringData {
        let kgrid = KGrid::uniform(40.0, 800).unwrap();
        let s = kgrid.values().iter().map(|&k| s(k)).collect();
        ScatteringData { kgrid, s, uhat, bound_states: bs }
    }

    #[test]
    fn free_dirichlet_gives_zero() {
        let sd = data(|_| -identity(2), -identity(2), vec![]);
        let g = kernel_G(&sd).unwrap();
        for t in [0.0, 0.3, 5.0] {
            assert!(g.eval(t).norm() < 1e-14);
        }
    }

    #[test]
    fn bound_state_only() {
        let c = CMat::from_element(1, 1, C64::new(2f64.sqrt(), 0.0));
        let sd = data(|_| identity(1), identity(1), vec![BoundStateData { kappa: 1.0, c }]);
        let g = kernel_G(&sd).unwrap();
        for t in [0.0, 0.7, 3.0] {
            assert!((g.eval(t)[0].re - 2.0 * (-t).exp()).abs() < 1e-14);
            assert!((g.eval_derivative(t)[0].re + 2.0 * (-t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn attractive_robin_bound_state_cancels_continuum() {
        let h = -2.0;
        let s = move |k: f64| CMat::from_element(1, 1, (C64::new(h, k)) / C64::new(-h, k));
        let c = CMat::from_element(1, 1, C64::new(2.0, 0.0));
        let sd = data(s, identity(1), vec![BoundStateData { kappa: 2.0, c }]);
        let g = kernel_G(&sd).unwrap();
        for t in [0.05, 0.5, 2.0, 10.0] {
            assert!(g.eval(t).norm() < 1e-5, "t={t}: {}", g.eval(t));
        }
    }

    #[test]
    fn repulsive_robin_continuum_transform() {
        // S − 1 = 2h/(ik − h) has its pole in the lower half-plane: zero for t > 0
        let h = 3.0;
        let s = move |k: f64| CMat::from_element(1, 1, C64::new(h, k) / C64::new(-h, k));
        let sd = data(s, identity(1), vec![]);
        let g = kernel_G(&sd).unwrap();
        for t in [0.1, 1.0, 4.0] {
            assert!(g.eval(t).norm() < 1e-5, "t={t}: {}", g.eval(t));
        }
    }

    #[test]
    fn insufficient_decay_is_reported() {
        let sd = data(|_| identity(1), -identity(1), vec![]);
        assert!(matches!(kernel_G(&sd), Err(Error::InsufficientDecay { .. })));
    }
}
