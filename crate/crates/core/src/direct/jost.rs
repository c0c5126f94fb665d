//! Jost solutions `F(x,k) → e^{ikx} I` and the Jost functions `F(0,±k)`.

use crate::error::{Error, Result};
use crate::linalg::{identity, CMat, C64, I};
use crate::ode::{Propagator, DEFAULT_RTOL};
use crate::potential::PotentialSpec;

/// Distance past the support where backward integration starts.
pub const START_MARGIN: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct JostSamples {
    pub x: Vec<f64>,
    pub f: Vec<CMat>,
    pub fx: Vec<CMat>,
}

fn free_values(n: usize, k: C64, x: f64) -> (CMat, CMat) {
    let e = (I * k * x).exp();
    (identity(n) * e, identity(n) * (I * k * e))
}

fn split_state(n: usize, cols: usize, y: &[C64]) -> (CMat, CMat) {
    let blk = n * cols;
    (CMat::from_column_slice(n, cols, &y[..blk]), CMat::from_column_slice(n, cols, &y[blk..]))
}

/// `F(x,k)` and `F_x(x,k)` at each point of `x_eval` (any order), for `Im k ≥ 0`.
pub fn jost_solution(p: &PotentialSpec, k: C64, x_eval: &[f64]) -> Result<JostSamples> {
    if k.im < 0.0 {
        return Err(Error::UnsupportedK { im: k.im });
    }
    if x_eval.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidGrid("Jost solution evaluated at x < 0".into()));
    }
    let n = p.n();
    let support = p.support_bound();
    let mut order: Vec<usize> = (0..x_eval.len()).collect();
    order.sort_by(|&a, &b| x_eval[b].partial_cmp(&x_eval[a]).unwrap());

    let mut f = vec![CMat::zeros(n, n); x_eval.len()];
    let mut fx = vec![CMat::zeros(n, n); x_eval.len()];

    let x_start = support + START_MARGIN;
    let (f0, fx0) = free_values(n, k, x_start);
    let mut y: Vec<C64> = f0.iter().chain(fx0.iter()).copied().collect();
    let mut x_cur = x_start;
    let mut prop = Propagator::new(p, k, n, DEFAULT_RTOL);
    for idx in order {
        let x = x_eval[idx];
        if x >= support {
            let (a, b) = free_values(n, k, x);
            f[idx] = a;
            fx[idx] = b;
            continue;
        }
        prop.propagate(x_cur, &mut y, x)?;
        x_cur = x;
        let (a, b) = split_state(n, n, &y);
        f[idx] = a;
        fx[idx] = b;
    }
    Ok(JostSamples { x: x_eval.to_vec(), f, fx })
}

/// Jost function pair `(F(0,k), F_x(0,k))`.
pub fn jost_at_origin(p: &PotentialSpec, k: C64) -> Result<(CMat, CMat)> {
    let s = jost_solution(p, k, &[0.0])?;
    Ok((s.f[0].clone(), s.fx[0].clone()))
}

/// Jost functions at `±k` for real `k ≠ 0`: `F±(k) = F(0, ±k)`.
#[derive(Debug, Clone)]
pub struct JostData {
    pub k: f64,
    pub f_plus: CMat,
    pub fx_plus: CMat,
    pub f_minus: CMat,
    pub fx_minus: CMat,
}

impl JostData {
    pub fn compute(p: &PotentialSpec, k: f64) -> Result<Self> {
        let (f_plus, fx_plus) = jost_at_origin(p, C64::new(k, 0.0))?;
        let (f_minus, fx_minus) = jost_at_origin(p, C64::new(-k, 0.0))?;
        Ok(Self { k, f_plus, fx_plus, f_minus, fx_minus })
    }

    pub fn n(&self) -> usize {
        self.f_plus.nrows()
    }
}

/// Residuals of the four Jost-function identities at real `k`, each divided by `2|k|`:
///
/// ```text
/// F₋ F₋,ₓ† − F₊ F₊,ₓ† = 2ik I      F₊,ₓ F₊† − F₋,ₓ F₋† = 2ik I
/// F₋,ₓ F₋,ₓ† − F₊,ₓ F₊,ₓ† = 0      F₋ F₋† − F₊ F₊† = 0
/// ```
pub fn jost_identity_residuals(jd: &JostData) -> [f64; 4] {
    let n = jd.n();
    let two_ik = identity(n) * C64::new(0.0, 2.0 * jd.k);
    let scale = 2.0 * jd.k.abs();
    let (fp, fpx, fm, fmx) = (&jd.f_plus, &jd.fx_plus, &jd.f_minus, &jd.fx_minus);
    let r1 = fm * fmx.adjoint() - fp * fpx.adjoint() - &two_ik;
    let r2 = fpx * fp.adjoint() - fmx * fm.adjoint() - &two_ik;
    let r3 = fmx * fmx.adjoint() - fpx * fpx.adjoint();
    let r4 = fm * fm.adjoint() - fp * fp.adjoint();
    [r1.norm() / scale, r2.norm() / scale, r3.norm() / scale, r4.norm() / scale]
}

/// Matrix Wronskian `W{Φ†, Ψ} = Φ†Ψ_x − Φ†_xΨ` for samples at a real `k`.
pub fn wronskian(phi: &CMat, phi_x: &CMat, psi: &CMat, psi_x: &CMat) -> CMat {
    phi.adjoint() * psi_x - phi_x.adjoint() * psi
}
