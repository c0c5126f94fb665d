//! Recovery of `Q(x) = −2 d/dx K(x,x)` and of the boundary matrix `U`.

use log::debug;

use crate::direct::ScatteringData;
use crate::error::{Error, Result};
use crate::grid::XGrid;
use crate::inverse::fourier::kernel_G;
use crate::inverse::marchenko::{marchenko_solve, nested_solve, truncation_length, NestedSolution, NystromRule};
use crate::linalg::{hermitian_eigen, hermiticity_residual, identity, polar_unitary, unitarity_residual, CMat, C64};
use crate::quadrature::filon_linear;

/// Relative mismatch of the 4th- and 2nd-order derivative estimates above
/// which the diagonal is considered too rough to differentiate.
pub const ROUGHNESS_LIMIT: f64 = 0.5;
/// Derivative magnitude treated as numerical noise by the roughness test.
const ROUGHNESS_FLOOR: f64 = 1e-6;
pub const PROBE_COUNT: usize = 5;
const DENOMINATOR_CONDITION: f64 = 1e12;

/// Fourth-order finite-difference derivative on a uniform grid.
fn derivative(f: &[CMat], h: f64) -> Vec<CMat> {
    let m = f.len();
    let s = C64::new(1.0 / (12.0 * h), 0.0);
    (0..m)
        .map(|i| {
            let d = if i >= 2 && i + 2 < m {
                -&f[i + 2] + f[i + 1].scale(8.0) - f[i - 1].scale(8.0) + &f[i - 2]
            } else if i < 2 {
                let o = if i == 0 { [-25.0, 48.0, -36.0, 16.0, -3.0] } else { [-3.0, -10.0, 18.0, -6.0, 1.0] };
                (0..5).fold(CMat::zeros(f[0].nrows(), f[0].ncols()), |acc, j| acc + f[j].scale(o[j]))
            } else {
                let o = if i == m - 1 { [25.0, -48.0, 36.0, -16.0, 3.0] } else { [3.0, 10.0, -18.0, 6.0, -1.0] };
                (0..5).fold(CMat::zeros(f[0].nrows(), f[0].ncols()), |acc, j| acc + f[m - 1 - j].scale(o[j]))
            };
            d * s
        })
        .collect()
}

fn derivative2(f: &[CMat], h: f64) -> Vec<CMat> {
    let m = f.len();
    (0..m)
        .map(|i| {
            let (a, b) = if i == 0 { (1, 0) } else if i == m - 1 { (m - 1, m - 2) } else { (i + 1, i - 1) };
            (&f[a] - &f[b]).scale(1.0 / ((a - b) as f64 * h))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PotentialRecovery {
    pub q: Vec<CMat>,
    /// Largest `‖Q − Q†‖_F` before symmetrization.
    pub asymmetry: f64,
    pub roughness: f64,
}

/// `Q = −2 d/dx K(x,x)` from diagonal samples on a uniform grid of spacing `h`.
pub fn recover_potential(diagonal: &[CMat], h: f64) -> Result<PotentialRecovery> {
    if diagonal.len() < 5 {
        return Err(Error::InvalidGrid("need at least five diagonal samples".into()));
    }
    let d4 = derivative(diagonal, h);
    let d2 = derivative2(diagonal, h);
    let (num, den) = d4
        .iter()
        .zip(&d2)
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - y).norm_squared(), b + x.norm_squared()));
    let roughness = (num / (den + d4.len() as f64 * ROUGHNESS_FLOOR.powi(2))).sqrt();
    if roughness > ROUGHNESS_LIMIT {
        return Err(Error::GridTooCoarse { roughness });
    }
    let mut asymmetry = 0.0_f64;
    let q = d4
        .into_iter()
        .map(|d| {
            let q = d.scale(-2.0);
            asymmetry = asymmetry.max(hermiticity_residual(&q));
            (&q + q.adjoint()).scale(0.5)
        })
        .collect();
    debug!("recover_potential: roughness {roughness:e}, asymmetry {asymmetry:e}");
    Ok(PotentialRecovery { q, asymmetry, roughness })
}

#[derive(Debug, Clone)]
pub struct BoundaryRecovery {
    pub u: CMat,
    /// Probe wavenumbers actually used.
    pub probes: Vec<f64>,
    /// Root-mean-square `‖U_p − U‖_F` over the probes.
    pub spread: f64,
}

/// Log-spaced probes in `[1, k_max/2]`, snapped to the nearest grid sample.
pub fn probe_indices(sd: &ScatteringData) -> Vec<usize> {
    let hi = 0.5 * sd.kgrid.k_max();
    let lo = 1.0_f64.min(hi);
    let mut idx: Vec<usize> = (0..PROBE_COUNT)
        .map(|p| {
            let k = lo * (hi / lo).powf(p as f64 / (PROBE_COUNT - 1) as f64);
            sd.kgrid.nearest(k)
        })
        .collect();
    idx.dedup();
    idx
}

fn fourier_pair(f: &[CMat], h: f64, k: f64) -> (CMat, CMat) {
    let n = f[0].nrows();
    let mut plus = CMat::zeros(n, n);
    let mut minus = CMat::zeros(n, n);
    let mut series = vec![C64::new(0.0, 0.0); f.len()];
    for r in 0..n {
        for c in 0..n {
            for (s, v) in series.iter_mut().zip(f) {
                *s = v[(r, c)];
            }
            plus[(r, c)] = filon_linear(&series, 0.0, h, k);
            minus[(r, c)] = filon_linear(&series, 0.0, h, -k);
        }
    }
    (plus, minus)
}

/// `U = (Ψ − iΨ_x)(Ψ + iΨ_x)⁻¹` from the scattered wave at `x = 0`, where
/// `Ψ(0,k) = I + S + ∫K(0,t)(e^{−ikt} + e^{ikt}S)dt` and `Ψ_x` follows from
/// `∂ₓK(0,·)`; averaged over probe frequencies and projected to a unitary.
pub fn recover_boundary(sd: &ScatteringData, kernel: &NestedSolution) -> Result<BoundaryRecovery> {
    let n = sd.n();
    let eye = identity(n);
    let h = kernel.h;
    let k00 = &kernel.row0[0];
    let mut samples = Vec::new();
    let mut probes = Vec::new();
    for idx in probe_indices(sd) {
        let k = sd.kgrid.values()[idx];
        let s = &sd.s[idx];
        let ik = C64::new(0.0, k);
        let (kp, km) = fourier_pair(&kernel.row0, h, k);
        let (kxp, kxm) = fourier_pair(&kernel.row0_x, h, k);
        let psi = &eye + s + km + kp * s;
        let psi_x = (s - &eye) * ik - k00 * (&eye + s) + kxm + kxp * s;
        let i = C64::new(0.0, 1.0);
        let den = &psi + &psi_x * i;
        let sv = den.clone().singular_values();
        let cond = sv.max() / sv.min();
        if !(cond < DENOMINATOR_CONDITION) {
            debug!("recover_boundary: skipping probe k = {k} (condition {cond:e})");
            continue;
        }
        let u = (&psi - &psi_x * i) * den.try_inverse().ok_or(Error::SingularDenominator)?;
        samples.push(u);
        probes.push(k);
    }
    if samples.is_empty() {
        return Err(Error::SingularDenominator);
    }
    let mean = samples.iter().fold(CMat::zeros(n, n), |a, u| a + u) / C64::new(samples.len() as f64, 0.0);
    let u = polar_unitary(&mean);
    let spread = (samples.iter().map(|s| (s - &u).norm_squared()).sum::<f64>() / samples.len() as f64).sqrt();
    Ok(BoundaryRecovery { u, probes, spread })
}

#[derive(Debug, Clone)]
pub enum KernelMethod {
    /// One trapezoid factorization for all `x` (second order in the grid spacing).
    Nested,
    /// Independent Gauss–Legendre solve at each `x`; the boundary row still
    /// comes from the nested solver.
    GaussLegendre(NystromRule),
}

#[derive(Debug, Clone)]
pub struct InverseOptions {
    pub method: KernelMethod,
    /// Admissibility screen on `‖S†S − I‖_F`.
    pub unitarity_tolerance: f64,
    /// Lower bound for the truncation length `T`.
    pub support_estimate: f64,
    /// Skipping the screen lets suspect data through to the solver.
    pub screen: bool,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { method: KernelMethod::Nested, unitarity_tolerance: 1e-6, support_estimate: 0.0, screen: true }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// `max ‖G(t) − G(t)†‖_F` before symmetrization.
    pub g_asymmetry: f64,
    /// `max ‖(S⁻¹ − Û) − (S − Û)†‖_F` on the grid.
    pub extension_asymmetry: f64,
    pub marchenko_residual: f64,
    pub condition: f64,
    pub q_asymmetry: f64,
    pub roughness: f64,
    pub boundary_spread: f64,
    pub probes: Vec<f64>,
    pub truncation: f64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub x: Vec<f64>,
    pub q: Vec<CMat>,
    pub u: CMat,
    pub diagnostics: Diagnostics,
}

/// Rejects data that cannot come from an admissible `(Q, U)` pair.
pub fn screen_data(sd: &ScatteringData, unitarity_tolerance: f64) -> Result<()> {
    let n = sd.n();
    if sd.s.len() != sd.kgrid.len() || sd.s.iter().any(|s| s.nrows() != n || s.ncols() != n) {
        return Err(Error::ShapeMismatch("S samples do not match the k-grid and Uhat".into()));
    }
    let worst = sd.max_unitarity_residual();
    if !(worst <= unitarity_tolerance) {
        return Err(Error::Inadmissible(format!("S is not unitary (residual {worst:e})")));
    }
    for b in &sd.bound_states {
        if !(b.kappa > 0.0) {
            return Err(Error::Inadmissible(format!("kappa = {} is not positive", b.kappa)));
        }
        if b.c.nrows() != n || b.c.ncols() != n {
            return Err(Error::ShapeMismatch("normalization matrix size".into()));
        }
        if hermiticity_residual(&b.c) > 1e-8 * (1.0 + b.c.norm()) {
            return Err(Error::Inadmissible("normalization matrix is not hermitian".into()));
        }
        let (vals, _) = hermitian_eigen(&b.c);
        if vals[0] < -1e-8 * (1.0 + b.c.norm()) {
            return Err(Error::Inadmissible("normalization matrix is not nonnegative".into()));
        }
    }
    if unitarity_residual(&sd.uhat) > 1e-8 || hermiticity_residual(&sd.uhat) > 1e-8 {
        return Err(Error::Inadmissible("Uhat must be a hermitian unitary".into()));
    }
    Ok(())
}

/// The complete inverse pipeline on the uniform grid `xgrid`.
pub fn invert_full(sd: &ScatteringData, xgrid: &XGrid, opts: &InverseOptions) -> Result<ReconstructionResult> {
    if opts.screen {
        screen_data(sd, opts.unitarity_tolerance)?;
    }
    let g = kernel_G(sd)?;
    let h = xgrid.spacing();
    let t = truncation_length(&g, opts.support_estimate.max(xgrid.x_max()));
    let m = (t / h - 1e-9).ceil() as usize;
    let nested = nested_solve(&g, h, m)?;
    let g_asymmetry = (0..=2 * m).map(|l| hermiticity_residual(&g.eval_raw(l as f64 * h))).fold(0.0, f64::max);
    let x = xgrid.values();
    let (diagonal, residual) = match &opts.method {
        KernelMethod::Nested => (nested.diagonal[..x.len()].to_vec(), nested.residual),
        KernelMethod::GaussLegendre(rule) => {
            let t_max = m as f64 * h;
            let mut worst = 0.0_f64;
            let mut diag = Vec::with_capacity(x.len());
            for &xi in &x {
                if xi >= t_max {
                    diag.push(-g.eval(2.0 * xi));
                    continue;
                }
                let row = marchenko_solve(&g, xi, t_max, rule)?;
                worst = worst.max(row.residual);
                let k = row.eval(&g, xi);
                diag.push((&k + k.adjoint()).scale(0.5));
            }
            (diag, worst)
        }
    };
    let pot = recover_potential(&diagonal, h)?;
    let bnd = recover_boundary(sd, &nested)?;
    Ok(ReconstructionResult {
        x,
        q: pot.q,
        u: bnd.u,
        diagnostics: Diagnostics {
            g_asymmetry,
            extension_asymmetry: g.extension_asymmetry,
            marchenko_residual: residual,
            condition: nested.condition,
            q_asymmetry: pot.asymmetry,
            roughness: pot.roughness,
            boundary_spread: bnd.spread,
            probes: bnd.probes,
            truncation: m as f64 * h,
        },
    })
}

/// `‖a − b‖₂ / ‖b‖₂` with the Frobenius norm per sample (uniform weights).
pub fn relative_l2_error(a: &[CMat], b: &[CMat]) -> f64 {
    let (num, den) = a
        .iter()
        .zip(b)
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - y).norm_squared(), d + y.norm_squared()));
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryCondition;
    use crate::direct::compute_scattering_data;
    use crate::grid::KGrid;
    use crate::potential::PotentialSpec;

    #[test]
    fn zero_kernel_gives_zero_potential() {
        let diag = vec![CMat::zeros(2, 2); 20];
        let r = recover_potential(&diag, 0.1).unwrap();
        assert!(r.q.iter().all(|q| q.norm() == 0.0));
    }

    #[test]
    fn differentiates_reflectionless_diagonal() {
        let (kappa, gamma) = (1.0, 2.0);
        let kdiag = |x: f64| -gamma * (-2.0 * kappa * x).exp() / (1.0 + gamma * (-2.0 * kappa * x).exp() / (2.0 * kappa));
        // d/dx of kdiag by hand: with e = e^{−2κx}, K = −γe/(1 + γe/2κ), dK/dx = 2κγe/(1 + γe/2κ)²
        let dk = |x: f64| {
            let e = (-2.0 * kappa * x).exp();
            2.0 * kappa * gamma * e / (1.0 + gamma * e / (2.0 * kappa)).powi(2)
        };
        let h = 0.01;
        let diag: Vec<CMat> = (0..500).map(|i| CMat::from_element(1, 1, C64::new(kdiag(i as f64 * h), 0.0))).collect();
        let r = recover_potential(&diag, h).unwrap();
        for (i, q) in r.q.iter().enumerate() {
            assert!((q[0].re + 2.0 * dk(i as f64 * h)).abs() < 1e-6, "{i}");
        }
    }

    #[test]
    fn noisy_diagonal_is_rejected() {
        let diag: Vec<CMat> = (0..50)
            .map(|i| CMat::from_element(1, 1, C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)))
            .collect();
        assert!(matches!(recover_potential(&diag, 0.1), Err(Error::GridTooCoarse { .. })));
    }

    fn free_data(bc: &BoundaryCondition) -> ScatteringData {
        compute_scattering_data(&PotentialSpec::zero(bc.n()), bc, &KGrid::uniform(40.0, 800).unwrap()).unwrap()
    }

    #[test]
    fn free_boundary_conditions_are_recovered() {
        for bc in [BoundaryCondition::dirichlet(2), BoundaryCondition::neumann(2), BoundaryCondition::robin(0.5)] {
            let sd = free_data(&bc);
            let res = invert_full(&sd, &XGrid::new(5.0, 101).unwrap(), &InverseOptions::default()).unwrap();
            assert!((&res.u - bc.u()).norm() < 1e-6, "{}", res.u);
            let qmax = res.q.iter().map(|q| q.norm()).fold(0.0, f64::max);
            assert!(qmax < 1e-6, "{qmax:e}");
        }
    }

    #[test]
    fn attractive_robin_round_trip_is_free() {
        let bc = BoundaryCondition::robin(-2.0);
        let sd = free_data(&bc);
        assert_eq!(sd.bound_states.len(), 1);
        let res = invert_full(&sd, &XGrid::new(5.0, 201).unwrap(), &InverseOptions::default()).unwrap();
        assert!((&res.u - bc.u()).norm() < 1e-4, "{}", res.u);
        assert!(res.q.iter().all(|q| q.norm() < 1e-3));
    }
}
