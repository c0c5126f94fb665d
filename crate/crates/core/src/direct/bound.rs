//! Bound states `k_l = iκ_l`: zeros of `det M₋(k)` on the positive imaginary
//! axis, their eigenprojectors and normalization matrices.

use crate::boundary::BoundaryCondition;
use crate::direct::jost::{jost_at_origin, jost_solution};
use crate::direct::scattering::m_minus_at;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hpd_inv_sqrt, identity, null_projector_abs, singular_values, CMat, C64};
use crate::potential::PotentialSpec;
use crate::quadrature::GaussLegendre;

/// Singular-value threshold for the kernel of the normalized `M₋†(iκ)`.
pub const RANK_TOLERANCE: f64 = 1e-7;
/// Normalized boundary residual below which a refined minimum counts as a root.
pub const ROOT_TOLERANCE: f64 = 1e-6;
/// Refined minima between these levels are ambiguous.
const AMBIGUOUS_LEVEL: f64 = 1e-3;
pub const VIRTUAL_LEVEL_EPSILON: f64 = 1e-4;
pub const VIRTUAL_LEVEL_THRESHOLD: f64 = 1e-2;

/// Bound state as produced by the direct solver.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub kappa: f64,
    /// Orthogonal projector onto `ker M₋†(iκ)`.
    pub projector: CMat,
    pub multiplicity: usize,
    /// `A_l = ∫₀^∞ F(t,iκ)† F(t,iκ) dt`, filled by [`normalization_matrices`].
    pub gram: Option<CMat>,
    /// `C_l = P B_l^{−1/2}`, filled by [`normalization_matrices`].
    pub norm_matrix: Option<CMat>,
}

impl BoundState {
    pub fn data(&self) -> Option<BoundStateData> {
        self.norm_matrix.as_ref().map(|c| BoundStateData { kappa: self.kappa, c: c.clone() })
    }
}

/// The part of a bound state that enters the scattering data.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateData {
    pub kappa: f64,
    pub c: CMat,
}

impl BoundStateData {
    /// `C_l²`.
    pub fn c_squared(&self) -> CMat {
        &self.c * &self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaRange {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub points: usize,
}

impl KappaRange {
    /// `[1e−3, √max|Q| + 1 + max(0, −h_j)]` with 400 log-spaced points, where
    /// `h_j` are the Robin parameters of the boundary eigen-channels.
    pub fn default_for(p: &PotentialSpec, bc: &BoundaryCondition) -> Self {
        let robin = bc.robin_parameters().into_iter().map(|h| (-h).max(0.0)).fold(0.0, f64::max);
        Self { kappa_min: 1e-3, kappa_max: p.max_norm().sqrt() + 1.0 + robin, points: 400 }
    }

    fn grid(&self) -> Vec<f64> {
        let r = (self.kappa_max / self.kappa_min).ln();
        (0..self.points)
            .map(|j| self.kappa_min * (r * j as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

/// Column-normalized `N(κ) = A†F_x(0,iκ) − B†F(0,iκ)`, which is proportional
/// to `M₋(iκ)†`. With `[F; F_x] = QR` it returns `N R⁻¹` (singular values in
/// `[0, 1]`) together with `R`.
fn boundary_matrix(p: &PotentialSpec, bc: &BoundaryCondition, kappa: f64) -> Result<(CMat, CMat)> {
    let (f, fx) = jost_at_origin(p, C64::new(0.0, kappa))?;
    let n = p.n();
    let mut stacked = CMat::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&f);
    stacked.view_mut((n, 0), (n, n)).copy_from(&fx);
    let qr = stacked.qr();
    let q = qr.q();
    let top = q.view((0, 0), (n, n)).into_owned();
    let bot = q.view((n, 0), (n, n)).into_owned();
    let normalized = bc.a().adjoint() * bot - bc.b().adjoint() * top;
    Ok((normalized, qr.r()))
}

fn sigma_min(p: &PotentialSpec, bc: &BoundaryCondition, kappa: f64) -> Result<f64> {
    let (m, _) = boundary_matrix(p, bc, kappa)?;
    Ok(*singular_values(&m).last().unwrap())
}

/// Projector onto `ker N(κ)`: kernel vectors `w` of `N R⁻¹` map to `R⁻¹ w`.
fn kernel_projector(p: &PotentialSpec, bc: &BoundaryCondition, kappa: f64) -> Result<(CMat, usize)> {
    let (m, r) = boundary_matrix(p, bc, kappa)?;
    let n = m.ncols();
    // the normalized matrix has unit scale, so the tolerance is absolute
    let (pw, dim) = null_projector_abs(&m, RANK_TOLERANCE);
    if dim == 0 {
        return Ok((CMat::zeros(n, n), 0));
    }
    let r_inv = r.try_inverse().ok_or(Error::NotARoot { kappa, residual: f64::NAN })?;
    let (vals, vecs) = hermitian_eigen(&pw);
    let mut basis = CMat::zeros(n, dim);
    for (col, j) in (n - dim..n).enumerate() {
        debug_assert!(vals[j] > 0.5);
        basis.set_column(col, &(&r_inv * vecs.column(j)));
    }
    let q = basis.qr().q();
    Ok((&q * q.adjoint(), dim))
}

fn golden_minimize(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Scans the smallest singular value of the normalized boundary matrix on a
/// log grid, refines each dip, and keeps the ones that reach zero.
pub fn find_bound_states(p: &PotentialSpec, bc: &BoundaryCondition, range: &KappaRange) -> Result<Vec<BoundState>> {
    if !(range.kappa_min > 0.0) || !(range.kappa_max > range.kappa_min) || range.points < 3 {
        return Err(Error::InvalidGrid(format!("kappa range {range:?}")));
    }
    let kappas = range.grid();
    let sig = kappas.iter().map(|&k| sigma_min(p, bc, k)).collect::<Result<Vec<_>>>()?;
    let mut out: Vec<BoundState> = Vec::new();
    let last = kappas.len() - 1;
    for j in 0..=last {
        let left = if j == 0 { f64::INFINITY } else { sig[j - 1] };
        let right = if j == last { f64::INFINITY } else { sig[j + 1] };
        if !(sig[j] <= left && sig[j] < right) {
            continue;
        }
        let lo = kappas[j.saturating_sub(1)];
        let hi = kappas[(j + 1).min(last)];
        let (kappa, value) = golden_minimize(|k| sigma_min(p, bc, k), lo, hi, 1e-13)?;
        if value < ROOT_TOLERANCE {
            if out.iter().any(|b| (b.kappa - kappa).abs() < 1e-9 * (1.0 + kappa)) {
                continue;
            }
            let (projector, multiplicity) = kernel_projector(p, bc, kappa)?;
            if multiplicity == 0 {
                return Err(Error::NotARoot { kappa, residual: value });
            }
            out.push(BoundState { kappa, projector, multiplicity, gram: None, norm_matrix: None });
        } else if value < AMBIGUOUS_LEVEL && j != 0 && j != last {
            return Err(Error::RangeTooCoarse { kappa });
        }
    }
    out.sort_by(|a, b| a.kappa.partial_cmp(&b.kappa).unwrap());
    Ok(out)
}

/// `A_l`, `B_l = P A_l P + P^⊥` and `C_l = P B_l^{−1/2}`.
pub fn normalization_matrices(p: &PotentialSpec, bc: &BoundaryCondition, bs: &BoundState) -> Result<BoundState> {
    let kappa = bs.kappa;
    let residual = sigma_min(p, bc, kappa)?;
    if residual > ROOT_TOLERANCE {
        return Err(Error::NotARoot { kappa, residual });
    }
    let n = p.n();
    let support = p.support_bound();
    let t_end = support + 10.0 / kappa;
    // Panels never straddle a breakpoint; each panel is at most 0.5 long.
    let mut edges = vec![0.0];
    edges.extend(p.breakpoints().into_iter().filter(|&b| b < t_end));
    edges.push(t_end);
    let gl = GaussLegendre::new(12);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in edges.windows(2) {
        let panels = ((w[1] - w[0]) / 0.5).ceil() as usize;
        let (x, wt) = gl.composite(w[0], w[1], panels);
        nodes.extend(x);
        weights.extend(wt);
    }
    let samples = jost_solution(p, C64::new(0.0, kappa), &nodes)?;
    let mut gram = CMat::zeros(n, n);
    for (f, &w) in samples.f.iter().zip(&weights) {
        gram += f.adjoint() * f * C64::new(w, 0.0);
    }
    // F = e^{−κx} I beyond the support
    gram += identity(n) * C64::new((-2.0 * kappa * t_end).exp() / (2.0 * kappa), 0.0);
    let gram = (&gram + gram.adjoint()).scale(0.5);

    let proj = &bs.projector;
    let perp = identity(n) - proj;
    let b_l = proj * &gram * proj + &perp;
    let (vals, _) = hermitian_eigen(&b_l);
    if !(vals[0] > 0.0) {
        return Err(Error::IndefiniteB { min_eigenvalue: vals[0] });
    }
    let c = proj * hpd_inv_sqrt(&b_l)?;
    let c = (&c + c.adjoint()).scale(0.5);
    Ok(BoundState { gram: Some(gram), norm_matrix: Some(c), ..bs.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualLevelReport {
    pub epsilon: f64,
    /// Smallest singular value of the normalized boundary matrix at `k = iε`.
    pub sigma_min: f64,
    pub suspected_virtual_level: bool,
}

/// Flags a zero-energy resonance: the boundary condition almost admits the
/// Jost solution at `k = iε`.
pub fn check_no_virtual_levels(p: &PotentialSpec, bc: &BoundaryCondition) -> Result<VirtualLevelReport> {
    let s = sigma_min(p, bc, VIRTUAL_LEVEL_EPSILON)?;
    Ok(VirtualLevelReport {
        epsilon: VIRTUAL_LEVEL_EPSILON,
        sigma_min: s,
        suspected_virtual_level: s < VIRTUAL_LEVEL_THRESHOLD,
    })
}

/// One sample of the pole-order diagnostic at `k = i(κ + δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSample {
    pub delta: f64,
    /// `‖(k − iκ) M₋⁻¹(k)‖_F`
    pub first_order: f64,
    /// `‖(k − iκ)² M₋⁻¹(k)‖_F`
    pub second_order: f64,
}

/// Evaluates `(k − iκ)^m M₋⁻¹(k)` near a bound state along the imaginary axis.
pub fn pole_profile(p: &PotentialSpec, bc: &BoundaryCondition, kappa: f64, deltas: &[f64]) -> Result<Vec<PoleSample>> {
    deltas
        .iter()
        .map(|&delta| {
            let k = C64::new(0.0, kappa + delta);
            let m = m_minus_at(p, bc, k)?;
            let inv = m
                .try_inverse()
                .ok_or(Error::SingularMinus { k: kappa + delta, condition: f64::INFINITY })?;
            let dk = k - C64::new(0.0, kappa);
            let first = (&inv * dk).norm();
            let second = (&inv * (dk * dk)).norm();
            Ok(PoleSample { delta, first_order: first, second_order: second })
        })
        .collect()
}
