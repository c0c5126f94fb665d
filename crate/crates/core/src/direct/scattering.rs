//! `M±(k)`, the scattering matrix, standard solutions and the scattered wave.

use crate::boundary::{boundary_residual, compute_uhat, BoundaryCondition};
use crate::direct::bound::{find_bound_states, normalization_matrices, BoundStateData, KappaRange};
use crate::direct::jost::{jost_at_origin, jost_solution, JostData};
use crate::error::{Error, Result};
use crate::grid::KGrid;
use crate::linalg::{condition_number, identity, CMat, C64, I};
use crate::ode::{Propagator, DEFAULT_RTOL};
use crate::potential::PotentialSpec;

/// Condition number of `M₋(k)` beyond which the real-axis inversion is refused.
pub const SINGULAR_MINUS_CONDITION: f64 = 1e12;

/// `M₊ = (1/2ik)[F₊†B − F₊,ₓ†A]` and `M₋ = −(1/2ik)[F₋†B − F₋,ₓ†A]` at real `k`.
pub fn m_matrices(jd: &JostData, bc: &BoundaryCondition) -> (CMat, CMat) {
    let (a, b) = (bc.a(), bc.b());
    let inv = C64::new(1.0, 0.0) / (2.0 * I * jd.k);
    let plus = (jd.f_plus.adjoint() * b - jd.fx_plus.adjoint() * a) * inv;
    let minus = (jd.f_minus.adjoint() * b - jd.fx_minus.adjoint() * a) * (-inv);
    (plus, minus)
}

/// `M₋(k)` for `Im k ≥ 0`, via `F₋†(0,k) = F(0,−k̄)*`.
pub fn m_minus_at(p: &PotentialSpec, bc: &BoundaryCondition, k: C64) -> Result<CMat> {
    let (f, fx) = jost_at_origin(p, -k.conj())?;
    let inv = C64::new(1.0, 0.0) / (2.0 * I * k);
    Ok((f.adjoint() * bc.b() - fx.adjoint() * bc.a()) * (-inv))
}

/// `S(k) = M₊ M₋⁻¹ = −[F₊†B − F₊,ₓ†A][F₋†B − F₋,ₓ†A]⁻¹`.
pub fn scattering_matrix(jd: &JostData, bc: &BoundaryCondition) -> Result<CMat> {
    let (plus, minus) = m_matrices(jd, bc);
    let cond = condition_number(&minus);
    if !(cond < SINGULAR_MINUS_CONDITION) {
        return Err(Error::SingularMinus { k: jd.k, condition: cond });
    }
    let inv = minus
        .try_inverse()
        .ok_or(Error::SingularMinus { k: jd.k, condition: cond })?;
    Ok(plus * inv)
}

/// Jost functions on a whole k-grid; independent of the boundary condition.
#[derive(Debug, Clone)]
pub struct JostTable {
    pub kgrid: KGrid,
    pub data: Vec<JostData>,
}

impl JostTable {
    pub fn compute(p: &PotentialSpec, kgrid: &KGrid) -> Result<Self> {
        let data = kgrid
            .values()
            .iter()
            .map(|&k| JostData::compute(p, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kgrid: kgrid.clone(), data })
    }

    pub fn scattering(&self, bc: &BoundaryCondition) -> Result<Vec<CMat>> {
        self.data.iter().map(|jd| scattering_matrix(jd, bc)).collect()
    }
}

/// Scattering data `{S(k); κ_l, C_l}` together with the asymptote `Û`.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub kgrid: KGrid,
    pub s: Vec<CMat>,
    pub uhat: CMat,
    pub bound_states: Vec<BoundStateData>,
}

impl ScatteringData {
    pub fn n(&self) -> usize {
        self.uhat.nrows()
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.s
            .iter()
            .map(crate::linalg::unitarity_residual)
            .fold(0.0, f64::max)
    }

    /// `‖S(k_max) − Û‖_F`.
    pub fn asymptote_gap(&self) -> f64 {
        (self.s.last().unwrap() - &self.uhat).norm()
    }
}

/// Full direct problem: S on the grid, bound states and their normalization matrices.
pub fn compute_scattering_data(p: &PotentialSpec, bc: &BoundaryCondition, kgrid: &KGrid) -> Result<ScatteringData> {
    let table = JostTable::compute(p, kgrid)?;
    scattering_data_from_table(p, bc, &table)
}

pub fn scattering_data_from_table(p: &PotentialSpec, bc: &BoundaryCondition, table: &JostTable) -> Result<ScatteringData> {
    let s = table.scattering(bc)?;
    let uhat = compute_uhat(bc)?;
    let range = KappaRange::default_for(p, bc);
    let mut bound_states = Vec::new();
    for bs in find_bound_states(p, bc, &range)? {
        let full = normalization_matrices(p, bc, &bs)?;
        bound_states.push(full.data().expect("normalized"));
    }
    Ok(ScatteringData { kgrid: table.kgrid.clone(), s, uhat, bound_states })
}

/// Samples of the standard solutions `Θ` (`Θ(0)=I, Θ'(0)=0`) and `Φ` (`Φ(0)=0, Φ'(0)=I`).
#[derive(Debug, Clone)]
pub struct StandardSolutions {
    pub x: Vec<f64>,
    pub theta: Vec<CMat>,
    pub theta_x: Vec<CMat>,
    pub phi: Vec<CMat>,
    pub phi_x: Vec<CMat>,
}

impl StandardSolutions {
    /// `Ξ = ΘA + ΦB` and its derivative at each sample.
    pub fn xi(&self, bc: &BoundaryCondition) -> (Vec<CMat>, Vec<CMat>) {
        let xi = self.theta.iter().zip(&self.phi).map(|(t, f)| t * bc.a() + f * bc.b()).collect();
        let xi_x = self.theta_x.iter().zip(&self.phi_x).map(|(t, f)| t * bc.a() + f * bc.b()).collect();
        (xi, xi_x)
    }
}

pub fn standard_solutions(p: &PotentialSpec, k: C64, x_eval: &[f64]) -> Result<StandardSolutions> {
    let n = p.n();
    let cols = 2 * n;
    let mut order: Vec<usize> = (0..x_eval.len()).collect();
    order.sort_by(|&a, &b| x_eval[a].partial_cmp(&x_eval[b]).unwrap());
    // state [Θ Φ ; Θ' Φ'] column-major, n × 2n blocks
    let mut y = vec![C64::new(0.0, 0.0); 2 * n * cols];
    for i in 0..n {
        y[i * n + i] = C64::new(1.0, 0.0);
        y[n * cols + (n + i) * n + i] = C64::new(1.0, 0.0);
    }
    let mut prop = Propagator::new(p, k, cols, DEFAULT_RTOL);
    let mut x_cur = 0.0;
    let empty = || vec![CMat::zeros(n, n); x_eval.len()];
    let (mut theta, mut theta_x, mut phi, mut phi_x) = (empty(), empty(), empty(), empty());
    for idx in order {
        let x = x_eval[idx];
        if x < 0.0 {
            return Err(Error::InvalidGrid("standard solutions need x ≥ 0".into()));
        }
        prop.propagate(x_cur, &mut y, x)?;
        x_cur = x;
        let val = CMat::from_column_slice(n, cols, &y[..n * cols]);
        let der = CMat::from_column_slice(n, cols, &y[n * cols..]);
        theta[idx] = val.columns(0, n).into_owned();
        phi[idx] = val.columns(n, n).into_owned();
        theta_x[idx] = der.columns(0, n).into_owned();
        phi_x[idx] = der.columns(n, n).into_owned();
    }
    Ok(StandardSolutions { x: x_eval.to_vec(), theta, theta_x, phi, phi_x })
}

/// `Ξ = F₋M₋ + F₊M₊` from the Jost solutions at real `k`.
pub fn xi_from_jost(p: &PotentialSpec, bc: &BoundaryCondition, k: f64, x_eval: &[f64]) -> Result<(Vec<CMat>, Vec<CMat>)> {
    let jd = JostData::compute(p, k)?;
    let (plus, minus) = m_matrices(&jd, bc);
    let fp = jost_solution(p, C64::new(k, 0.0), x_eval)?;
    let fm = jost_solution(p, C64::new(-k, 0.0), x_eval)?;
    let xi = (0..x_eval.len()).map(|i| &fm.f[i] * &minus + &fp.f[i] * &plus).collect();
    let xi_x = (0..x_eval.len()).map(|i| &fm.fx[i] * &minus + &fp.fx[i] * &plus).collect();
    Ok((xi, xi_x))
}

#[derive(Debug, Clone)]
pub struct ScatteredWave {
    pub x: Vec<f64>,
    /// `Ψ = F₋ + F₊S`
    pub psi: Vec<CMat>,
    pub psi_x: Vec<CMat>,
    /// `max_x ‖ΞM₋⁻¹ − (F₋ + F₊S)‖_F` over the samples (value and derivative).
    pub representation_gap: f64,
    /// Boundary-condition residual of `Ψ` at the origin.
    pub boundary_residual: f64,
}

pub fn scattered_wave(p: &PotentialSpec, bc: &BoundaryCondition, k: f64, x_eval: &[f64]) -> Result<ScatteredWave> {
    let jd = JostData::compute(p, k)?;
    let s = scattering_matrix(&jd, bc)?;
    let (_, minus) = m_matrices(&jd, bc);
    let minus_inv = minus.try_inverse().ok_or(Error::SingularMinus { k, condition: f64::INFINITY })?;
    let fp = jost_solution(p, C64::new(k, 0.0), x_eval)?;
    let fm = jost_solution(p, C64::new(-k, 0.0), x_eval)?;
    let ss = standard_solutions(p, C64::new(k, 0.0), x_eval)?;
    let (xi, xi_x) = ss.xi(bc);
    let mut psi = Vec::with_capacity(x_eval.len());
    let mut psi_x = Vec::with_capacity(x_eval.len());
    let mut gap = 0.0_f64;
    for i in 0..x_eval.len() {
        let a = &fm.f[i] + &fp.f[i] * &s;
        let ax = &fm.fx[i] + &fp.fx[i] * &s;
        gap = gap.max((&xi[i] * &minus_inv - &a).norm());
        gap = gap.max((&xi_x[i] * &minus_inv - &ax).norm());
        psi.push(a);
        psi_x.push(ax);
    }
    // Ψ(0) = Ξ(0)M₋⁻¹ = A M₋⁻¹ evaluated from the Jost side
    let f0 = &jd.f_minus + &jd.f_plus * &s;
    let fx0 = &jd.fx_minus + &jd.fx_plus * &s;
    let residual = boundary_residual(&f0, &fx0, bc)?;
    Ok(ScatteredWave { x: x_eval.to_vec(), psi, psi_x, representation_gap: gap, boundary_residual: residual })
}

/// Closed-form free data for tests and the self-test: `S ≡ −I` Dirichlet etc.
pub fn free_jost(n: usize, k: f64) -> JostData {
    let ik = I * k;
    JostData {
        k,
        f_plus: identity(n),
        fx_plus: identity(n) * ik,
        f_minus: identity(n),
        fx_minus: identity(n) * (-ik),
    }
}
