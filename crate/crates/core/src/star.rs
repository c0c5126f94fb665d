//! Star graphs: diagonal potentials, one scalar Marchenko problem per edge.

use log::debug;

use crate::direct::{BoundStateData, ScatteringData};
use crate::error::{Error, Result};
use crate::grid::{KGrid, XGrid};
use crate::inverse::{invert_full, InverseOptions};
use crate::linalg::{CMat, C64};
use crate::potential::PotentialSpec;

/// Off-diagonal Frobenius mass allowed per sample, relative to `‖S(k)‖_F`.
pub const DIAGONAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct StarScatteringData {
    pub n: usize,
    pub kgrid: KGrid,
    /// `r[i][j] = S_ii(k_j)`.
    pub r: Vec<Vec<C64>>,
    /// Diagonal of `Û`, each entry ±1.
    pub asymptote: Vec<f64>,
    /// `(κ_l, γ_{l,i} = (C_l²)_ii)`.
    pub bound_states: Vec<(f64, Vec<f64>)>,
}

fn off_diagonal_mass(m: &CMat) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub fn extract_star_data(sd: &ScatteringData) -> Result<StarScatteringData> {
    let n = sd.n();
    let mut worst = 0.0_f64;
    for s in &sd.s {
        worst = worst.max(off_diagonal_mass(s) / s.norm().max(f64::MIN_POSITIVE));
    }
    if worst > DIAGONAL_TOLERANCE {
        return Err(Error::NotDiagonal { mass: worst });
    }
    debug!("extract_star_data: off-diagonal mass {worst:e}");
    let r = (0..n).map(|i| sd.s.iter().map(|s| s[(i, i)]).collect()).collect();
    let asymptote = (0..n).map(|i| sd.uhat[(i, i)].re).collect();
    let bound_states = sd
        .bound_states
        .iter()
        .map(|b| {
            let c2 = b.c_squared();
            (b.kappa, (0..n).map(|i| c2[(i, i)].re.max(0.0)).collect())
        })
        .collect();
    Ok(StarScatteringData { n, kgrid: sd.kgrid.clone(), r, asymptote, bound_states })
}

impl StarScatteringData {
    /// Scalar scattering data of edge `i`; bound states with `γ_{l,i} = 0` are dropped.
    pub fn edge(&self, i: usize) -> Result<ScatteringData> {
        if i >= self.n {
            return Err(Error::ShapeMismatch(format!("edge {i} of {}", self.n)));
        }
        let s = self.r[i].iter().map(|&v| CMat::from_element(1, 1, v)).collect();
        let uhat = CMat::from_element(1, 1, C64::new(self.asymptote[i], 0.0));
        let bound_states = self
            .bound_states
            .iter()
            .filter(|(_, g)| g[i] > 0.0)
            .map(|(kappa, g)| BoundStateData { kappa: *kappa, c: CMat::from_element(1, 1, C64::new(g[i].sqrt(), 0.0)) })
            .collect();
        Ok(ScatteringData { kgrid: self.kgrid.clone(), s, uhat, bound_states })
    }
}

#[derive(Debug, Clone)]
pub struct EdgeReconstruction {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    /// Largest `|Im Q_i(x)|` discarded when returning the real potential.
    pub imaginary_residue: f64,
    /// Recovered scalar boundary phase of the edge.
    pub phase: C64,
}

pub fn scalar_marchenko_invert(
    star: &StarScatteringData,
    edge: usize,
    xgrid: &XGrid,
    opts: &InverseOptions,
) -> Result<EdgeReconstruction> {
    let sd = star.edge(edge)?;
    let res = invert_full(&sd, xgrid, opts)?;
    let imaginary_residue = res.q.iter().map(|q| q[0].im.abs()).fold(0.0, f64::max);
    debug!("edge {edge}: imaginary residue {imaginary_residue:e}");
    Ok(EdgeReconstruction {
        x: res.x,
        q: res.q.iter().map(|q| q[0].re).collect(),
        imaginary_residue,
        phase: res.u[0],
    })
}

/// `Q = diag(Q_1, …, Q_n)` as a sampled potential.
pub fn assemble_diagonal(edges: &[EdgeReconstruction]) -> Result<PotentialSpec> {
    let first = edges.first().ok_or_else(|| Error::GridMismatch("no edges".into()))?;
    for e in edges {
        if e.x != first.x || e.q.len() != e.x.len() {
            return Err(Error::GridMismatch("edges are sampled on different grids".into()));
        }
    }
    let n = edges.len();
    let values = (0..first.x.len())
        .map(|j| {
            let mut m = CMat::zeros(n, n);
            for (i, e) in edges.iter().enumerate() {
                m[(i, i)] = C64::new(e.q[j], 0.0);
            }
            m
        })
        .collect();
    PotentialSpec::sampled(first.x.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryCondition;
    use crate::direct::compute_scattering_data;
    use crate::potential::validate_potential;

    fn kgrid() -> KGrid {
        KGrid::uniform(40.0, 400).unwrap()
    }

    #[test]
    fn single_edge_is_identity() {
        let p = PotentialSpec::square_well(1, -5.0, 1.0).unwrap();
        let sd = compute_scattering_data(&p, &BoundaryCondition::dirichlet(1), &kgrid()).unwrap();
        let star = extract_star_data(&sd).unwrap();
        assert_eq!(star.r[0], sd.s.iter().map(|s| s[0]).collect::<Vec<_>>());
        assert_eq!(star.bound_states[0].1[0], sd.bound_states[0].c_squared()[0].re);
    }

    #[test]
    fn free_dirichlet_edges_reflect_with_minus_one() {
        let sd = compute_scattering_data(&PotentialSpec::zero(3), &BoundaryCondition::dirichlet(3), &kgrid()).unwrap();
        let star = extract_star_data(&sd).unwrap();
        assert!(star.r.iter().flatten().all(|r| (r + 1.0).norm() < 1e-12));
        let xg = XGrid::new(5.0, 101).unwrap();
        let e = scalar_marchenko_invert(&star, 1, &xg, &InverseOptions::default()).unwrap();
        assert!(e.q.iter().all(|q| q.abs() < 1e-10));
    }

    #[test]
    fn edges_match_scalar_direct_solver() {
        let p = PotentialSpec::diagonal_wells(vec![-4.0, 2.0], vec![1.0, 0.5]).unwrap();
        let sd = compute_scattering_data(&p, &BoundaryCondition::dirichlet(2), &kgrid()).unwrap();
        let star = extract_star_data(&sd).unwrap();
        for (i, (d, w)) in [(-4.0, 1.0), (2.0, 0.5)].into_iter().enumerate() {
            let pi = PotentialSpec::square_well(1, d, w).unwrap();
            let si = compute_scattering_data(&pi, &BoundaryCondition::dirichlet(1), &kgrid()).unwrap();
            for (a, b) in star.r[i].iter().zip(&si.s) {
                assert!((a - b[0]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn non_diagonal_boundary_is_flagged() {
        let u = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let bc = crate::boundary::build_boundary(&u).unwrap();
        let sd = compute_scattering_data(&PotentialSpec::zero(2), &bc, &kgrid()).unwrap();
        assert!(matches!(extract_star_data(&sd), Err(Error::NotDiagonal { .. })));
    }

    #[test]
    fn assembly() {
        let x: Vec<f64> = (0..5).map(|i| i as f64 * 0.5).collect();
        let mk = |q: Vec<f64>| EdgeReconstruction { x: x.clone(), q, imaginary_residue: 0.0, phase: C64::new(-1.0, 0.0) };
        let edges = vec![mk(vec![0.0; 5]), mk(vec![-1.0, -1.0, 0.0, 0.0, 0.0]), mk(vec![0.5; 5])];
        let p = assemble_diagonal(&edges).unwrap();
        assert!(validate_potential(&p).passed());
        assert_eq!(p.eval(0.0)[(1, 1)].re, -1.0);
        let bad = vec![mk(vec![0.0; 5]), EdgeReconstruction { x: vec![0.0, 1.0], q: vec![0.0, 0.0], imaginary_residue: 0.0, phase: C64::new(-1.0, 0.0) }];
        assert!(matches!(assemble_diagonal(&bad), Err(Error::GridMismatch(_))));
    }
}
