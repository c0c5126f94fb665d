//! Selfadjoint boundary conditions at the origin, parameterized by a unitary `U`.
//!
//! A function `f` satisfies the condition when
//! `(i/2)(U† − I) f(0) + (1/2)(U† + I) f'(0) = 0`.

use std::f64::consts::PI;

use nalgebra::Schur;

use crate::error::{Error, Result};
use crate::linalg::{ensure_square, identity, polar_unitary, unitarity_residual, CMat, C64, I};

/// Admission tolerance on `‖U†U − I‖_F`.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

/// Eigenvalues within this angle of `−1` are treated as exactly `−1`.
pub const DIRICHLET_ANGLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    u: CMat,
    a: CMat,
    b: CMat,
}

impl BoundaryCondition {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &CMat {
        &self.u
    }

    /// `A = (U + I)/2`, the value of Ξ at the origin.
    pub fn a(&self) -> &CMat {
        &self.a
    }

    /// `B = i(U − I)/2`, the derivative of Ξ at the origin.
    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn dirichlet(n: usize) -> Self {
        build_boundary(&(-identity(n))).expect("-I is unitary")
    }

    pub fn neumann(n: usize) -> Self {
        build_boundary(&identity(n)).expect("I is unitary")
    }

    /// Scalar Robin condition `f'(0) = h f(0)`.
    pub fn robin(h: f64) -> Self {
        let u = (C64::new(h, 0.0) + I) / (I - h);
        build_boundary(&CMat::from_element(1, 1, u)).expect("robin phase is unitary")
    }

    /// Robin parameters `h_j = −tan(θ_j/2)` of the eigen-channels, skipping
    /// Dirichlet channels (θ = π) where `h` is infinite.
    pub fn robin_parameters(&self) -> Vec<f64> {
        eigenphases(&self.u)
            .unwrap_or_default()
            .into_iter()
            .filter(|t| (t.abs() - PI).abs() > DIRICHLET_ANGLE_TOLERANCE)
            .map(|t| -(0.5 * t).tan())
            .collect()
    }
}

/// Builds `A` and `B` from `U`, re-projecting `U` onto the unitary group.
pub fn build_boundary(u: &CMat) -> Result<BoundaryCondition> {
    let n = ensure_square(u)?;
    let residual = unitarity_residual(u);
    if !(residual <= UNITARITY_TOLERANCE) {
        return Err(Error::NonUnitary { residual });
    }
    let u = polar_unitary(u);
    let id = identity(n);
    let a = (&u + &id).scale(0.5);
    let b = (&u - &id) * C64::new(0.0, 0.5);
    Ok(BoundaryCondition { u, a, b })
}

fn schur_of(u: &CMat) -> Result<(CMat, Vec<C64>)> {
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::EigendecompositionFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    // U is normal, so T should be diagonal.
    let mut off = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            off += t[(i, j)].norm_sqr();
        }
    }
    if off.sqrt() > 1e-8 {
        return Err(Error::EigendecompositionFailure(format!(
            "Schur form not diagonal (off-diagonal mass {:e})",
            off.sqrt()
        )));
    }
    Ok((q, (0..n).map(|i| t[(i, i)]).collect()))
}

/// Eigenphases `θ_j ∈ (−π, π]` of a unitary matrix.
pub fn eigenphases(u: &CMat) -> Result<Vec<f64>> {
    let (_, d) = schur_of(u)?;
    Ok(d.iter().map(|z| z.arg()).collect())
}

/// High-energy limit `Û` of the scattering matrix: the spectrum of `U` is
/// mapped to `−1` at `z = −1` and to `+1` everywhere else on the circle.
pub fn compute_uhat(bc: &BoundaryCondition) -> Result<CMat> {
    let (q, d) = schur_of(bc.u())?;
    let n = d.len();
    let mapped = nalgebra::DVector::from_iterator(
        n,
        d.iter().map(|z| {
            if (z.arg().abs() - PI).abs() < DIRICHLET_ANGLE_TOLERANCE {
                C64::new(-1.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        }),
    );
    let uhat = &q * CMat::from_diagonal(&mapped) * q.adjoint();
    // exact hermitian
    Ok((&uhat + uhat.adjoint()).scale(0.5))
}

/// Frobenius norm of `(i/2)(U†−I) f0 + (1/2)(U†+I) fx0`.
pub fn boundary_residual(f0: &CMat, fx0: &CMat, bc: &BoundaryCondition) -> Result<f64> {
    let n = bc.n();
    if f0.nrows() != n || fx0.nrows() != n || f0.ncols() != fx0.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "boundary data {}x{} / {}x{} for n = {n}",
            f0.nrows(),
            f0.ncols(),
            fx0.nrows(),
            fx0.ncols()
        )));
    }
    let ud = bc.u().adjoint();
    let id = identity(n);
    let r = (&ud - &id) * C64::new(0.0, 0.5) * f0 + (&ud + &id).scale(0.5) * fx0;
    Ok(r.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;

    fn diag(v: &[C64]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn neumann_and_dirichlet_blocks() {
        let bc = BoundaryCondition::neumann(2);
        assert!((bc.a() - identity(2)).norm() < 1e-15);
        assert!(bc.b().norm() < 1e-15);
        let bc = BoundaryCondition::dirichlet(2);
        assert!(bc.a().norm() < 1e-15);
        assert!((bc.b() - identity(2) * c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn quarter_turn_channel() {
        let u = diag(&[c(0.0, 1.0), c(1.0, 0.0)]);
        let bc = build_boundary(&u).unwrap();
        // A = (U+I)/2, B = i(U-I)/2 by hand
        assert!((bc.a()[(0, 0)] - c(0.5, 0.5)).norm() < 1e-15);
        assert!((bc.a()[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((bc.b()[(0, 0)] - c(-0.5, -0.5)).norm() < 1e-15);
        assert!(bc.b()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_and_non_square() {
        let u = diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(build_boundary(&u), Err(Error::NonUnitary { .. })));
        let r = CMat::zeros(2, 3);
        assert!(matches!(build_boundary(&r), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn uhat_maps_spectrum() {
        let phase = C64::from_polar(1.0, PI / 4.0);
        let u = diag(&[c(0.0, 1.0), c(-1.0, 0.0), phase]);
        let uhat = compute_uhat(&build_boundary(&u).unwrap()).unwrap();
        assert!((uhat - diag(&[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)])).norm() < 1e-12);
        let uhat = compute_uhat(&BoundaryCondition::dirichlet(2)).unwrap();
        assert!((uhat + identity(2)).norm() < 1e-12);
        let uhat = compute_uhat(&BoundaryCondition::neumann(2)).unwrap();
        assert!((uhat - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn residual_cases() {
        let d = BoundaryCondition::dirichlet(2);
        let zero = CMat::zeros(2, 1);
        let e1 = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let any = CMat::from_column_slice(2, 1, &[c(0.3, -2.0), c(4.0, 1.0)]);
        assert!(boundary_residual(&zero, &any, &d).unwrap() < 1e-15);
        let nm = BoundaryCondition::neumann(2);
        assert!(boundary_residual(&any, &zero, &nm).unwrap() < 1e-15);
        assert!((boundary_residual(&e1, &zero, &d).unwrap() - 1.0).abs() < 1e-15);
        assert!(boundary_residual(&CMat::zeros(3, 1), &zero, &d).is_err());
    }

    #[test]
    fn robin_constructor_matches_condition() {
        for h in [-2.0, 0.5, 3.0] {
            let bc = BoundaryCondition::robin(h);
            let f0 = CMat::from_element(1, 1, c(1.0, 0.0));
            let fx0 = CMat::from_element(1, 1, c(h, 0.0));
            assert!(boundary_residual(&f0, &fx0, &bc).unwrap() < 1e-14);
            let hs = bc.robin_parameters();
            assert!((hs[0] - h).abs() < 1e-12);
        }
    }

    fn unitary_from(params: &[f64], n: usize) -> CMat {
        // exp(i H) for a hermitian H assembled from params
        let mut h = CMat::zeros(n, n);
        let mut p = params.iter();
        for i in 0..n {
            h[(i, i)] = c(*p.next().unwrap(), 0.0);
            for j in i + 1..n {
                let z = c(*p.next().unwrap(), *p.next().unwrap());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let (vals, vecs) = crate::linalg::hermitian_eigen(&h);
        let d = nalgebra::DVector::from_iterator(n, vals.iter().map(|&v| C64::from_polar(1.0, v)));
        &vecs * CMat::from_diagonal(&d) * vecs.adjoint()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn boundary_identities_hold(n in 1usize..=4, params in proptest::collection::vec(-3.0f64..3.0, 16)) {
            let u = unitary_from(&params, n);
            let bc = build_boundary(&u).unwrap();
            let (a, b) = (bc.a(), bc.b());
            prop_assert!((a.adjoint() * b - b.adjoint() * a).norm() <= 1e-12);
            prop_assert!((a * a.adjoint() + b * b.adjoint() - identity(n)).norm() <= 1e-12);
            let uhat = compute_uhat(&bc).unwrap();
            prop_assert!((&uhat - uhat.adjoint()).norm() <= 1e-10);
            prop_assert!((&uhat * &uhat - identity(n)).norm() <= 1e-10);
            let again = compute_uhat(&build_boundary(&uhat).unwrap()).unwrap();
            prop_assert!((again - &uhat).norm() <= 1e-10);
            // Ξ(0) = A, Ξ_x(0) = B satisfies the condition
            prop_assert!(boundary_residual(a, b, &bc).unwrap() <= 1e-12);
        }
    }
}
