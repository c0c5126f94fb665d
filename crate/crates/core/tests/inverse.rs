mod common;

use marchenko::direct::compute_scattering_data;
use marchenko::inverse::{invert_full, kernel_G, relative_l2_error, InverseOptions};
use marchenko::{BoundStateData, BoundaryCondition, CMat, Error, KGrid, PotentialSpec, ScatteringData, XGrid, C64};

fn default_grids() -> (KGrid, XGrid) {
    (KGrid::uniform(40.0, 800).unwrap(), XGrid::new(15.0, 600).unwrap())
}

#[test]
fn free_dirichlet_data_inverts_to_the_free_problem() {
    let (kg, xg) = default_grids();
    let sd = compute_scattering_data(&PotentialSpec::zero(2), &BoundaryCondition::dirichlet(2), &kg).unwrap();
    let res = invert_full(&sd, &xg, &InverseOptions::default()).unwrap();
    assert!(res.q.iter().all(|q| q.norm() < 1e-12));
    assert!((&res.u + CMat::identity(2, 2)).norm() < 1e-12);
}

#[test]
fn scalar_square_well_with_robin_condition_round_trips() {
    // The depth-4 jump limits the L² error of band-limited data to about
    // 1/sqrt(pi k_max) of the well norm, so k_max = 40 cannot reach 5%.
    let kg = KGrid::uniform(80.0, 1600).unwrap();
    let xg = XGrid::new(15.0, 2400).unwrap();
    let p = PotentialSpec::square_well(1, -4.0, 1.0).unwrap();
    let bc = BoundaryCondition::robin(0.7);
    let sd = compute_scattering_data(&p, &bc, &kg).unwrap();
    let res = invert_full(&sd, &xg, &InverseOptions::default()).unwrap();
    let truth: Vec<CMat> = res.x.iter().map(|&x| p.eval(x)).collect();
    let err = relative_l2_error(&res.q, &truth);
    assert!(err < 0.05, "Q error {err}");
    assert!((&res.u - bc.u()).norm() < 1e-2, "U error {}", (&res.u - bc.u()).norm());
}

#[test]
fn reflectionless_data_through_the_nested_solver() {
    let (kappa, gamma): (f64, f64) = (1.0, 2.0);
    let kg = KGrid::uniform(40.0, 200).unwrap();
    let one = CMat::from_element(1, 1, C64::new(-1.0, 0.0));
    let c = CMat::from_element(1, 1, C64::new(gamma.sqrt(), 0.0));
    let sd = ScatteringData { s: vec![one.clone(); kg.len()], kgrid: kg, uhat: one, bound_states: vec![BoundStateData { kappa, c }] };
    let res = invert_full(&sd, &XGrid::new(15.0, 1201).unwrap(), &InverseOptions::default()).unwrap();
    let worst = res
        .x
        .iter()
        .zip(&res.q)
        .map(|(&x, q)| (q[0].re - common::reflectionless_potential(kappa, gamma, x)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn slowly_decaying_data_is_rejected() {
    let kg = KGrid::uniform(40.0, 100).unwrap();
    let s: Vec<CMat> = kg.values().iter().map(|_| CMat::from_element(1, 1, C64::new(0.0, 1.0))).collect();
    let sd = ScatteringData { s, kgrid: kg, uhat: CMat::identity(1, 1), bound_states: vec![] };
    assert!(matches!(kernel_G(&sd), Err(Error::InsufficientDecay { .. })));
}

#[test]
fn non_unitary_data_fails_the_screen() {
    let kg = KGrid::uniform(40.0, 100).unwrap();
    let s: Vec<CMat> = kg.values().iter().map(|_| CMat::from_element(1, 1, C64::new(0.9, 0.0))).collect();
    let sd = ScatteringData { s, kgrid: kg, uhat: CMat::identity(1, 1), bound_states: vec![] };
    let res = invert_full(&sd, &XGrid::new(5.0, 50).unwrap(), &InverseOptions::default());
    assert!(matches!(res, Err(Error::Inadmissible(_))));
}

#[test]
fn kernel_is_hermitian_for_direct_solver_data() {
    let (kg, _) = default_grids();
    let bc = marchenko::build_boundary(&common::random_unitary(&mut <rand::rngs::StdRng as rand::SeedableRng>::seed_from_u64(2), 2)).unwrap();
    let sd = compute_scattering_data(&common::bump_2x2(), &bc, &kg).unwrap();
    let g = kernel_G(&sd).unwrap();
    for t in [0.0, 0.5, 2.0, 6.0] {
        let raw = g.eval_raw(t);
        assert!((&raw - raw.adjoint()).norm() < 1e-6);
    }
}
