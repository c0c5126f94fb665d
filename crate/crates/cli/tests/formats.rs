use marchenko::{BoundStateData, CMat, KGrid, ScatteringData, C64};
use marchenko_cli::formats::{
    read_boundary, read_potential, read_scattering, write_boundary, write_potential, write_scattering, PotentialSamples,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6_f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn matrix(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((finite(), finite()), n * n)
        .prop_map(move |v| CMat::from_fn(n, n, |i, j| C64::new(v[i * n + j].0, v[i * n + j].1)))
}

fn bits(m: &CMat) -> Vec<u64> {
    m.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect()
}

proptest! {
    #[test]
    fn potential_round_trip_is_bit_exact(n in 1usize..4, len in 1usize..6, seed in matrix(3)) {
        let x: Vec<f64> = (0..len).map(|j| j as f64 * 0.1 + seed[(0, 0)].re.abs().min(1.0)).collect();
        let q: Vec<CMat> = (0..len).map(|j| CMat::from_fn(n, n, |a, b| seed[((a + j) % 3, b % 3)])).collect();
        let p = PotentialSamples { x, q };
        let back = read_potential(&write_potential(&p)).unwrap();
        prop_assert_eq!(back.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), p.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        for (a, b) in back.q.iter().zip(&p.q) {
            prop_assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn boundary_round_trip_is_bit_exact(u in (1usize..5).prop_flat_map(matrix)) {
        let back = read_boundary(&write_boundary(&u)).unwrap();
        prop_assert_eq!(bits(&back), bits(&u));
    }

    #[test]
    fn scattering_round_trip_is_bit_exact(
        s in prop::collection::vec(matrix(2), 1..5),
        uhat in matrix(2),
        states in prop::collection::vec((1e-3..10.0_f64, matrix(2)), 0..3),
    ) {
        let kgrid = KGrid::new((1..=s.len()).map(|j| j as f64 * 0.37).collect()).unwrap();
        let bound_states = states.into_iter().map(|(kappa, c)| BoundStateData { kappa, c }).collect();
        let sd = ScatteringData { kgrid, s, uhat, bound_states };
        let text = write_scattering(&sd);
        let back = read_scattering(&text).unwrap();
        prop_assert_eq!(write_scattering(&back), text);
        prop_assert_eq!(back.kgrid, sd.kgrid);
        for (a, b) in back.s.iter().zip(&sd.s) {
            prop_assert_eq!(bits(a), bits(b));
        }
        prop_assert_eq!(bits(&back.uhat), bits(&sd.uhat));
        for (a, b) in back.bound_states.iter().zip(&sd.bound_states) {
            prop_assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
            prop_assert_eq!(bits(&a.c), bits(&b.c));
        }
    }
}

#[test]
fn malformed_inputs_are_rejected_with_line_numbers() {
    let line = |r: Result<(), marchenko_cli::formats::ParseError>| r.unwrap_err().line;
    assert_eq!(line(read_potential("1,2\n0.0,1,0\n").map(|_| ())), 3);
    assert_eq!(line(read_potential("1,1\n0.0,1,zero\n").map(|_| ())), 2);
    assert_eq!(line(read_potential("# only a comment\n").map(|_| ())), 2);
    assert_eq!(line(read_boundary("2\n1,0,0,0\n").map(|_| ())), 3);
    assert_eq!(line(read_boundary("0\n").map(|_| ())), 1);
    assert_eq!(line(read_boundary("1\n1,0\n2,0\n").map(|_| ())), 3);
    assert_eq!(line(read_boundary("1\nnan,0\n").map(|_| ())), 2);
    assert_eq!(line(read_scattering("[kgrid]\n1,2\n1.0\n0.5\n[S]\n").map(|_| ())), 2);
}

#[test]
fn scattering_sections_must_appear_in_order() {
    let e = read_scattering("[S]\n").unwrap_err();
    assert!(e.message.contains("[kgrid]"), "{e}");
}
