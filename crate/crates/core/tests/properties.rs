use std::f64::consts::PI;

use hermitana::geometry::{check_identities, connection_g};
use hermitana::linalg::{
    commutator, expm_pade, expm_pauli, frob, hermitian_sqrt, identity, matrix_exponential, unitarity_residual, CMatrix,
    CVector,
};
use hermitana::model::{Example2, Example3, RandomSmoothFamily};
use hermitana::scalar::{angle_distance, cis, cplx};
use hermitana::spectra::{berry_curvatures, berry_phase, berry_phase_of_states, track_band};
use hermitana::transport::{transport_unitary, wilson_loop};
use hermitana::{Complex, Frame, PathSpec};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

fn complex_matrix(n: usize, scale: f64) -> impl Strategy<Value = CMatrix<f64>> {
    prop::collection::vec((-scale..scale, -scale..scale), n * n)
        .prop_map(move |v| CMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex::new(a, b))))
}

fn sized_matrix(scale: f64) -> impl Strategy<Value = CMatrix<f64>> {
    (2usize..=4).prop_flat_map(move |n| complex_matrix(n, scale))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9..0.9f64, 2)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn pade_matches_closed_form_on_2x2(a in complex_matrix(2, 2.0)) {
        let exact = expm_pauli(&a);
        let err = frob(&(expm_pade(&a) - &exact));
        prop_assert!(err <= 1e-12 * frob(&exact).max(1.0), "err {err}");
    }

    #[test]
    fn exponential_of_negation_is_inverse(a in sized_matrix(1.0)) {
        let n = a.nrows();
        let p = matrix_exponential(&a).unwrap() * matrix_exponential(&(-&a)).unwrap();
        prop_assert!(frob(&(p - identity::<f64>(n))) <= 1e-12);
    }

    #[test]
    fn exponential_of_anti_hermitian_is_unitary(a in sized_matrix(1.5)) {
        let k = (&a - a.adjoint()) * cplx::<f64>(0.5, 0.0);
        prop_assert!(unitarity_residual(&matrix_exponential(&k).unwrap()) <= 1e-12);
    }

    #[test]
    fn square_root_squares_back(b in sized_matrix(1.0)) {
        let n = b.nrows();
        let eta = &b * b.adjoint() + identity::<f64>(n) * cplx::<f64>(0.5, 0.0);
        let root = hermitian_sqrt(&eta, 1e-12).unwrap();
        prop_assert!(frob(&(&root.sqrt * &root.sqrt - &eta)) <= 1e-12 * frob(&eta));
        prop_assert!(frob(&(&root.sqrt * &root.inv_sqrt - identity::<f64>(n))) <= 1e-12);
        prop_assert!(frob(&(&root.sqrt - root.sqrt.adjoint())) <= 1e-12);
    }

    #[test]
    fn commutator_satisfies_jacobi(a in complex_matrix(3, 1.0), b in complex_matrix(3, 1.0), c in complex_matrix(3, 1.0)) {
        let br = |x: &CMatrix<f64>, y: &CMatrix<f64>| commutator(x, y).unwrap();
        let j = br(&a, &br(&b, &c)) + br(&b, &br(&c, &a)) + br(&c, &br(&a, &b));
        prop_assert!(frob(&j) <= 1e-12);
        prop_assert!(frob(&(br(&a, &b) + br(&b, &a))) == 0.0);
    }

    #[test]
    fn metric_connection_is_anti_hermitian(seed in 0u64..1000, r in point()) {
        let m = RandomSmoothFamily::<f64>::new(seed);
        for g in connection_g(&m, &r).unwrap().per_axis {
            prop_assert!(frob(&(&g + g.adjoint())) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn curvature_identities_hold_on_random_family(seed in 0u64..1000, r in point()) {
        let m = RandomSmoothFamily::<f64>::new(seed);
        let res = check_identities(&m, &r, 0, 1, 1e-4).unwrap();
        prop_assert!(res.curl_identity <= 1e-6, "curl {}", res.curl_identity);
        prop_assert!(res.similarity <= 1e-6, "similarity {}", res.similarity);
    }

    #[test]
    fn curvature_difference_relation_on_random_family(seed in 0u64..1000, r in point(), band in 0usize..2) {
        let m = RandomSmoothFamily::<f64>::new(seed);
        let c = berry_curvatures(&m, &r, band, 0, 1, 1e-4).unwrap();
        prop_assert!(c.relation_residual <= 1e-6, "residual {}", c.relation_residual);
    }

    #[test]
    fn transport_composes(seed in 0u64..1000, a in point(), b in point(), split in 1usize..64) {
        let m = RandomSmoothFamily::<f64>::new(seed);
        let path = PathSpec::waypoints(&m, vec![a, b, vec![0.1, -0.2]], false, 64).unwrap();
        let full = transport_unitary(&m, &path, &identity(2)).unwrap();
        let first = transport_unitary(&m, &path.slice(0, split), &identity(2)).unwrap();
        let second = transport_unitary(&m, &path.slice(split, path.steps()), first.endpoint()).unwrap();
        prop_assert!(frob(&(second.endpoint() - full.endpoint())) <= 1e-12);
    }

    #[test]
    fn reversed_loop_inverts_holonomy(seed in 0u64..1000, a in point(), b in point(), c in point()) {
        let m = RandomSmoothFamily::<f64>::new(seed);
        let lp = PathSpec::waypoints(&m, vec![a, b, c], true, 96).unwrap();
        let fwd = wilson_loop(&m, &lp, 1e-6).unwrap().w;
        let back = wilson_loop(&m, &lp.reversed(), 1e-6).unwrap().w;
        prop_assert!(frob(&(back * fwd - identity::<f64>(2))) <= 1e-8);
    }

    #[test]
    fn berry_phase_is_gauge_invariant(phases in prop::collection::vec(-PI..PI, 129), alpha in 0.3..1.4f64, r in 0.2..0.8f64) {
        let m = Example2::new(alpha);
        let lp = PathSpec::circle(&m, 1, vec![r, 0.0], 1, 128).unwrap();
        let tracked = track_band(&m, &lp, 0).unwrap();
        let regauged: Vec<CVector<f64>> = tracked.states.iter().zip(&phases).map(|(v, &p)| v * cis(p)).collect();
        let (g0, _) = berry_phase_of_states(&m, &lp, &tracked.states, Frame::Quasi).unwrap();
        let (g1, _) = berry_phase_of_states(&m, &lp, &regauged, Frame::Quasi).unwrap();
        prop_assert!(angle_distance(g0, g1) <= 1e-10);
    }

    #[test]
    fn hermitian_frame_phase_is_gauge_invariant(phases in prop::collection::vec(-PI..PI, 129), radius in 1.1..1.9f64) {
        let m = Example3::<f64>::new();
        let lp = PathSpec::circle(&m, 1, vec![radius, 0.0], 1, 128).unwrap();
        let tracked = track_band(&m, &lp, 1).unwrap();
        let regauged: Vec<CVector<f64>> = tracked.states.iter().zip(&phases).map(|(v, &p)| v * cis(p)).collect();
        let (g0, _) = berry_phase_of_states(&m, &lp, &tracked.states, Frame::Hermitian).unwrap();
        let (g1, _) = berry_phase_of_states(&m, &lp, &regauged, Frame::Hermitian).unwrap();
        prop_assert!(angle_distance(g0, g1) <= 1e-10);
    }
}

#[test]
fn single_precision_smoke() {
    let m = Example3::<f32>::new();
    let lp = PathSpec::circle(&m, 1, vec![1.5f32, 0.0], 1, 256).unwrap();
    let w = wilson_loop(&m, &lp, 1e-3).unwrap();
    assert!(frob(&(&w.w + identity::<f32>(2))) < 1e-3, "W = {}", w.w);
    let b = berry_phase(&m, &lp, 1, Frame::Hermitian).unwrap();
    assert!(angle_distance(b.phase, -std::f32::consts::PI) < 1e-3);

    let m2 = Example2::<f32>::new(std::f32::consts::FRAC_PI_2);
    let g = connection_g(&m2, &[0.6f32, 1.0]).unwrap();
    for gm in &g.per_axis {
        assert!(frob(&(gm + gm.adjoint())) < 1e-5);
    }
}
