use kickrotor::angular::bloch_potential;
use kickrotor::dynamics::{evolve, observables, thermal_state, ProtocolSpec, RotorState};
use kickrotor::floquet::{build_u_tkr_bloch, frame_at, quasienergies, Gauge, RealKicks};
use kickrotor::linalg::{circ_dist, unitarity_defect, MaxAbs};
use kickrotor::{Convention, LatticeSpec, Mode, PulseVector};
use proptest::prelude::*;
use std::f64::consts::PI;

fn pulses() -> impl Strategy<Value = PulseVector> {
    (0.0..8.0f64, 0.0..3.0f64, 0.0..3.0f64, 0.0..8.0f64).prop_map(|(a, b, c, d)| PulseVector::new(a, b, c, d))
}

fn convention() -> impl Strategy<Value = Convention> {
    prop_oneof![Just(Convention::default()), Just(Convention::interleaved())]
}

fn same_spectrum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().map(|&x| b.iter().map(|&y| circ_dist(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bloch_potential_hermitian_and_reciprocal(k in -PI..PI, p1 in -5.0..5.0f64, p2 in -5.0..5.0f64) {
        let v = bloch_potential(3, k, p1, p2).unwrap();
        prop_assert!((&v - v.adjoint()).max_abs() < 1e-14);
        let w = bloch_potential(3, -k, p1, p2).unwrap();
        prop_assert!((v.map(|z| z.conj()) - w).max_abs() < 1e-14);
    }

    #[test]
    fn floquet_operator_unitary(p in pulses(), k in 0.0..2.0 * PI, conv in convention()) {
        for gauge in [Gauge::Symmetric, Gauge::Asymmetric] {
            let u = build_u_tkr_bloch(3, k, 0.0, &p, &conv, gauge).unwrap();
            prop_assert!(unitarity_defect(&u.matrix) < 1e-12);
        }
    }

    #[test]
    fn spectrum_even_in_k_and_gauge_free(p in pulses(), k in 0.0..2.0 * PI, conv in convention()) {
        let e = |k, g| quasienergies(&build_u_tkr_bloch(3, k, 0.0, &p, &conv, g).unwrap().matrix).unwrap();
        let a = e(k, Gauge::Symmetric);
        prop_assert!(same_spectrum(&a, &e(-k, Gauge::Symmetric)) < 1e-10);
        prop_assert!(same_spectrum(&a, &e(k, Gauge::Asymmetric)) < 1e-10);
    }

    #[test]
    fn realified_frame_is_real_and_orthonormal(p in pulses(), k in 0.0..2.0 * PI) {
        let f = frame_at(3, k, 0.0, &p, &Convention::default()).unwrap();
        prop_assert!(f.residual_imag < 1e-8);
        let g = f.frame.transpose() * &f.frame;
        prop_assert!((g - nalgebra::DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn real_space_operator_is_symmetric(p in pulses(), exact in any::<bool>()) {
        let mode = if exact { Mode::Exact } else { Mode::Asymptotic };
        let spec = LatticeSpec::new(44, 3).unwrap();
        let u = RealKicks::new(&spec, &p, mode, &Convention::default()).unwrap().matrix();
        prop_assert!((&u - u.transpose()).max_abs() < 1e-12);
        prop_assert!(unitarity_defect(&u) < 1e-11);
    }

    #[test]
    fn thermal_state_normalized(theta in 0.05..5.0f64) {
        let s = thermal_state(theta, &LatticeSpec::new(200, 3).unwrap()).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        prop_assert!(s.amplitudes.iter().all(|z| z.im == 0.0 && z.re >= 0.0));
        let (_, pops) = observables(&s);
        prop_assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evolution_preserves_norm(p in pulses(), l0 in 0usize..20) {
        let spec = LatticeSpec::new(150, 3).unwrap();
        let psi = RotorState::basis(spec.dim(), l0);
        let t = evolve(&psi, &ProtocolSpec::constant(p), &spec, Mode::Exact, &Convention::default(), 1.0).unwrap();
        prop_assert!(t.max_norm_drift() < 1e-10);
    }
}
