//! The open lattice far from both ends behaves like the infinite one: a Fourier
//! sum over cells of the real-space operator reproduces the Bloch spectrum.

use kickrotor::dynamics::Preset;
use kickrotor::floquet::{build_u_tkr_bloch, quasienergies, Gauge, Layout, RealKicks};
use kickrotor::linalg::{circ_dist, CMat, C64};
use kickrotor::{Convention, LatticeSpec, Mode, PulseVector};
use std::f64::consts::PI;

const L_MAX: usize = 600;
const REACH: isize = 40;

/// Cell-periodic real-space operator: the symmetric three-kick period conjugated
/// by the free half step, or the interleaved period as is.
fn cell_periodic(p: &PulseVector, conv: &Convention) -> CMat {
    let spec = LatticeSpec::new(L_MAX, 3).unwrap();
    let rk = RealKicks::new(&spec, p, Mode::Asymptotic, conv).unwrap();
    let mut u = rk.matrix();
    if conv.layout == Layout::ThreeKick {
        let h = rk.half_step();
        for r in 0..u.nrows() {
            for c in 0..u.ncols() {
                u[(r, c)] *= h[c] / h[r];
            }
        }
    }
    u
}

fn reduced(u: &CMat, n: usize, k: f64) -> CMat {
    let c = (u.nrows() / n / 2) as isize;
    let ni = n as isize;
    CMat::from_fn(n, n, |i, j| {
        (-REACH..=REACH)
            .map(|m| C64::from_polar(1.0, -(m as f64) * k) * u[((ni * (c + m)) as usize + i, (ni * c) as usize + j)])
            .sum()
    })
}

fn max_mismatch(p: &PulseVector, conv: &Convention) -> f64 {
    let u = cell_periodic(p, conv);
    let mut worst = 0.0f64;
    for s in 0..24 {
        let k = 2.0 * PI * (s as f64 + 0.3) / 24.0;
        let a = quasienergies(&reduced(&u, 3, k)).unwrap();
        let b = quasienergies(&build_u_tkr_bloch(3, k, 0.0, p, conv, Gauge::Asymmetric).unwrap().matrix).unwrap();
        for e in &a {
            worst = worst.max(b.iter().map(|&f| circ_dist(*e, f)).fold(f64::INFINITY, f64::min));
        }
    }
    worst
}

#[test]
fn bulk_matches_bloch_three_kick() {
    for alpha in [0.0, 1.3, 4.0] {
        let p = Preset::Fig1Circle.pulses(alpha);
        let d = max_mismatch(&p, &Convention::default());
        assert!(d < 1e-6, "α = {alpha}: mismatch {d:e}");
    }
    let p = Preset::Fig3Family { beta: 0.3 }.pulses(0.7);
    assert!(max_mismatch(&p, &Convention::default()) < 1e-6);
}

#[test]
fn bulk_matches_bloch_interleaved() {
    let p = PulseVector::new(1.1, 0.6, 0.4, 2.0);
    let d = max_mismatch(&p, &Convention::interleaved());
    assert!(d < 1e-6, "mismatch {d:e}");
}
