//! Free rotor at resonance. The three-kick layout with unit multiplier is the
//! identity, the interleaved one has the familiar {−2π/3, 0, 0} bands.

use kickrotor::floquet::{build_u_tkr_bloch, quasienergies, Gauge};
use kickrotor::{Convention, PulseVector};
use std::f64::consts::PI;

fn main() -> kickrotor::Result<()> {
    for (name, conv) in [("three-kick", Convention::default()), ("interleaved", Convention::interleaved())] {
        let mut worst = 0.0f64;
        let mut eps = Vec::new();
        for i in 0..64 {
            let k = 2.0 * PI * i as f64 / 64.0;
            let u = build_u_tkr_bloch(3, k, 0.0, &PulseVector::ZERO, &conv, Gauge::Symmetric)?;
            eps = quasienergies(&u.matrix)?;
            worst = worst.max(eps.iter().zip(&eps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        println!("{name:>12}: quasienergies {:?} (k-independent, spread {worst:.1e})", eps);
    }
    println!("−2π/3 = {:.15}", -2.0 * PI / 3.0);
    Ok(())
}
