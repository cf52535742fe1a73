//! Zak phases along k at a few (P₁, P₄) points with P₂ = P₃ = 0.
//! The trivial region sits on the P₄ = 0 axis; the circle centre (1.6, 6.0) is
//! the anomalous phase with all-zero Zak phases.

use kickrotor::topology::zak_along_k;
use kickrotor::{Convention, PulseVector};

fn main() -> kickrotor::Result<()> {
    let conv = Convention::default();
    for (p1, p4) in [(1.0, 0.0), (0.3, 0.3), (2.0, 2.0), (4.0, 4.0), (1.6, 6.0)] {
        let z = zak_along_k(3, &PulseVector::new(p1, 0.0, 0.0, p4), &conv, 128, 200)?;
        let s: Vec<&str> = z.iter().map(|&g| if g == 0.0 { "0" } else { "π" }).collect();
        println!("P1 = {p1:<4} P4 = {p4:<4} Zak = [{}]", s.join(", "));
    }
    Ok(())
}
