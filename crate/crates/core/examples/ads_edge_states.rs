//! Open-boundary spectrum in the anomalous phase: boundary modes in every gap,
//! π-gap included, although every band has a trivial Zak phase.

use kickrotor::dynamics::{in_gap_states, EdgeOptions};
use kickrotor::topology::zak_along_k;
use kickrotor::{Convention, LatticeSpec, Mode, PulseVector};

fn main() -> kickrotor::Result<()> {
    let conv = Convention::default();
    let p = PulseVector::new(1.6, 0.0, 0.0, 6.0);
    let spec = LatticeSpec::new(401, 3)?;
    println!("Zak along k: {:?}", zak_along_k(3, &p, &conv, 256, 200)?);
    for gap in 1..=3 {
        let (arc, states) = in_gap_states(&p, &spec, gap, Mode::Exact, &conv, &EdgeOptions::default())?;
        println!("gap {gap}: bulk gap ({:+.4}, {:+.4}), {} in-gap states", arc.lower, arc.upper, states.len());
        for s in &states {
            println!(
                "   ε = {:+.5}  weight l<9: {:.3}  weight l>l_max-9: {:.3}  {:?}",
                s.quasienergy, s.weight_origin, s.weight_cutoff, s.boundary
            );
        }
    }
    Ok(())
}
