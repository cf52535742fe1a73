//! Energy absorption over one α cycle: a thermal cloud heats, a π-gap edge
//! state barely moves.

use kickrotor::dynamics::{edge_state, evolve, thermal_state, EdgeOptions, ProtocolSpec, DEFAULT_TAIL_THRESHOLD};
use kickrotor::{Convention, LatticeSpec, Mode};

fn main() -> kickrotor::Result<()> {
    let conv = Convention::default();
    let spec = LatticeSpec::new(401, 3)?;
    let protocol = ProtocolSpec::fig1_circle(40, 1);
    let thermal = thermal_state(0.17, &spec)?;
    let edge = edge_state(&protocol.pulses(0.0), &spec, 3, Mode::Exact, &conv, &EdgeOptions::default())?;
    for (name, psi) in [("thermal", thermal), ("edge", edge)] {
        let t = evolve(&psi, &protocol, &spec, Mode::Exact, &conv, DEFAULT_TAIL_THRESHOLD)?;
        let l2: Vec<String> = t.rows.iter().step_by(8).map(|r| format!("{:.1}", r.l2_expectation)).collect();
        println!("{name:>8}: <L²> every 8 periods {}  final {:.1}", l2.join(" "), t.final_l2());
        println!("{:>8}  norm drift {:.1e}, tail mass {:.1e}, reliable {}", "", t.max_norm_drift(), t.max_tail(), t.reliable);
    }
    Ok(())
}
