//! Node braiding along the β family: count nodes, pair them by Dirac strings and
//! evaluate the Euler class of the gap-1 pair on a fixed patch.

use kickrotor::dynamics::ProtocolSpec;
use kickrotor::floquet::band_grid;
use kickrotor::topology::{analyze, PatchSpec};
use kickrotor::{Convention, KAlphaGrid};
use std::f64::consts::PI;

fn main() -> kickrotor::Result<()> {
    let grid = KAlphaGrid::new(100, 100)?;
    let patch = PatchSpec::from_coords([-0.8 * PI, 0.8 * PI], [-0.2 * PI, 0.4 * PI], 1, &grid)?;
    for beta in [0.15, 0.21, 0.3] {
        let field = band_grid(3, grid, &ProtocolSpec::fig3_family(beta, 40, 1), &Convention::default())?;
        let (report, _) = analyze(&field, &[])?;
        println!("β = {beta}: nodes per gap {:?}, {} strings", report.node_counts, report.strings.len());
        for n in &report.nodes {
            println!("   gap {} at k = {:+.3}, α = {:+.3}, flux {:+}", n.gap, n.k, n.alpha, n.flux);
        }
        match analyze(&field, std::slice::from_ref(&patch)) {
            Ok((r, _)) => {
                let p = &r.patches[0];
                println!("   χ{}{} = {} (raw {:.6})", p.gap_pair[0], p.gap_pair[1], p.chi, p.chi_raw);
            }
            Err(e) => println!("   patch: {e}"),
        }
    }
    Ok(())
}
