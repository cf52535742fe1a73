//! Nodal lines over the (P₁, P₄) plane, drawn per gap as text.
//! `0` k = 0 line, `p` k = π line, `g` generic (k, −k) pair, `*` several.

use kickrotor::topology::{nodal_line_map, LineKind, NodalMapSpec};
use kickrotor::Convention;

fn main() -> kickrotor::Result<()> {
    let spec = NodalMapSpec { n_p1: 24, n_p4: 24, ..NodalMapSpec::default() };
    let pts = nodal_line_map(3, &spec, &Convention::default())?;
    for gap in 1..=3 {
        println!("gap {gap} (P4 up, P1 right)");
        for j in (0..spec.n_p4).rev() {
            let row: String = (0..spec.n_p1)
                .map(|i| {
                    let p = &pts[i * spec.n_p4 + j];
                    let kinds: Vec<LineKind> = p.flags.iter().filter(|f| f.0 == gap).map(|f| f.1).collect();
                    match kinds.as_slice() {
                        [] => '.',
                        [LineKind::K0] => '0',
                        [LineKind::KPi] => 'p',
                        [LineKind::Generic] => 'g',
                        [LineKind::Degenerate] => 'D',
                        _ => '*',
                    }
                })
                .collect();
            println!("  {row}");
        }
    }
    Ok(())
}
