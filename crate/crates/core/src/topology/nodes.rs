use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::BandField;

/// Product of the four single-band links around plaquette (i, j),
/// traversed (i,j) → (i+1,j) → (i+1,j+1) → (i,j+1).
pub fn plaquette_product(field: &BandField, i: isize, j: isize, band: usize) -> f64 {
    field.link((i, j), (i + 1, j), band)
        * field.link((i + 1, j), (i + 1, j + 1), band)
        * field.link((i + 1, j + 1), (i, j + 1), band)
        * field.link((i, j + 1), (i, j), band)
}

/// Φ_band on every plaquette, α-major.
pub fn flux_signs(field: &BandField, band: usize) -> Vec<i8> {
    let g = field.grid;
    let mut out = Vec::with_capacity(g.len());
    for j in 0..g.n_alpha as isize {
        for i in 0..g.n_k as isize {
            out.push(if plaquette_product(field, i, j, band) < 0.0 { -1 } else { 1 });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRecord {
    pub id: usize,
    /// 1-based; gap N pairs band N with band 1
    pub gap: usize,
    pub plaquette: [usize; 2],
    pub k: f64,
    pub alpha: f64,
    pub flux: i8,
    pub partner: Option<usize>,
    pub string_path: Vec<[usize; 2]>,
}

const LINE_POINTS: usize = 3;

/// Plaquettes whose two adjacent bands both carry π flux.
pub fn detect_nodes(field: &BandField, gap: usize) -> Result<Vec<NodeRecord>> {
    let n = field.n;
    if gap == 0 || gap > n {
        return Err(Error::Config(format!("gap: must be in 1..={n}, got {gap}")));
    }
    field.require_closed()?;
    let g = field.grid;
    let (lo, hi) = (gap - 1, gap % n);
    let degenerate: Vec<usize> = (0..g.len()).filter(|&idx| field.frames[idx].degenerate[lo]).collect();
    if degenerate.len() >= LINE_POINTS {
        return Err(Error::DegenerateLine { gap, points: degenerate.len() });
    }
    let offset = (g.k_shift + 0.25).fract();
    let half_dk = std::f64::consts::PI / g.n_k as f64;
    if let Some(&idx) = degenerate.first() {
        return Err(Error::Regrid { gap, i: idx % g.n_k, j: idx / g.n_k, suggested_offset: offset });
    }
    let mut out = Vec::new();
    for j in 0..g.n_alpha as isize {
        for i in 0..g.n_k as isize {
            let a = plaquette_product(field, i, j, lo);
            let b = plaquette_product(field, i, j, hi);
            if a.abs() < 1e-12 || b.abs() < 1e-12 {
                return Err(Error::Regrid { gap, i: i as usize, j: j as usize, suggested_offset: offset });
            }
            if a < 0.0 && b < 0.0 {
                out.push(NodeRecord {
                    id: out.len(),
                    gap,
                    plaquette: [i as usize, j as usize],
                    k: g.k(i) + half_dk,
                    alpha: g.alpha(j) + std::f64::consts::PI / g.n_alpha as f64,
                    flux: -1,
                    partner: None,
                    string_path: Vec::new(),
                });
            }
        }
    }
    Ok(out)
}

/// Nodes of every gap, ids renumbered to be unique across gaps.
pub fn detect_all_nodes(field: &BandField) -> Result<Vec<NodeRecord>> {
    let mut all = Vec::new();
    for gap in 1..=field.n {
        for mut r in detect_nodes(field, gap)? {
            r.id = all.len();
            all.push(r);
        }
    }
    Ok(all)
}
