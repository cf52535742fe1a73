//! Zak phases, band nodes, Dirac strings and the patch Euler class.

mod euler;
mod nodal_map;
mod nodes;
mod strings;
mod zak;

pub use euler::{
    complex_link, euler_form, euler_form_on_field, patch_euler_class, EulerForm, PatchFrames, PatchResult, PatchSpec,
    INTEGER_TOL,
};
pub use nodal_map::{nodal_line_map, write_nodal_csv, LineKind, NodalMapSpec, NodalPoint};
pub use nodes::{detect_all_nodes, detect_nodes, flux_signs, plaquette_product, NodeRecord};
pub use strings::{assign_dirac_strings, Crossings, DiracString, GaugeFixed};
pub use zak::{zak_alpha_loops, zak_along_k, zak_k_loops, zak_loops, zak_phase, Direction, ZakRecord, MIN_OVERLAP};

use serde::Serialize;

use crate::error::Result;
use crate::floquet::BandField;

/// Everything the topology pipeline derives from one band field.
#[derive(Clone, Debug, Serialize)]
pub struct TopologyReport {
    /// nodes per gap, gap 1 first
    pub node_counts: Vec<usize>,
    pub nodes: Vec<NodeRecord>,
    pub strings: Vec<DiracString>,
    pub zak: Vec<ZakRecord>,
    /// loops skipped because consecutive frames barely overlap (next to a node)
    pub unresolved_loops: Vec<ZakRecord>,
    pub patches: Vec<PatchResult>,
}

/// detect → pair → gauge fix → Zak → χ.
pub fn analyze(field: &BandField, patches: &[PatchSpec]) -> Result<(TopologyReport, GaugeFixed)> {
    let nodes = detect_all_nodes(field)?;
    let fixed = assign_dirac_strings(field, &nodes)?;
    let (mut zak, mut unresolved_loops) = (Vec::new(), Vec::new());
    for dir in [Direction::K, Direction::Alpha] {
        for (z, r) in zak_loops(field, dir)? {
            if r.is_ok() {
                zak.push(z);
            } else {
                unresolved_loops.push(z);
            }
        }
    }
    let patches = patches.iter().map(|p| patch_euler_class(p, &fixed.field)).collect::<Result<Vec<_>>>()?;
    let node_counts = (1..=field.n).map(|g| fixed.nodes.iter().filter(|r| r.gap == g).count()).collect();
    Ok((
        TopologyReport {
            node_counts,
            nodes: fixed.nodes.clone(),
            strings: fixed.strings.clone(),
            zak,
            unresolved_loops,
            patches,
        },
        fixed,
    ))
}
