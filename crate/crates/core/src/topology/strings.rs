//! Dirac strings and the sign gauge they induce on real frames.

use serde::Serialize;

use super::nodes::NodeRecord;
use super::zak::Direction;
use crate::error::{Error, Result};
use crate::floquet::{BandField, KAlphaGrid};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracString {
    pub gap: usize,
    /// node ids at the two ends; None for strings winding around the torus
    pub nodes: Option<[usize; 2]>,
    /// plaquettes visited, in order
    pub string: Vec<[usize; 2]>,
    pub winding: Option<Direction>,
}

/// Per-gap parity of string crossings on every grid link.
/// k-link (i, j) joins (i, j)–(i+1, j); α-link (i, j) joins (i, j)–(i, j+1).
#[derive(Clone, Debug)]
pub struct Crossings {
    grid: KAlphaGrid,
    k_links: Vec<Vec<u8>>,
    a_links: Vec<Vec<u8>>,
}

impl Crossings {
    fn new(grid: KAlphaGrid, gaps: usize) -> Self {
        Crossings { grid, k_links: vec![vec![0; grid.len()]; gaps], a_links: vec![vec![0; grid.len()]; gaps] }
    }

    fn toggle(&mut self, gap0: usize, dir: Direction, i: isize, j: isize) {
        let idx = self.grid.index(i, j);
        match dir {
            Direction::K => self.k_links[gap0][idx] ^= 1,
            Direction::Alpha => self.a_links[gap0][idx] ^= 1,
        }
    }

    /// Parity of crossings felt by `band` (strings of its two adjacent gaps).
    pub fn band_parity(&self, band: usize, dir: Direction, i: isize, j: isize) -> u8 {
        let n = self.k_links.len();
        let idx = self.grid.index(i, j);
        let links = match dir {
            Direction::K => &self.k_links,
            Direction::Alpha => &self.a_links,
        };
        links[band][idx] ^ links[(band + n - 1) % n][idx]
    }

    /// Parity of crossings along the k loop at row j.
    pub fn k_loop_parity(&self, band: usize, j: isize) -> u8 {
        (0..self.grid.n_k as isize).fold(0, |p, i| p ^ self.band_parity(band, Direction::K, i, j))
    }

    /// Parity of crossings along the α loop at column i.
    pub fn alpha_loop_parity(&self, band: usize, i: isize) -> u8 {
        (0..self.grid.n_alpha as isize).fold(0, |p, j| p ^ self.band_parity(band, Direction::Alpha, i, j))
    }
}

/// Gauge-fixed field: every link is positive except where a string crosses it.
#[derive(Clone, Debug)]
pub struct GaugeFixed {
    pub field: BandField,
    pub nodes: Vec<NodeRecord>,
    pub strings: Vec<DiracString>,
    pub crossings: Crossings,
}

fn torus_steps(from: usize, to: usize, n: usize) -> isize {
    let d = (to + n - from) % n;
    if d <= n / 2 {
        d as isize
    } else {
        d as isize - n as isize
    }
}

fn torus_distance(a: [usize; 2], b: [usize; 2], g: &KAlphaGrid) -> usize {
    torus_steps(a[0], b[0], g.n_k).unsigned_abs() + torus_steps(a[1], b[1], g.n_alpha).unsigned_abs()
}

/// Dual-lattice path from plaquette a to b, k first, toggling every link it crosses.
fn trace_path(a: [usize; 2], b: [usize; 2], gap0: usize, cr: &mut Crossings) -> Vec<[usize; 2]> {
    let g = cr.grid;
    let (mut i, mut j) = (a[0] as isize, a[1] as isize);
    let mut path = vec![a];
    let di = torus_steps(a[0], b[0], g.n_k);
    for _ in 0..di.unsigned_abs() {
        if di > 0 {
            cr.toggle(gap0, Direction::Alpha, i + 1, j);
            i += 1;
        } else {
            cr.toggle(gap0, Direction::Alpha, i, j);
            i -= 1;
        }
        let w = g.wrap(i, j);
        path.push([w.0, w.1]);
    }
    let dj = torus_steps(a[1], b[1], g.n_alpha);
    for _ in 0..dj.unsigned_abs() {
        if dj > 0 {
            cr.toggle(gap0, Direction::K, i, j + 1);
            j += 1;
        } else {
            cr.toggle(gap0, Direction::K, i, j);
            j -= 1;
        }
        let w = g.wrap(i, j);
        path.push([w.0, w.1]);
    }
    path
}

/// Greedy minimal-length pairing within each gap; ties go to the lowest ids.
fn pair_nodes(nodes: &mut [NodeRecord], g: &KAlphaGrid) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    let gaps: std::collections::BTreeSet<usize> = nodes.iter().map(|r| r.gap).collect();
    for gap in gaps {
        let ids: Vec<usize> = (0..nodes.len()).filter(|&x| nodes[x].gap == gap).collect();
        if ids.len() % 2 == 1 {
            return Err(Error::Internal(format!("odd number of nodes ({}) in gap {gap}", ids.len())));
        }
        let mut cand = Vec::new();
        for (x, &a) in ids.iter().enumerate() {
            for &b in &ids[x + 1..] {
                cand.push((torus_distance(nodes[a].plaquette, nodes[b].plaquette, g), a, b));
            }
        }
        cand.sort();
        let mut used = vec![false; nodes.len()];
        for (_, a, b) in cand {
            if !used[a] && !used[b] {
                used[a] = true;
                used[b] = true;
                pairs.push((a, b));
            }
        }
    }
    Ok(pairs)
}

/// Comb sign gauge for one band honoring the crossing targets; returns the
/// per-point signs plus the k-seam and α-seam mismatches (0 or 1).
fn comb(field: &BandField, cr: &Crossings, band: usize) -> Result<(Vec<f64>, u8, u8)> {
    let g = field.grid;
    let (nk, na) = (g.n_k as isize, g.n_alpha as isize);
    let mut s = vec![1.0; g.len()];
    let target = |dir, i, j| if cr.band_parity(band, dir, i, j) == 1 { -1.0 } else { 1.0 };
    let raw = |a: (isize, isize), b: (isize, isize)| {
        let o = field.link(a, b, band);
        if o < 0.0 {
            -1.0
        } else {
            1.0
        }
    };
    for i in 1..nk {
        s[g.index(i, 0)] = s[g.index(i - 1, 0)] * raw((i - 1, 0), (i, 0)) * target(Direction::K, i - 1, 0);
    }
    for i in 0..nk {
        for j in 1..na {
            s[g.index(i, j)] = s[g.index(i, j - 1)] * raw((i, j - 1), (i, j)) * target(Direction::Alpha, i, j - 1);
        }
    }
    let ok = |dir, a: (isize, isize), b: (isize, isize)| {
        s[g.index(a.0, a.1)] * s[g.index(b.0, b.1)] * raw(a, b) * target(dir, a.0, a.1) > 0.0
    };
    for j in 1..na {
        for i in 0..nk - 1 {
            if !ok(Direction::K, (i, j), (i + 1, j)) {
                return Err(Error::Internal(format!(
                    "band {} has an unmatched π flux near plaquette ({i}, {}); refine the grid",
                    band + 1,
                    j - 1
                )));
            }
        }
    }
    let seam = |vals: Vec<bool>, what: &str| -> Result<u8> {
        let first = vals[0];
        if vals.iter().any(|&v| v != first) {
            return Err(Error::Internal(format!("inconsistent {what} seam for band {}", band + 1)));
        }
        Ok(if first { 0 } else { 1 })
    };
    let wk = seam((0..na).map(|j| ok(Direction::K, (nk - 1, j), (nk, j))).collect(), "k")?;
    let wa = seam((0..nk).map(|i| ok(Direction::Alpha, (i, na - 1), (i, na))).collect(), "alpha")?;
    Ok((s, wk, wa))
}

/// Solve w_m = x_m + x_{m−1} (mod 2) for the gap windings x, fewest strings.
fn assign_windings(w: &[u8]) -> Result<Vec<u8>> {
    let n = w.len();
    let mut best: Option<Vec<u8>> = None;
    for x0 in 0..2u8 {
        let mut x = vec![0u8; n];
        x[0] = x0;
        // band m sees gaps m and m−1: w[m] = x[m] ^ x[m−1]
        for m in 1..n {
            x[m] = w[m] ^ x[m - 1];
        }
        if (x[0] ^ x[n - 1]) != w[0] {
            continue;
        }
        let count = x.iter().filter(|&&v| v == 1).count();
        if best.as_ref().map_or(true, |b| count < b.iter().filter(|&&v| v == 1).count()) {
            best = Some(x);
        }
    }
    best.ok_or_else(|| Error::Internal(format!("seam mismatches {w:?} cannot be carried by strings")))
}

pub fn assign_dirac_strings(field: &BandField, nodes: &[NodeRecord]) -> Result<GaugeFixed> {
    field.require_closed()?;
    let g = field.grid;
    let n = field.n;
    let mut nodes = nodes.to_vec();
    let mut cr = Crossings::new(g, n);
    let mut strings = Vec::new();
    for (a, b) in pair_nodes(&mut nodes, &g)? {
        let gap0 = nodes[a].gap - 1;
        let path = trace_path(nodes[a].plaquette, nodes[b].plaquette, gap0, &mut cr);
        nodes[a].partner = Some(nodes[b].id);
        nodes[b].partner = Some(nodes[a].id);
        nodes[a].string_path = path.clone();
        let mut rev = path.clone();
        rev.reverse();
        nodes[b].string_path = rev;
        strings.push(DiracString { gap: gap0 + 1, nodes: Some([nodes[a].id, nodes[b].id]), string: path, winding: None });
    }

    let mut wk = vec![0u8; n];
    let mut wa = vec![0u8; n];
    for band in 0..n {
        let (_, k, a) = comb(field, &cr, band)?;
        wk[band] = k;
        wa[band] = a;
    }
    let (nk, na) = (g.n_k as isize, g.n_alpha as isize);
    for (gap0, &x) in assign_windings(&wk)?.iter().enumerate() {
        if x == 1 {
            // dual loop along α at the k seam, crossing every k-link (n_k − 1, j)
            for j in 0..na {
                cr.toggle(gap0, Direction::K, nk - 1, j);
            }
            strings.push(DiracString {
                gap: gap0 + 1,
                nodes: None,
                string: (0..g.n_alpha).map(|j| [g.n_k - 1, j]).collect(),
                winding: Some(Direction::Alpha),
            });
        }
    }
    for (gap0, &x) in assign_windings(&wa)?.iter().enumerate() {
        if x == 1 {
            for i in 0..nk {
                cr.toggle(gap0, Direction::Alpha, i, na - 1);
            }
            strings.push(DiracString {
                gap: gap0 + 1,
                nodes: None,
                string: (0..g.n_k).map(|i| [i, g.n_alpha - 1]).collect(),
                winding: Some(Direction::K),
            });
        }
    }

    let mut fixed = field.clone();
    for band in 0..n {
        let (s, k, a) = comb(field, &cr, band)?;
        if k != 0 || a != 0 {
            return Err(Error::Internal(format!("band {} still mismatched after winding strings", band + 1)));
        }
        for (idx, sign) in s.iter().enumerate() {
            if *sign < 0.0 {
                fixed.frames[idx].frame.column_mut(band).neg_mut();
            }
        }
    }
    Ok(GaugeFixed { field: fixed, nodes, strings, crossings: cr })
}
