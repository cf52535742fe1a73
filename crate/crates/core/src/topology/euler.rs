//! Euler form of a two-band subspace and the patch Euler class.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::floquet::{BandField, KAlphaGrid};
use crate::linalg::C64;

/// Rectangle of grid vertices [i0, i1] × [j0, j1] (indices wrap on the torus)
/// for the band pair (gap, gap + 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub i0: isize,
    pub i1: isize,
    pub j0: isize,
    pub j1: isize,
    pub gap: usize,
}

impl PatchSpec {
    /// Round a rectangle in (k, α) coordinates onto the grid.
    pub fn from_coords(k: [f64; 2], alpha: [f64; 2], gap: usize, grid: &KAlphaGrid) -> Result<Self> {
        let dk = 2.0 * std::f64::consts::PI / grid.n_k as f64;
        let da = 2.0 * std::f64::consts::PI / grid.n_alpha as f64;
        let p = PatchSpec {
            i0: (k[0] / dk - grid.k_shift).round() as isize,
            i1: (k[1] / dk - grid.k_shift).round() as isize,
            j0: (alpha[0] / da).round() as isize,
            j1: (alpha[1] / da).round() as isize,
            gap,
        };
        p.validate(grid)?;
        Ok(p)
    }

    pub fn validate(&self, grid: &KAlphaGrid) -> Result<()> {
        if self.i1 - self.i0 < 2 || self.j1 - self.j0 < 2 {
            return Err(Error::InvalidPatch(format!("patch {self:?} spans fewer than two plaquettes")));
        }
        if (self.i1 - self.i0) as usize >= grid.n_k || (self.j1 - self.j0) as usize >= grid.n_alpha {
            return Err(Error::InvalidPatch(format!("patch {self:?} wraps around the torus")));
        }
        Ok(())
    }

    fn width(&self) -> usize {
        (self.i1 - self.i0) as usize + 1
    }

    fn height(&self) -> usize {
        (self.j1 - self.j0) as usize + 1
    }
}

/// Frames on the vertices of a patch, local coordinates (a, b) = (i − i0, j − j0).
#[derive(Clone, Debug)]
pub struct PatchFrames {
    pub patch: PatchSpec,
    frames: Vec<DMatrix<f64>>,
}

impl PatchFrames {
    pub fn from_field(field: &BandField, patch: &PatchSpec) -> Self {
        let mut frames = Vec::with_capacity(patch.width() * patch.height());
        for b in 0..patch.height() as isize {
            for a in 0..patch.width() as isize {
                frames.push(field.at(patch.i0 + a, patch.j0 + b).frame.clone());
            }
        }
        PatchFrames { patch: *patch, frames }
    }

    pub fn get(&self, a: usize, b: usize) -> &DMatrix<f64> {
        &self.frames[b * self.patch.width() + a]
    }

    fn get_mut(&mut self, a: usize, b: usize) -> &mut DMatrix<f64> {
        let w = self.patch.width();
        &mut self.frames[b * w + a]
    }

    fn bands(&self) -> (usize, usize) {
        let n = self.frames[0].ncols();
        (self.patch.gap - 1, self.patch.gap % n)
    }

    /// Transport bands n, n+1 along the bottom row then up every column so all
    /// those links are positive; the start corner is put in the canonical sign.
    fn comb(&mut self) {
        let (n, m) = self.bands();
        {
            let f = self.get_mut(0, 0);
            for c in [n, m] {
                let mut col = f.column_mut(c);
                let mx = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let lead = col.iter().position(|x| x.abs() >= mx - 1e-12).unwrap_or(0);
                if col[lead] < 0.0 {
                    col.neg_mut();
                }
            }
        }
        let (w, h) = (self.patch.width(), self.patch.height());
        for a in 1..w {
            let r = self.get(a - 1, 0).clone();
            align(&r, self.get_mut(a, 0), &[n, m]);
        }
        for a in 0..w {
            for b in 1..h {
                let r = self.get(a, b - 1).clone();
                align(&r, self.get_mut(a, b), &[n, m]);
            }
        }
    }
}

fn align(reference: &DMatrix<f64>, cur: &mut DMatrix<f64>, bands: &[usize]) {
    for &c in bands {
        if reference.column(c).dot(&cur.column(c)) < 0.0 {
            cur.column_mut(c).neg_mut();
        }
    }
}

/// ⟨φ_A|φ_B⟩ with φ = (ψ_n + iψ_m)/√2.
pub fn complex_link(fa: &DMatrix<f64>, fb: &DMatrix<f64>, n: usize, m: usize) -> C64 {
    let (a, b) = (fa.column(n), fa.column(m));
    let (c, d) = (fb.column(n), fb.column(m));
    C64::new(0.5 * (a.dot(&c) + b.dot(&d)), 0.5 * (a.dot(&d) - b.dot(&c)))
}

fn sign_product(fs: [&DMatrix<f64>; 4], c: usize) -> f64 {
    let mut p = 1.0;
    for s in 0..4 {
        p *= fs[s].column(c).dot(&fs[(s + 1) % 4].column(c)).signum();
    }
    p
}

/// Per-plaquette Euler form on a patch, node plaquettes already replaced.
#[derive(Clone, Debug)]
pub struct EulerForm {
    pub patch: PatchSpec,
    /// local plaquette (a, b) at index b·(width−1) + a
    pub values: Vec<f64>,
    pub nodes: Vec<[usize; 2]>,
    /// plaquettes where only one of the two bands carries π flux
    pub adjacent_gap_nodes: Vec<[usize; 2]>,
}

impl EulerForm {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

const NEIGHBORS: [(isize, isize, f64); 8] = [
    (1, 0, 1.0 / 6.0),
    (-1, 0, 1.0 / 6.0),
    (0, 1, 1.0 / 6.0),
    (0, -1, 1.0 / 6.0),
    (1, 1, 1.0 / 12.0),
    (-1, 1, 1.0 / 12.0),
    (1, -1, 1.0 / 12.0),
    (-1, -1, 1.0 / 12.0),
];

/// Eu·dk·dα = −Arg of the complexified link product around each plaquette,
/// traversed (k,α) → (k,α+dα) → (k+dk,α+dα) → (k+dk,α).
pub fn euler_form(frames: &PatchFrames) -> Result<EulerForm> {
    let p = frames.patch;
    let (n, m) = frames.bands();
    let (pw, ph) = (p.width() - 1, p.height() - 1);
    let mut raw = vec![0.0; pw * ph];
    let mut nodes = HashSet::new();
    let mut adjacent = Vec::new();
    for b in 0..ph {
        for a in 0..pw {
            let c = [frames.get(a, b), frames.get(a, b + 1), frames.get(a + 1, b + 1), frames.get(a + 1, b)];
            let fl = (sign_product(c, n), sign_product(c, m));
            if fl.0 != fl.1 {
                adjacent.push([a, b]);
            } else if fl.0 < 0.0 {
                nodes.insert((a, b));
            }
            let prod = complex_link(c[0], c[1], n, m)
                * complex_link(c[1], c[2], n, m)
                * complex_link(c[2], c[3], n, m)
                * complex_link(c[3], c[0], n, m);
            raw[b * pw + a] = -prod.arg();
        }
    }
    let mut values = raw.clone();
    for &(a, b) in &nodes {
        let (mut s, mut w) = (0.0, 0.0);
        for (da, db, wt) in NEIGHBORS {
            let (x, y) = (a as isize + da, b as isize + db);
            if x < 0 || y < 0 || x >= pw as isize || y >= ph as isize || nodes.contains(&(x as usize, y as usize)) {
                continue;
            }
            s += wt * raw[y as usize * pw + x as usize];
            w += wt;
        }
        if w == 0.0 {
            return Err(Error::InvalidPatch(format!("node plaquette ({a}, {b}) has no regular neighbor")));
        }
        values[b * pw + a] = s / w;
    }
    let mut nodes: Vec<[usize; 2]> = nodes.into_iter().map(|(a, b)| [a, b]).collect();
    nodes.sort();
    Ok(EulerForm { patch: p, values, nodes, adjacent_gap_nodes: adjacent })
}

/// Euler form of a field taken as already gauge fixed.
pub fn euler_form_on_field(field: &BandField, patch: &PatchSpec) -> Result<EulerForm> {
    patch.validate(&field.grid)?;
    euler_form(&PatchFrames::from_field(field, patch))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatchResult {
    pub patch: PatchSpec,
    pub gap_pair: [usize; 2],
    pub chi_raw: f64,
    pub chi: i64,
    pub nodes_inside: usize,
    pub euler_sum: f64,
    pub boundary: f64,
}

pub const INTEGER_TOL: f64 = 1e-2;

/// χ = (Σ Eu − ∮ A)/2π on the patch.
pub fn patch_euler_class(patch: &PatchSpec, field: &BandField) -> Result<PatchResult> {
    patch.validate(&field.grid)?;
    let mut pf = PatchFrames::from_field(field, patch);
    pf.comb();
    let form = euler_form(&pf)?;
    if let Some(q) = form.adjacent_gap_nodes.first() {
        return Err(Error::InvalidPatch(format!(
            "{} plaquette(s) inside carry a node of an adjacent gap (first at local {:?}); bands {} and {} are not isolated",
            form.adjacent_gap_nodes.len(),
            q,
            patch.gap,
            patch.gap % field.n + 1
        )));
    }
    let (pw, ph) = (patch.width() - 1, patch.height() - 1);
    if let Some(q) = form.nodes.iter().find(|q| q[0] == 0 || q[1] == 0 || q[0] == pw - 1 || q[1] == ph - 1) {
        return Err(Error::InvalidPatch(format!("node plaquette at local {q:?} touches the patch boundary")));
    }

    // boundary: up the left side, along the top, down the right side, back along the bottom
    let (w, h) = (patch.width(), patch.height());
    let mut path: Vec<(usize, usize)> = (0..h).map(|b| (0, b)).collect();
    path.extend((1..w).map(|a| (a, h - 1)));
    path.extend((0..h - 1).rev().map(|b| (w - 1, b)));
    path.extend((0..w - 1).rev().map(|a| (a, 0)));
    let (n, m) = pf.bands();
    let first = pf.get(0, 0).clone();
    let mut cur = first.clone();
    let mut boundary = 0.0;
    for &(a, b) in &path[1..] {
        let mut next = pf.get(a, b).clone();
        align(&cur, &mut next, &[n, m]);
        boundary += -complex_link(&cur, &next, n, m).arg();
        cur = next;
    }
    for c in [n, m] {
        if first.column(c).dot(&cur.column(c)) <= 0.0 {
            return Err(Error::InvalidPatch(format!(
                "band {} does not return to itself around the boundary; a string of an adjacent gap crosses it",
                c + 1
            )));
        }
    }
    let euler_sum = form.total();
    let chi_raw = (euler_sum - boundary) / (2.0 * std::f64::consts::PI);
    let chi = chi_raw.round();
    if (chi_raw - chi).abs() > INTEGER_TOL {
        return Err(Error::Resolution {
            chi_raw,
            suggested_n_k: 2 * field.grid.n_k,
            suggested_n_alpha: 2 * field.grid.n_alpha,
        });
    }
    Ok(PatchResult {
        patch: *patch,
        gap_pair: [patch.gap, patch.gap % field.n + 1],
        chi_raw,
        chi: chi as i64,
        nodes_inside: form.nodes.len(),
        euler_sum,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{BandFrame, KAlphaGrid};

    fn constant_field(nk: usize, na: usize) -> BandField {
        let f = BandFrame {
            quasienergies: vec![-1.0, 0.0, 1.0],
            frame: DMatrix::identity(3, 3),
            residual_imag: 0.0,
            eigen_residual: 0.0,
            degenerate: vec![false; 3],
        };
        BandField::from_frames(3, KAlphaGrid::new(nk, na).unwrap(), vec![f; nk * na]).unwrap()
    }

    #[test]
    fn constant_frames_have_no_curvature() {
        let field = constant_field(10, 10);
        let p = PatchSpec { i0: -3, i1: 3, j0: 1, j1: 6, gap: 1 };
        let e = euler_form_on_field(&field, &p).unwrap();
        assert!(e.values.iter().all(|v| v.abs() < 1e-15));
        let r = patch_euler_class(&p, &field).unwrap();
        assert_eq!(r.chi, 0);
        assert!(r.chi_raw.abs() < 1e-15);
    }

    #[test]
    fn degenerate_patches_rejected() {
        let g = KAlphaGrid::new(10, 10).unwrap();
        assert!(PatchSpec { i0: 0, i1: 1, j0: 0, j1: 5, gap: 1 }.validate(&g).is_err());
        assert!(PatchSpec { i0: 0, i1: 10, j0: 0, j1: 5, gap: 1 }.validate(&g).is_err());
    }

    #[test]
    fn complexified_link_of_rotation() {
        let t: f64 = 0.3;
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let l = complex_link(&a, &b, 0, 1);
        assert!((l.arg() + t).abs() < 1e-14);
        assert!((l.norm() - 1.0).abs() < 1e-14);
    }
}
