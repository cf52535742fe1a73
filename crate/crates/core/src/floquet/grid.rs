use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use super::{frame_at, BandFrame, Convention};
use crate::angular::{check_odd_n, PulseVector};
use crate::dynamics::ProtocolSpec;
use crate::error::{Error, Result};
use crate::linalg::{circ_dist, fmt_num};

/// Uniform grid on the (k, α) torus; point (i, j) sits at (2π(i + k_shift)/n_k, 2πj/n_alpha).
///
/// The default half-spacing shift keeps k = 0 and k = π (for even n_k) off the
/// vertices, so band crossings pinned to those lines fall inside plaquettes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KAlphaGrid {
    pub n_k: usize,
    pub n_alpha: usize,
    #[serde(default = "default_k_shift")]
    pub k_shift: f64,
}

fn default_k_shift() -> f64 {
    0.5
}

impl KAlphaGrid {
    pub fn new(n_k: usize, n_alpha: usize) -> Result<Self> {
        if n_k < 3 || n_alpha < 3 {
            return Err(Error::Config(format!("grid: sizes must be >= 3, got {n_k}x{n_alpha}")));
        }
        Ok(KAlphaGrid { n_k, n_alpha, k_shift: default_k_shift() })
    }

    pub fn with_k_shift(self, k_shift: f64) -> Self {
        KAlphaGrid { k_shift, ..self }
    }

    pub fn k(&self, i: isize) -> f64 {
        2.0 * PI * (i as f64 + self.k_shift) / self.n_k as f64
    }

    pub fn alpha(&self, j: isize) -> f64 {
        2.0 * PI * j as f64 / self.n_alpha as f64
    }

    pub fn wrap(&self, i: isize, j: isize) -> (usize, usize) {
        (i.rem_euclid(self.n_k as isize) as usize, j.rem_euclid(self.n_alpha as isize) as usize)
    }

    pub fn index(&self, i: isize, j: isize) -> usize {
        let (i, j) = self.wrap(i, j);
        j * self.n_k + i
    }

    pub fn len(&self) -> usize {
        self.n_k * self.n_alpha
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Band frames on the whole torus, labels continued from the origin.
#[derive(Clone, Debug)]
pub struct BandField {
    pub n: usize,
    pub grid: KAlphaGrid,
    pub frames: Vec<BandFrame>,
    /// cyclic label mismatch accumulated around the k loop and the α loop
    pub wrap_shift: (usize, usize),
}

impl BandField {
    pub fn at(&self, i: isize, j: isize) -> &BandFrame {
        &self.frames[self.grid.index(i, j)]
    }

    /// ⟨ψ_m(a)|ψ_m(b)⟩ for a single band.
    pub fn link(&self, a: (isize, isize), b: (isize, isize), band: usize) -> f64 {
        self.at(a.0, a.1).frame.column(band).dot(&self.at(b.0, b.1).frame.column(band))
    }

    /// Full overlap matrix ψ(a)ᵀ ψ(b).
    pub fn overlap(&self, a: (isize, isize), b: (isize, isize)) -> DMatrix<f64> {
        self.at(a.0, a.1).frame.transpose() * &self.at(b.0, b.1).frame
    }

    pub fn max_residual_imag(&self) -> f64 {
        self.frames.iter().map(|f| f.residual_imag).fold(0.0, f64::max)
    }

    /// Check that labels close around both loops.
    pub fn require_closed(&self) -> Result<()> {
        if self.wrap_shift != (0, 0) {
            return Err(Error::Internal(format!(
                "band labels wind around the torus (k shift {}, alpha shift {})",
                self.wrap_shift.0, self.wrap_shift.1
            )));
        }
        Ok(())
    }

    pub fn from_frames(n: usize, grid: KAlphaGrid, frames: Vec<BandFrame>) -> Result<Self> {
        let mut f = BandField { n, grid, frames, wrap_shift: (0, 0) };
        f.continue_labels()?;
        Ok(f)
    }

    /// Sequential continuity pass: row α₀ along k, then every column up in α.
    fn continue_labels(&mut self) -> Result<()> {
        let g = self.grid;
        for j in 0..g.n_alpha as isize {
            for i in 0..g.n_k as isize {
                if i == 0 && j == 0 {
                    continue;
                }
                let r = if j == 0 { (i - 1, 0) } else { (i, j - 1) };
                let shift = best_shift(self.at(r.0, r.1), self.at(i, j)).ok_or(Error::Continuity {
                    i: i as usize,
                    j: j as usize,
                })?;
                let idx = g.index(i, j);
                self.frames[idx].roll(shift);
            }
        }
        let nk = g.n_k as isize;
        let na = g.n_alpha as isize;
        let sk = best_shift(self.at(nk - 1, 0), self.at(0, 0)).unwrap_or(0);
        let sa = best_shift(self.at(0, na - 1), self.at(0, 0)).unwrap_or(0);
        self.wrap_shift = (sk, sa);
        Ok(())
    }
}

/// Cyclic relabeling of `cur` that best continues `reference`.
/// None when neither overlaps nor eigenvalues decide and the point is not degenerate.
pub(crate) fn best_shift(reference: &BandFrame, cur: &BandFrame) -> Option<usize> {
    let n = reference.n();
    let ov = reference.frame.transpose() * &cur.frame;
    let mut by_overlap: Vec<(f64, usize)> = (0..n)
        .map(|s| ((0..n).map(|b| ov[(b, (b + s) % n)].abs()).sum::<f64>(), s))
        .collect();
    by_overlap.sort_by(|a, b| b.0.total_cmp(&a.0));
    if n == 1 || by_overlap[0].0 - by_overlap[1].0 > 1e-3 {
        return Some(by_overlap[0].1);
    }
    let mut by_energy: Vec<(f64, usize)> = (0..n)
        .map(|s| {
            let d = (0..n)
                .map(|b| circ_dist(reference.quasienergies[b], cur.quasienergies[(b + s) % n]))
                .sum::<f64>();
            (d, s)
        })
        .collect();
    by_energy.sort_by(|a, b| a.0.total_cmp(&b.0));
    let degenerate = cur.degenerate.iter().any(|&d| d) || reference.degenerate.iter().any(|&d| d);
    if by_energy[1].0 - by_energy[0].0 > 1e-9 || degenerate {
        return Some(by_energy[0].1);
    }
    None
}

/// Frames on the grid for the pulses the protocol assigns to each α.
pub fn band_grid(n: usize, grid: KAlphaGrid, protocol: &ProtocolSpec, conv: &Convention) -> Result<BandField> {
    band_grid_with(n, grid, |a| protocol.pulses(a), conv)
}

pub fn band_grid_with<F>(n: usize, grid: KAlphaGrid, pulses: F, conv: &Convention) -> Result<BandField>
where
    F: Fn(f64) -> PulseVector + Sync,
{
    check_odd_n(n)?;
    conv.validate()?;
    let frames: Vec<Result<BandFrame>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let i = (idx % grid.n_k) as isize;
            let j = (idx / grid.n_k) as isize;
            let a = grid.alpha(j);
            frame_at(n, grid.k(i), a, &pulses(a), conv)
        })
        .collect();
    let frames = frames.into_iter().collect::<Result<Vec<_>>>()?;
    BandField::from_frames(n, grid, frames)
}

/// Columns k, alpha, eps_1..eps_N, delta_1..delta_N, residual_imag; rows α-major.
pub fn write_grid_csv<W: Write>(field: &BandField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = field.n;
    let mut header = vec!["k".to_string(), "alpha".to_string()];
    header.extend((1..=n).map(|b| format!("eps_{b}")));
    header.extend((1..=n).map(|b| format!("delta_{b}")));
    header.push("residual_imag".into());
    w.write_record(&header)?;
    let g = field.grid;
    for j in 0..g.n_alpha as isize {
        for i in 0..g.n_k as isize {
            let f = field.at(i, j);
            let mut rec = vec![fmt_num(g.k(i)), fmt_num(g.alpha(j))];
            rec.extend(f.quasienergies.iter().map(|&e| fmt_num(e)));
            rec.extend(f.gaps().iter().map(|&d| fmt_num(d)));
            rec.push(fmt_num(f.residual_imag));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
