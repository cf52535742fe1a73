use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

use crate::angular::PulseVector;
use crate::error::{Error, Result};
use crate::floquet::{labeled_bands, BandField, Convention};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    K,
    Alpha,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZakRecord {
    pub band: usize,
    pub direction: Direction,
    pub transverse: f64,
    pub phase: f64,
}

pub const MIN_OVERLAP: f64 = 0.1;

/// γ = −arg Π ⟨ψ(j)|ψ(j+1)⟩ around a closed loop of real vectors (last links back to first).
pub fn zak_phase(loop_vectors: &[DVector<f64>]) -> Result<f64> {
    let m = loop_vectors.len();
    let mut sign = 1.0;
    for s in 0..m {
        let o = loop_vectors[s].dot(&loop_vectors[(s + 1) % m]);
        if o.abs() < MIN_OVERLAP {
            return Err(Error::UnderResolved { step: s, overlap: o });
        }
        sign *= o.signum();
    }
    Ok(if sign > 0.0 { 0.0 } else { PI })
}

fn column_loop(frames: &[&DMatrix<f64>], band: usize) -> Vec<DVector<f64>> {
    frames.iter().map(|f| f.column(band).into_owned()).collect()
}

/// Per-loop Zak phases; a loop too coarse near a node yields its own error.
pub fn zak_loops(field: &BandField, direction: Direction) -> Result<Vec<(ZakRecord, Result<()>)>> {
    field.require_closed()?;
    let g = field.grid;
    let (outer, inner) = match direction {
        Direction::K => (g.n_alpha, g.n_k),
        Direction::Alpha => (g.n_k, g.n_alpha),
    };
    let mut out = Vec::with_capacity(outer * field.n);
    for t in 0..outer as isize {
        let (frames, transverse): (Vec<&DMatrix<f64>>, f64) = match direction {
            Direction::K => ((0..inner as isize).map(|i| &field.at(i, t).frame).collect(), g.alpha(t)),
            Direction::Alpha => ((0..inner as isize).map(|j| &field.at(t, j).frame).collect(), g.k(t)),
        };
        for b in 0..field.n {
            let r = zak_phase(&column_loop(&frames, b));
            let phase = *r.as_ref().unwrap_or(&f64::NAN);
            out.push((ZakRecord { band: b + 1, direction, transverse, phase }, r.map(|_| ())));
        }
    }
    Ok(out)
}

fn strict(field: &BandField, direction: Direction) -> Result<Vec<ZakRecord>> {
    zak_loops(field, direction)?.into_iter().map(|(z, r)| r.map(|_| z)).collect()
}

/// Zak phase of every band along k, one loop per α row.
pub fn zak_k_loops(field: &BandField) -> Result<Vec<ZakRecord>> {
    strict(field, Direction::K)
}

/// Zak phase of every band along α, one loop per k column.
pub fn zak_alpha_loops(field: &BandField) -> Result<Vec<ZakRecord>> {
    strict(field, Direction::Alpha)
}

/// Zak phases along k at fixed pulses, adiabatic band labels.
pub fn zak_along_k(n: usize, pulses: &PulseVector, conv: &Convention, n_k: usize, ray_steps: usize) -> Result<Vec<f64>> {
    let bands = labeled_bands(n, pulses, conv, n_k, ray_steps)?;
    let frames: Vec<&DMatrix<f64>> = bands.frames.iter().map(|f| &f.frame).collect();
    (0..n).map(|b| zak_phase(&column_loop(&frames, b))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_loop_is_trivial() {
        let v = DVector::from_vec(vec![0.6, 0.8, 0.0]);
        assert_eq!(zak_phase(&vec![v.clone(); 10]).unwrap(), 0.0);
    }

    #[test]
    fn sign_flip_gives_pi() {
        let m = 40;
        let l: Vec<DVector<f64>> = (0..m)
            .map(|s| {
                let t = PI * s as f64 / m as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
        assert_eq!(zak_phase(&l).unwrap(), PI);
    }

    #[test]
    fn coarse_loop_is_rejected() {
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(zak_phase(&[a, b]), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn ads_point_zak_phases_vanish() {
        let z = zak_along_k(3, &PulseVector::new(1.6, 0.0, 0.0, 6.0), &Convention::default(), 128, 200).unwrap();
        assert_eq!(z, vec![0.0, 0.0, 0.0]);
    }
}
