//! Nodal lines over the (P₁, P₄) plane with P₂ = P₃ = 0.
//!
//! Three detectors run per grid point or grid edge:
//! band parities at k = 0 and k = π exchange across lines pinned there;
//! a refined minimum of δ_n below threshold catches generic points hit directly;
//! the Berry sign around the half cylinder k ∈ [0, π] × edge catches generic
//! (k, −k) pairs passing between two grid points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use super::zak::MIN_OVERLAP;
use crate::angular::{check_odd_n, PulseVector};
use crate::error::{Error, Result};
use crate::linalg::fmt_num;
use crate::floquet::{
    energy_shift, frame_at, gap_function, labeled_bands, parity_transform, BandFrame, Convention, DEFAULT_RAY_STEPS,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodalMapSpec {
    pub p1_range: [f64; 2],
    pub p4_range: [f64; 2],
    pub n_p1: usize,
    pub n_p4: usize,
    /// k samples over the full zone; the half zone [0, π] uses n_k/2 + 1 of them
    pub n_k: usize,
    /// pulse substeps along each grid edge for the loop detector
    pub s_steps: usize,
    pub ray_steps: usize,
    pub threshold: f64,
}

impl Default for NodalMapSpec {
    fn default() -> Self {
        NodalMapSpec {
            p1_range: [0.0, 8.0],
            p4_range: [0.0, 8.0],
            n_p1: 32,
            n_p4: 32,
            n_k: 64,
            s_steps: 8,
            ray_steps: DEFAULT_RAY_STEPS,
            threshold: 1e-3,
        }
    }
}

impl NodalMapSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_p1 < 2 || self.n_p4 < 2 {
            return Err(Error::Config(format!(
                "phase_diagram.n_p1/n_p4: need at least 2 points per axis, got {}x{}",
                self.n_p1, self.n_p4
            )));
        }
        if self.n_k < 8 || self.n_k % 2 != 0 {
            return Err(Error::Config(format!("phase_diagram.n_k: must be even and >= 8, got {}", self.n_k)));
        }
        if self.s_steps < 2 {
            return Err(Error::Config(format!("phase_diagram.s_steps: must be >= 2, got {}", self.s_steps)));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config(format!("phase_diagram.threshold: must be positive, got {}", self.threshold)));
        }
        if self.p1_range.iter().chain(&self.p4_range).any(|x| !x.is_finite()) {
            return Err(Error::Config("phase_diagram: ranges must be finite".into()));
        }
        Ok(())
    }

    pub fn p1(&self, i: usize) -> f64 {
        self.p1_range[0] + (self.p1_range[1] - self.p1_range[0]) * i as f64 / (self.n_p1 - 1) as f64
    }

    pub fn p4(&self, j: usize) -> f64 {
        self.p4_range[0] + (self.p4_range[1] - self.p4_range[0]) * j as f64 / (self.n_p4 - 1) as f64
    }

    fn pulses(&self, i: usize, j: usize) -> PulseVector {
        PulseVector::new(self.p1(i), 0.0, 0.0, self.p4(j))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    K0,
    KPi,
    Generic,
    /// gap closed at every sampled k
    Degenerate,
}

impl fmt::Display for LineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineKind::K0 => "k0",
            LineKind::KPi => "kpi",
            LineKind::Generic => "gen",
            LineKind::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodalPoint {
    pub p1: f64,
    pub p4: f64,
    pub mingap: Vec<f64>,
    /// (gap, kind), sorted and unique
    pub flags: Vec<(usize, LineKind)>,
}

impl NodalPoint {
    pub fn flag_string(&self) -> String {
        self.flags.iter().map(|(g, k)| format!("g{g}:{k}")).collect::<Vec<_>>().join(";")
    }

    pub fn has(&self, gap: usize, kind: LineKind) -> bool {
        self.flags.contains(&(gap, kind))
    }
}

struct PointData {
    pulses: PulseVector,
    /// labeled frames on k_i = 2πi/n_k, i = 0..=n_k/2
    half: Vec<BandFrame>,
    mingap: Vec<f64>,
    flags: Vec<(usize, LineKind)>,
    /// parity signs at k = 0 and k = π, None where a gap is closed there
    parity: [Option<Vec<i8>>; 2],
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const REFINE_BELOW: f64 = 0.3;

fn point_data(n: usize, spec: &NodalMapSpec, conv: &Convention, lam: &[f64], i: usize, j: usize) -> Result<PointData> {
    let pulses = spec.pulses(i, j);
    let bands = labeled_bands(n, &pulses, conv, spec.n_k, spec.ray_steps)?;
    let h = spec.n_k / 2;
    let half: Vec<BandFrame> = bands.frames.into_iter().take(h + 1).collect();
    let dk = 2.0 * PI / spec.n_k as f64;
    let mut mingap = vec![f64::INFINITY; n];
    let mut flags = Vec::new();
    for g in 1..=n {
        let d: Vec<f64> = half.iter().map(|f| gap_function(&f.quasienergies, g)).collect();
        if d.iter().all(|&x| x < spec.threshold) {
            flags.push((g, LineKind::Degenerate));
            mingap[g - 1] = d.iter().cloned().fold(f64::INFINITY, f64::min);
            continue;
        }
        mingap[g - 1] = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if d[0] < spec.threshold {
            flags.push((g, LineKind::K0));
        }
        if d[h] < spec.threshold {
            flags.push((g, LineKind::KPi));
        }
        for s in 1..h {
            if d[s] <= d[s - 1] && d[s] <= d[s + 1] && d[s] < REFINE_BELOW {
                let reference = &half[s];
                let eval = |k: f64| match frame_at(n, k, 0.0, &pulses, conv) {
                    Ok(mut f) => {
                        f.roll(energy_shift(&reference.quasienergies, &f.quasienergies));
                        gap_function(&f.quasienergies, g)
                    }
                    Err(_) => f64::INFINITY,
                };
                let (k, v) = golden_min(eval, (s - 1) as f64 * dk, (s + 1) as f64 * dk, 48);
                mingap[g - 1] = mingap[g - 1].min(v);
                if v < spec.threshold && k > 0.25 * dk && k < PI - 0.25 * dk {
                    flags.push((g, LineKind::Generic));
                }
            }
        }
    }
    let parity_at = |f: &BandFrame| -> Option<Vec<i8>> {
        if f.gaps().iter().any(|&x| x < spec.threshold) {
            return None;
        }
        Some(f.parities(lam).iter().map(|&p| if p < 0.0 { -1 } else { 1 }).collect())
    };
    let parity = [parity_at(&half[0]), parity_at(&half[h])];
    Ok(PointData { pulses, half, mingap, flags, parity })
}

/// Gaps whose two bands both swapped parity between the two patterns.
fn parity_exchange(a: &[i8], b: &[i8]) -> Vec<usize> {
    let n = a.len();
    let diff: Vec<bool> = (0..n).map(|x| a[x] != b[x]).collect();
    (0..n).filter(|&g0| diff[g0] && diff[(g0 + 1) % n]).map(|g0| g0 + 1).collect()
}

/// Product of overlap signs per band around a closed frame loop; None if under-resolved.
fn loop_signs(frames: &[&BandFrame]) -> Option<Vec<i8>> {
    let n = frames[0].n();
    let mut s = vec![1i8; n];
    for w in frames.windows(2) {
        for b in 0..n {
            let o = w[0].frame.column(b).dot(&w[1].frame.column(b));
            if o.abs() < MIN_OVERLAP {
                return None;
            }
            if o < 0.0 {
                s[b] = -s[b];
            }
        }
    }
    Some(s)
}

/// Frames along P_a → P_b at fixed k, labels continued from `start`; None if the
/// continuation does not land on `end` with the same labels.
fn pulse_edge(
    n: usize,
    k: f64,
    pa: &PulseVector,
    pb: &PulseVector,
    start: &BandFrame,
    end: &BandFrame,
    steps: usize,
    conv: &Convention,
) -> Option<Vec<BandFrame>> {
    let mut out = Vec::with_capacity(steps);
    let mut prev = start.clone();
    for s in 1..steps {
        let t = s as f64 / steps as f64;
        let p = PulseVector::new(
            pa.p1 + t * (pb.p1 - pa.p1),
            pa.p2 + t * (pb.p2 - pa.p2),
            pa.p3 + t * (pb.p3 - pa.p3),
            pa.p4 + t * (pb.p4 - pa.p4),
        );
        let mut f = frame_at(n, k, 0.0, &p, conv).ok()?;
        f.roll(crate::floquet::best_shift(&prev, &f)?);
        prev = f.clone();
        out.push(f);
    }
    if crate::floquet::best_shift(&prev, end)? != 0 {
        return None;
    }
    Some(out)
}

/// Gaps with a generic node enclosed by the half cylinder between points a and b.
fn half_cylinder(n: usize, a: &PointData, b: &PointData, steps: usize, conv: &Convention) -> Vec<usize> {
    let h = a.half.len() - 1;
    let Some(top) = pulse_edge(n, PI, &a.pulses, &b.pulses, &a.half[h], &b.half[h], steps, conv) else {
        return Vec::new();
    };
    let Some(bottom) = pulse_edge(n, 0.0, &b.pulses, &a.pulses, &b.half[0], &a.half[0], steps, conv) else {
        return Vec::new();
    };
    let mut path: Vec<&BandFrame> = a.half.iter().collect();
    path.extend(top.iter());
    path.extend(b.half.iter().rev());
    path.extend(bottom.iter());
    path.push(&a.half[0]);
    match loop_signs(&path) {
        Some(s) => (0..n).filter(|&g0| s[g0] < 0 && s[(g0 + 1) % n] < 0).map(|g0| g0 + 1).collect(),
        None => Vec::new(),
    }
}

/// Sweep the (P₁, P₄) grid; points are returned P₁-major (index i·n_p4 + j).
pub fn nodal_line_map(n: usize, spec: &NodalMapSpec, conv: &Convention) -> Result<Vec<NodalPoint>> {
    check_odd_n(n)?;
    conv.validate()?;
    spec.validate()?;
    let (_, lam) = parity_transform(n);
    let m = spec.n_p1 * spec.n_p4;
    let data: Vec<PointData> = (0..m)
        .into_par_iter()
        .map(|idx| point_data(n, spec, conv, &lam, idx / spec.n_p4, idx % spec.n_p4))
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let mut edges = Vec::new();
    for i in 0..spec.n_p1 {
        for j in 0..spec.n_p4 {
            let idx = i * spec.n_p4 + j;
            if i + 1 < spec.n_p1 {
                edges.push((idx, idx + spec.n_p4));
            }
            if j + 1 < spec.n_p4 {
                edges.push((idx, idx + 1));
            }
        }
    }
    let edge_flags: Vec<Vec<(usize, LineKind)>> = edges
        .par_iter()
        .map(|&(a, b)| {
            let (da, db) = (&data[a], &data[b]);
            let mut f = Vec::new();
            for (slot, kind) in [(0, LineKind::K0), (1, LineKind::KPi)] {
                if let (Some(x), Some(y)) = (&da.parity[slot], &db.parity[slot]) {
                    f.extend(parity_exchange(x, y).into_iter().map(|g| (g, kind)));
                }
            }
            f.extend(half_cylinder(n, da, db, spec.s_steps, conv).into_iter().map(|g| (g, LineKind::Generic)));
            f
        })
        .collect();

    let mut flags: Vec<Vec<(usize, LineKind)>> = data.iter().map(|d| d.flags.clone()).collect();
    for (&(a, b), f) in edges.iter().zip(&edge_flags) {
        for &x in f {
            for p in [a, b] {
                if !data[p].flags.contains(&(x.0, LineKind::Degenerate)) {
                    flags[p].push(x);
                }
            }
        }
    }
    Ok(data
        .iter()
        .zip(flags)
        .map(|(d, mut f)| {
            f.sort();
            f.dedup();
            NodalPoint { p1: d.pulses.p1, p4: d.pulses.p4, mingap: d.mingap.clone(), flags: f }
        })
        .collect())
}

/// Columns P1, P4, mingap_1..N, line_flags.
pub fn write_nodal_csv<W: Write>(points: &[NodalPoint], out: W) -> Result<()> {
    let n = points.first().map_or(0, |p| p.mingap.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["P1".to_string(), "P4".to_string()];
    header.extend((1..=n).map(|g| format!("mingap_{g}")));
    header.push("line_flags".into());
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![fmt_num(p.p1), fmt_num(p.p4)];
        row.extend(p.mingap.iter().map(|&x| fmt_num(x)));
        row.push(p.flag_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = golden_min(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-8 && v < 1e-15);
    }

    #[test]
    fn parity_swap_maps_to_gap() {
        assert_eq!(parity_exchange(&[1, -1, 1], &[-1, 1, 1]), vec![1]);
        assert_eq!(parity_exchange(&[1, 1, -1], &[-1, 1, 1]), vec![3]);
        assert!(parity_exchange(&[1, 1, -1], &[1, 1, -1]).is_empty());
    }

    #[test]
    fn small_pulses_only_close_the_free_rotor_pair() {
        // two free steps per period: bands 2 and 3 of the free rotor are degenerate
        let spec = NodalMapSpec { p1_range: [0.0, 0.1], p4_range: [0.0, 0.1], n_p1: 2, n_p4: 2, n_k: 16, ..Default::default() };
        let pts = nodal_line_map(3, &spec, &Convention::interleaved()).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].flags, vec![(2, LineKind::Degenerate)]);
        for p in &pts {
            assert!(p.flags.iter().all(|f| f.0 == 2), "{p:?}");
        }
    }

    #[test]
    fn three_kick_free_rotor_is_fully_degenerate() {
        let spec = NodalMapSpec { p1_range: [0.0, 0.1], p4_range: [0.0, 0.1], n_p1: 2, n_p4: 2, n_k: 16, ..Default::default() };
        let pts = nodal_line_map(3, &spec, &Convention::default()).unwrap();
        assert_eq!(pts[0].flags.len(), 3);
        assert!(pts[0].flags.iter().all(|f| f.1 == LineKind::Degenerate));
    }
}
