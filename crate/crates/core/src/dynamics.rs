//! Stroboscopic evolution under the α-modulated triple kick.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::angular::{LatticeSpec, Mode, PulseVector};
use crate::error::{Error, Result};
use crate::floquet::{gap_arcs, labeled_bands, Convention, GapArc, RealKicks, DEFAULT_RAY_STEPS};
use crate::linalg::{fmt_num, symmetric_unitary_eigen, CVec, C64};

/// α ↦ P.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    Free,
    Constant { pulses: PulseVector },
    /// P₁ = 1.6 + sin α / 2, P₄ = 6 − cos α / 2
    Fig1Circle,
    Fig3Family { beta: f64 },
}

impl Preset {
    pub fn pulses(&self, alpha: f64) -> PulseVector {
        match *self {
            Preset::Free => PulseVector::ZERO,
            Preset::Constant { pulses } => pulses,
            Preset::Fig1Circle => PulseVector::new(1.6 + alpha.sin() / 2.0, 0.0, 0.0, 6.0 - alpha.cos() / 2.0),
            Preset::Fig3Family { beta } => {
                let (x, y) = (alpha.cos(), alpha.sin());
                PulseVector::new(
                    1.0 + 5.0 * beta * (x + 1.0),
                    0.4 + 2.0 * beta * (x + 1.0),
                    0.7 + (3.0 * beta / 4.0) * (y + 1.0),
                    0.7 + (3.0 * beta / 2.0) * (y + 1.0),
                )
            }
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Preset::Free | Preset::Constant { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub preset: Preset,
    pub n_gamma: usize,
    pub cycles: usize,
}

impl ProtocolSpec {
    pub fn free() -> Self {
        ProtocolSpec { preset: Preset::Free, n_gamma: 40, cycles: 1 }
    }

    pub fn constant(pulses: PulseVector) -> Self {
        ProtocolSpec { preset: Preset::Constant { pulses }, n_gamma: 40, cycles: 1 }
    }

    pub fn fig1_circle(n_gamma: usize, cycles: usize) -> Self {
        ProtocolSpec { preset: Preset::Fig1Circle, n_gamma, cycles }
    }

    pub fn fig3_family(beta: f64, n_gamma: usize, cycles: usize) -> Self {
        ProtocolSpec { preset: Preset::Fig3Family { beta }, n_gamma, cycles }
    }

    pub fn pulses(&self, alpha: f64) -> PulseVector {
        self.preset.pulses(alpha)
    }

    /// α_n = 2πn/N_γ.
    pub fn alpha(&self, n: usize) -> f64 {
        2.0 * PI * n as f64 / self.n_gamma as f64
    }

    pub fn periods(&self) -> usize {
        self.n_gamma * self.cycles
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_gamma == 0 {
            return Err(Error::Config("protocol.n_gamma: must be positive".into()));
        }
        if let Preset::Constant { pulses } = self.preset {
            if !pulses.is_finite() {
                return Err(Error::Config("protocol.pulses: non-finite entry".into()));
            }
        }
        Ok(())
    }
}

/// Amplitudes on l = 0..=l_max.
#[derive(Clone, Debug, PartialEq)]
pub struct RotorState {
    pub amplitudes: CVec,
}

pub const TAIL_WINDOW: usize = 10;

impl RotorState {
    pub fn normalized(amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical("state has zero or non-finite norm".into()));
        }
        Ok(RotorState { amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    pub fn basis(dim: usize, l: usize) -> Self {
        let mut a = CVec::zeros(dim);
        a[l] = C64::new(1.0, 0.0);
        RotorState { amplitudes: a }
    }

    pub fn l_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Weight on l ∈ [l_max − 10, l_max].
    pub fn tail_mass(&self) -> f64 {
        let d = self.amplitudes.len();
        let lo = d.saturating_sub(TAIL_WINDOW + 1);
        self.amplitudes.rows(lo, d - lo).iter().map(|z| z.norm_sqr()).sum()
    }
}

/// (⟨L²⟩, |ψ(l)|²).
pub fn observables(state: &RotorState) -> (f64, Vec<f64>) {
    let pops: Vec<f64> = state.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let l2 = pops.iter().enumerate().map(|(l, p)| (l * (l + 1)) as f64 * p).sum();
    (l2, pops)
}

pub const THERMAL_TAIL_LIMIT: f64 = 1e-8;

/// ψ(l) ∝ exp(−θ l(l+1)).
pub fn thermal_state(theta: f64, spec: &LatticeSpec) -> Result<RotorState> {
    spec.validate()?;
    if !(theta > 0.0) {
        return Err(Error::Config(format!("theta: must be positive, got {theta}")));
    }
    let a = CVec::from_fn(spec.dim(), |l, _| {
        let x = if l == 0 { 1.0 } else { (-theta * (l * (l + 1)) as f64).exp() };
        C64::new(x, 0.0)
    });
    let s = RotorState::normalized(a)?;
    let tail = s.tail_mass();
    if tail > THERMAL_TAIL_LIMIT {
        return Err(Error::Truncation { tail, threshold: THERMAL_TAIL_LIMIT });
    }
    Ok(s)
}

/// Knobs for locating boundary modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdgeOptions {
    /// sites counted as "at the boundary"; None means 3N
    pub window: Option<usize>,
    pub min_weight: f64,
    /// required clearance from the bulk band edges
    pub margin: f64,
    pub n_k: usize,
    pub ray_steps: usize,
    /// accept a mode at the l_max end when none sits at l = 0
    pub allow_cutoff: bool,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        EdgeOptions { window: None, min_weight: 0.5, margin: 0.01, n_k: 256, ray_steps: DEFAULT_RAY_STEPS, allow_cutoff: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Origin,
    Cutoff,
}

#[derive(Clone, Debug)]
pub struct InGapState {
    pub gap: usize,
    pub quasienergy: f64,
    /// weight on l < window
    pub weight_origin: f64,
    /// weight on l > l_max − window
    pub weight_cutoff: f64,
    /// the half of the lattice holding most of the weight
    pub boundary: Boundary,
    pub state: RotorState,
}

/// Open-boundary eigenstates inside a bulk gap. The Bloch bands are labeled
/// adiabatically, so gap N is the gap that opens out of the free-rotor π-gap.
pub fn in_gap_states(
    pulses: &PulseVector,
    spec: &LatticeSpec,
    gap: usize,
    mode: Mode,
    conv: &Convention,
    opts: &EdgeOptions,
) -> Result<(GapArc, Vec<InGapState>)> {
    spec.validate()?;
    if gap == 0 || gap > spec.n {
        return Err(Error::Config(format!("gap: must be in 1..={}, got {gap}", spec.n)));
    }
    let bands = labeled_bands(spec.n, pulses, conv, opts.n_k, opts.ray_steps)?;
    let arc = gap_arcs(&bands)?[gap - 1];
    if !arc.is_open() {
        return Ok((arc, Vec::new()));
    }
    let u = RealKicks::new(spec, pulses, mode, conv)?.matrix();
    let frame = symmetric_unitary_eigen(&u)?;
    let window = opts.window.unwrap_or(3 * spec.n);
    let d = spec.dim();
    let mut out = Vec::new();
    for (c, &e) in frame.phases.iter().enumerate() {
        if !arc.contains(e, opts.margin) {
            continue;
        }
        let v = frame.vectors.column(c);
        let w = |r: std::ops::Range<usize>| r.map(|l| v[l] * v[l]).sum::<f64>();
        let lower_half = w(0..d / 2);
        out.push(InGapState {
            gap,
            quasienergy: e,
            weight_origin: w(0..window.min(d)),
            weight_cutoff: w(d.saturating_sub(window)..d),
            boundary: if lower_half >= 0.5 { Boundary::Origin } else { Boundary::Cutoff },
            state: RotorState::normalized(DVector::from_iterator(d, v.iter().map(|&x| C64::new(x, 0.0))))?,
        });
    }
    Ok((arc, out))
}

/// The in-gap mode with the most weight near l = 0; the l_max end only when
/// `allow_cutoff` is set.
pub fn edge_state(
    pulses: &PulseVector,
    spec: &LatticeSpec,
    gap: usize,
    mode: Mode,
    conv: &Convention,
    opts: &EdgeOptions,
) -> Result<RotorState> {
    let (arc, states) = in_gap_states(pulses, spec, gap, mode, conv, opts)?;
    let pick = |key: fn(&InGapState) -> f64| {
        states
            .iter()
            .filter(|s| key(s) > opts.min_weight)
            .max_by(|a, b| key(a).total_cmp(&key(b)))
    };
    let mut chosen = pick(|s| s.weight_origin);
    if chosen.is_none() && opts.allow_cutoff {
        chosen = pick(|s| s.weight_cutoff);
    }
    match chosen {
        Some(s) => Ok(s.state.clone()),
        None => Err(Error::NotTopological(format!(
            "no boundary mode in gap {gap} (bulk gap [{:.4}, {:.4}], {} in-gap states, none with weight > {} within {} sites of an end)",
            arc.lower,
            arc.upper,
            states.len(),
            opts.min_weight,
            opts.window.unwrap_or(3 * spec.n)
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub period: usize,
    pub alpha: f64,
    pub l2_expectation: f64,
    pub norm: f64,
    pub tail_mass: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub rows: Vec<TraceRow>,
    pub populations: Vec<Vec<f64>>,
    pub final_state: RotorState,
    pub tail_threshold: f64,
    /// false once the tail mass exceeded the threshold
    pub reliable: bool,
}

impl EvolutionTrace {
    pub fn final_l2(&self) -> f64 {
        self.rows.last().map(|r| r.l2_expectation).unwrap_or(0.0)
    }

    pub fn max_l2(&self) -> f64 {
        self.rows.iter().map(|r| r.l2_expectation).fold(0.0, f64::max)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.rows.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_tail(&self) -> f64 {
        self.rows.iter().map(|r| r.tail_mass).fold(0.0, f64::max)
    }
}

pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-6;

/// Apply one triple kick per α_n, n = 1..N_γ·cycles, recording observables after each.
pub fn evolve(
    state: &RotorState,
    protocol: &ProtocolSpec,
    spec: &LatticeSpec,
    mode: Mode,
    conv: &Convention,
    tail_threshold: f64,
) -> Result<EvolutionTrace> {
    spec.validate()?;
    protocol.validate()?;
    if state.amplitudes.len() != spec.dim() {
        return Err(Error::Config(format!(
            "state has {} amplitudes but l_max = {}",
            state.amplitudes.len(),
            spec.l_max
        )));
    }
    if (state.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!("initial state norm {}", state.norm())));
    }
    let record = |period: usize, alpha: f64, s: &RotorState, rows: &mut Vec<TraceRow>, pops: &mut Vec<Vec<f64>>| {
        let (l2, p) = observables(s);
        rows.push(TraceRow { period, alpha, l2_expectation: l2, norm: s.norm(), tail_mass: s.tail_mass() });
        pops.push(p);
    };
    let mut rows = Vec::with_capacity(protocol.periods() + 1);
    let mut pops = Vec::with_capacity(protocol.periods() + 1);
    let mut cur = state.clone();
    record(0, protocol.alpha(0), &cur, &mut rows, &mut pops);
    let fixed = if protocol.preset.is_static() {
        Some(RealKicks::new(spec, &protocol.pulses(0.0), mode, conv)?)
    } else {
        None
    };
    for n in 1..=protocol.periods() {
        let a = protocol.alpha(n);
        let amps = match &fixed {
            Some(k) => k.apply(&cur.amplitudes),
            None => RealKicks::new(spec, &protocol.pulses(a), mode, conv)?.apply(&cur.amplitudes),
        };
        cur = RotorState { amplitudes: amps };
        record(n, a, &cur, &mut rows, &mut pops);
    }
    let reliable = rows.iter().all(|r| r.tail_mass <= tail_threshold);
    Ok(EvolutionTrace { rows, populations: pops, final_state: cur, tail_threshold, reliable })
}

/// Columns period, alpha, l2_expectation, norm, tail_mass.
pub fn write_trace_csv<W: Write>(trace: &EvolutionTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["period", "alpha", "l2_expectation", "norm", "tail_mass"])?;
    for r in &trace.rows {
        w.write_record([
            r.period.to_string(),
            fmt_num(r.alpha),
            fmt_num(r.l2_expectation),
            fmt_num(r.norm),
            fmt_num(r.tail_mass),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per period, one column per l.
pub fn write_populations_csv<W: Write>(trace: &EvolutionTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = trace.populations.first().map(|p| p.len()).unwrap_or(0);
    let mut header = vec!["period".to_string()];
    header.extend((0..d).map(|l| format!("l{l}")));
    w.write_record(&header)?;
    for (r, p) in trace.rows.iter().zip(&trace.populations) {
        let mut rec = vec![r.period.to_string()];
        rec.extend(p.iter().map(|&x| fmt_num(x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observables_examples() {
        assert_eq!(observables(&RotorState::basis(5, 0)).0, 0.0);
        assert_eq!(observables(&RotorState::basis(5, 1)).0, 2.0);
        let mut a = CVec::zeros(5);
        a[0] = C64::new(1.0, 0.0);
        a[1] = C64::new(0.0, 1.0);
        let s = RotorState::normalized(a).unwrap();
        let (l2, p) = observables(&s);
        assert!((l2 - 1.0).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn presets_match_formulas() {
        let p = Preset::Fig1Circle.pulses(0.3);
        assert_eq!(p.p1, 1.6 + 0.3f64.sin() / 2.0);
        assert_eq!(p.p4, 6.0 - 0.3f64.cos() / 2.0);
        assert_eq!((p.p2, p.p3), (0.0, 0.0));
        let b = 0.21;
        let a = 1.1f64;
        let q = Preset::Fig3Family { beta: b }.pulses(a);
        let (x, y) = (a.cos(), a.sin());
        assert_eq!(q.p1, 1.0 + 5.0 * b * (x + 1.0));
        assert_eq!(q.p2, 0.4 + 2.0 * b * (x + 1.0));
        assert_eq!(q.p3, 0.7 + (3.0 * b / 4.0) * (y + 1.0));
        assert_eq!(q.p4, 0.7 + (3.0 * b / 2.0) * (y + 1.0));
        let pr = ProtocolSpec::fig1_circle(40, 1);
        assert_eq!(pr.alpha(40), 2.0 * PI);
        assert_eq!(pr.pulses(pr.alpha(40)), pr.pulses(pr.alpha(0) + 2.0 * PI));
    }

    #[test]
    fn thermal_examples() {
        let spec = LatticeSpec::new(60, 3).unwrap();
        let g = thermal_state(f64::INFINITY, &spec).unwrap();
        assert_eq!(g, RotorState::basis(61, 0));
        let t = thermal_state(0.17, &spec).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-14);
        // closed-form normalized sum
        let z: f64 = (0..=60).map(|l| (-0.34 * (l * (l + 1)) as f64).exp()).sum();
        let l2: f64 = (0..=60).map(|l| (l * (l + 1)) as f64 * (-0.34 * (l * (l + 1)) as f64).exp()).sum::<f64>() / z;
        assert!((observables(&t).0 - l2).abs() < 1e-12);
        assert!(t.amplitudes.iter().all(|z| z.re > 0.0 && z.im == 0.0));
        assert!(matches!(thermal_state(1e-5, &spec), Err(Error::Truncation { .. })));
        assert!(thermal_state(0.0, &spec).is_err());
    }

    #[test]
    fn zero_pulses_keep_observables() {
        let spec = LatticeSpec::new(30, 3).unwrap();
        let s = thermal_state(0.05, &spec).unwrap();
        let tr = evolve(&s, &ProtocolSpec::free(), &spec, Mode::Exact, &Convention::default(), 1e-6).unwrap();
        let l0 = tr.rows[0].l2_expectation;
        assert!(tr.rows.iter().all(|r| (r.l2_expectation - l0).abs() < 1e-10));
        assert_eq!(tr.rows.len(), 41);
    }

    #[test]
    fn trivial_pulses_have_no_edge_modes() {
        let spec = LatticeSpec::new(120, 3).unwrap();
        // all Zak phases vanish here; the only in-gap modes sit at the truncation end
        let p = PulseVector::new(0.3, 0.0, 0.0, 0.0);
        for gap in 1..=3 {
            let r = edge_state(&p, &spec, gap, Mode::Asymptotic, &Convention::default(), &EdgeOptions::default());
            assert!(matches!(r, Err(Error::NotTopological(_))), "gap {gap}");
        }
    }
}
