//! Floquet operators of the triple kick, quasienergies and real eigenframes.

mod grid;
mod labels;

pub(crate) use grid::best_shift;
pub use grid::{band_grid, band_grid_with, write_grid_csv, BandField, KAlphaGrid};
pub use labels::{adiabatic_frame, energy_shift, gap_arcs, labeled_bands, GapArc, LabeledBands, DEFAULT_RAY_STEPS};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::angular::{bloch_potential, real_space_potential, LatticeSpec, Mode, PulseVector};
use crate::error::{Error, Result};
use crate::linalg::{
    circ_dist, cmatmul, expi_hermitian, symmetric_unitary_eigen, unitarity_defect, unitary_eigen,
    wrap_pi, CMat, CVec, RealSpectral, C64,
};

/// Ordering of kicks and free evolution inside one period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Three full kicks K_A K_B K_A, each with its own free step.
    ThreeKick,
    /// S_A D S_B D S_A: two free steps per period.
    Interleaved,
}

/// Which kick strength multiplies which angular structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseAssignment {
    /// P₁, P₃ on cos²θ and P₂, P₄ on cos θ.
    OddOnCos2,
    /// P₁, P₃ on cos θ and P₂, P₄ on cos²θ.
    OddOnCos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Convention {
    pub layout: Layout,
    pub free_phase_multiplier: u8,
    pub pulse_assignment: PulseAssignment,
    /// Kicks are e^{i·kick_sign·V}.
    pub kick_sign: i8,
}

impl Default for Convention {
    fn default() -> Self {
        Convention {
            layout: Layout::ThreeKick,
            free_phase_multiplier: 1,
            pulse_assignment: PulseAssignment::OddOnCos2,
            kick_sign: -1,
        }
    }
}

impl Convention {
    /// The two-free-step product e^{iV₁} D e^{iV₂} D e^{iV₁} with P₁ on cos θ.
    pub fn interleaved() -> Self {
        Convention {
            layout: Layout::Interleaved,
            free_phase_multiplier: 1,
            pulse_assignment: PulseAssignment::OddOnCos,
            kick_sign: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.free_phase_multiplier, 1 | 2) {
            return Err(Error::Config(format!(
                "free_phase_multiplier: must be 1 or 2, got {}",
                self.free_phase_multiplier
            )));
        }
        if !matches!(self.kick_sign, 1 | -1) {
            return Err(Error::Config(format!("kick_sign: must be +1 or -1, got {}", self.kick_sign)));
        }
        Ok(())
    }

    /// (cos coefficient, cos² coefficient) of kicks A and B.
    pub fn coefficients(&self, p: &PulseVector) -> [(f64, f64); 2] {
        match self.pulse_assignment {
            PulseAssignment::OddOnCos2 => [(p.p2, p.p1), (p.p4, p.p3)],
            PulseAssignment::OddOnCos => [(p.p1, p.p2), (p.p3, p.p4)],
        }
    }

    fn sign(&self) -> f64 {
        self.kick_sign as f64
    }
}

/// e^{−iπ l(l+1)/N}.
pub fn free_phase(l: usize, n: usize) -> C64 {
    // reduce l(l+1) mod 2N first so large l stays exact
    let r = ((l as u128 * (l as u128 + 1)) % (2 * n as u128)) as f64;
    C64::from_polar(1.0, -PI * r / n as f64)
}

fn free_step(l: usize, n: usize, multiplier: u8, fraction: f64) -> C64 {
    let r = ((l as u128 * (l as u128 + 1)) % (4 * n as u128)) as f64;
    C64::from_polar(1.0, -PI * multiplier as f64 * fraction * r / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Symmetric,
    Asymmetric,
}

#[derive(Clone, Debug)]
pub struct BlochOperator {
    pub k: f64,
    pub alpha: f64,
    pub matrix: CMat,
    pub gauge: Gauge,
}

const UNITARITY_TOL: f64 = 1e-12;

fn mul_diag_right(a: &CMat, d: &[C64]) -> CMat {
    let mut out = a.clone();
    for (c, z) in d.iter().enumerate() {
        for r in 0..out.nrows() {
            out[(r, c)] *= z;
        }
    }
    out
}

pub fn build_u_tkr_bloch(
    n: usize,
    k: f64,
    alpha: f64,
    pulses: &PulseVector,
    conv: &Convention,
    gauge: Gauge,
) -> Result<BlochOperator> {
    let [(ca, qa), (cb, qb)] = conv.coefficients(pulses);
    let va = bloch_potential(n, k, ca, qa)?;
    let vb = bloch_potential(n, k, cb, qb)?;
    let s = conv.sign();
    let d: Vec<C64> = (0..n).map(|l| free_step(l, n, conv.free_phase_multiplier, 1.0)).collect();
    let sa = expi_hermitian(&va, s);
    let m = match (conv.layout, gauge) {
        (Layout::Interleaved, _) => {
            let sb = expi_hermitian(&vb, s);
            mul_diag_right(&(mul_diag_right(&sa, &d) * sb), &d) * &sa
        }
        (Layout::ThreeKick, Gauge::Asymmetric) => {
            let sb = expi_hermitian(&vb, s);
            let x = mul_diag_right(&sa, &d) * sb;
            let x = mul_diag_right(&x, &d) * &sa;
            mul_diag_right(&x, &d)
        }
        (Layout::ThreeKick, Gauge::Symmetric) => {
            let sbh = expi_hermitian(&vb, 0.5 * s);
            let x = mul_diag_right(&sbh, &d) * &sa;
            let x = mul_diag_right(&x, &d) * &sa;
            mul_diag_right(&x, &d) * sbh
        }
    };
    let defect = unitarity_defect(&m);
    if defect > UNITARITY_TOL {
        return Err(Error::Numerical(format!("Bloch operator unitarity defect {defect:.3e}")));
    }
    Ok(BlochOperator { k, alpha, matrix: m, gauge })
}

/// Kick operators on the truncated lattice, kept in spectral form.
#[derive(Clone, Debug)]
pub struct RealKicks {
    pub spec: LatticeSpec,
    pub conv: Convention,
    half: Vec<C64>,
    full: Vec<C64>,
    a: RealSpectral,
    b: RealSpectral,
}

impl RealKicks {
    pub fn new(spec: &LatticeSpec, pulses: &PulseVector, mode: Mode, conv: &Convention) -> Result<Self> {
        spec.validate()?;
        conv.validate()?;
        let [(ca, qa), (cb, qb)] = conv.coefficients(pulses);
        let va = real_space_potential(spec, ca, qa, mode).entries;
        let vb = real_space_potential(spec, cb, qb, mode).entries;
        let m = conv.free_phase_multiplier;
        let half = (0..spec.dim()).map(|l| free_step(l, spec.n, m, 0.5)).collect();
        let full = (0..spec.dim()).map(|l| free_step(l, spec.n, m, 1.0)).collect();
        Ok(RealKicks { spec: *spec, conv: *conv, half, full, a: RealSpectral::new(&va), b: RealSpectral::new(&vb) })
    }

    fn diag(d: &[C64], psi: &mut CVec) {
        for (x, z) in psi.iter_mut().zip(d) {
            *x *= z;
        }
    }

    /// One period applied to a state.
    pub fn apply(&self, psi: &CVec) -> CVec {
        let s = self.conv.sign();
        match self.conv.layout {
            Layout::ThreeKick => {
                let mut x = psi.clone();
                Self::diag(&self.half, &mut x);
                let mut x = self.a.apply_expi(s, &x);
                Self::diag(&self.full, &mut x);
                let mut x = self.b.apply_expi(s, &x);
                Self::diag(&self.full, &mut x);
                let mut x = self.a.apply_expi(s, &x);
                Self::diag(&self.half, &mut x);
                x
            }
            Layout::Interleaved => {
                let mut x = self.a.apply_expi(s, psi);
                Self::diag(&self.full, &mut x);
                let mut x = self.b.apply_expi(s, &x);
                Self::diag(&self.full, &mut x);
                self.a.apply_expi(s, &x)
            }
        }
    }

    /// Dense one-period operator.
    pub fn matrix(&self) -> CMat {
        let s = self.conv.sign();
        let ea = self.a.expi(s);
        let eb = self.b.expi(s);
        match self.conv.layout {
            Layout::ThreeKick => {
                let mut ka = ea;
                let mut kb = eb;
                for r in 0..ka.nrows() {
                    for c in 0..ka.ncols() {
                        let f = self.half[r] * self.half[c];
                        ka[(r, c)] *= f;
                        kb[(r, c)] *= f;
                    }
                }
                cmatmul(&cmatmul(&ka, &kb), &ka)
            }
            Layout::Interleaved => {
                let x = mul_diag_right(&ea, &self.full);
                let x = mul_diag_right(&cmatmul(&x, &eb), &self.full);
                cmatmul(&x, &ea)
            }
        }
    }

    /// Free half step, used to move between the symmetric and the cell-periodic gauge.
    pub fn half_step(&self) -> &[C64] {
        &self.half
    }
}

pub fn build_u_tkr_real(spec: &LatticeSpec, pulses: &PulseVector, mode: Mode, conv: &Convention) -> Result<CMat> {
    let u = RealKicks::new(spec, pulses, mode, conv)?.matrix();
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry in real-space Floquet operator".into()));
    }
    Ok(u)
}

/// H = i log U with eigenphases in (c − π, c + π].
pub fn effective_hamiltonian(u: &CMat, branch_center: f64) -> Result<CMat> {
    let eig = unitary_eigen(u)?;
    let n = u.nrows();
    let mut h = CMat::zeros(n, n);
    for (c, &e) in eig.phases.iter().enumerate() {
        let shifted = wrap_pi(e - branch_center);
        if PI - shifted.abs() < 1e-9 {
            return Err(Error::BranchCut { phase: e, cut: wrap_pi(branch_center + PI), tol: 1e-9 });
        }
        let v = eig.vectors.column(c);
        h += (&v * v.adjoint()).map(|z| z * (shifted + branch_center));
    }
    Ok(h)
}

/// Rows of W = diag(√λ) Vᵀ for the antidiagonal exchange 𝒫 = V diag(λ) Vᵀ.
pub fn parity_transform(n: usize) -> (CMat, Vec<f64>) {
    let mut w = CMat::zeros(n, n);
    let mut lam = Vec::with_capacity(n);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut row = 0;
    for i in 0..n / 2 {
        w[(row, i)] = C64::new(h, 0.0);
        w[(row, n - 1 - i)] = C64::new(h, 0.0);
        lam.push(1.0);
        row += 1;
    }
    if n % 2 == 1 {
        w[(row, n / 2)] = C64::new(1.0, 0.0);
        lam.push(1.0);
        row += 1;
    }
    for i in 0..n / 2 {
        w[(row, i)] = C64::new(0.0, h);
        w[(row, n - 1 - i)] = C64::new(0.0, -h);
        lam.push(-1.0);
        row += 1;
    }
    (w, lam)
}

pub const DEGENERACY_TOL: f64 = 1e-9;
pub const GAUGE_FAIL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BandFrame {
    /// ascending in (−π, π] before any relabeling; cyclically ascending after
    pub quasienergies: Vec<f64>,
    /// columns are real eigenvectors in the realified basis
    pub frame: DMatrix<f64>,
    pub residual_imag: f64,
    pub eigen_residual: f64,
    /// gap n (0-based) flagged when its two bands sit within 1e−9
    pub degenerate: Vec<bool>,
}

impl BandFrame {
    pub fn n(&self) -> usize {
        self.quasienergies.len()
    }

    pub fn gaps(&self) -> Vec<f64> {
        (1..=self.n()).map(|g| gap_function(&self.quasienergies, g)).collect()
    }

    /// Rotate band labels so that new band n is old band n + shift.
    pub fn roll(&mut self, shift: usize) {
        let n = self.n();
        if shift % n == 0 {
            return;
        }
        let q = self.quasienergies.clone();
        let f = self.frame.clone();
        let d = self.degenerate.clone();
        for b in 0..n {
            let src = (b + shift) % n;
            self.quasienergies[b] = q[src];
            self.frame.set_column(b, &f.column(src));
            self.degenerate[b] = d[src];
        }
    }

    /// ⟨ψ_n|𝒫|ψ_n⟩, meaningful at k ∈ {0, π} where 𝒫 commutes with the operator.
    pub fn parities(&self, lam: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|b| self.frame.column(b).iter().zip(lam).map(|(x, l)| x * x * l).sum())
            .collect()
    }
}

fn fix_sign(v: &mut DMatrix<f64>) {
    for c in 0..v.ncols() {
        let mut col = v.column_mut(c);
        let mx = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lead = col.iter().position(|x| x.abs() >= mx - 1e-12).unwrap_or(0);
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Real eigenframe of W U W† for a symmetric-gauge Bloch operator.
pub fn realify(u: &BlochOperator) -> Result<(BandFrame, CMat)> {
    let n = u.matrix.nrows();
    let (w, _) = parity_transform(n);
    let ut = cmatmul(&cmatmul(&w, &u.matrix), &w.adjoint());
    let residual_imag = 0.5 * (&ut - ut.transpose()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if residual_imag > GAUGE_FAIL_TOL {
        return Err(Error::Gauge(residual_imag));
    }
    let sym = (&ut + ut.transpose()).map(|z| z * 0.5);
    let rf = symmetric_unitary_eigen(&sym)?;
    let mut frame = rf.vectors;
    fix_sign(&mut frame);
    let eps = rf.phases;
    let degenerate = (1..=n).map(|g| gap_function(&eps, g) < DEGENERACY_TOL).collect();
    Ok((
        BandFrame { quasienergies: eps, frame, residual_imag, eigen_residual: rf.residual, degenerate },
        w,
    ))
}

/// Realified frame at (k, α).
pub fn frame_at(n: usize, k: f64, alpha: f64, pulses: &PulseVector, conv: &Convention) -> Result<BandFrame> {
    let u = build_u_tkr_bloch(n, k, alpha, pulses, conv, Gauge::Symmetric)?;
    Ok(realify(&u)?.0)
}

/// δ_n = |ε_n − ε_{n+1}|_{2π}; gap N pairs band N with band 1.
pub fn gap_function(quasienergies: &[f64], n: usize) -> f64 {
    let m = quasienergies.len();
    circ_dist(quasienergies[n - 1], quasienergies[n % m])
}

/// Per-gap minima over a set of spectra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapProfile {
    pub min: Vec<f64>,
}

impl GapProfile {
    pub fn from_spectra<'a>(spectra: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut min: Vec<f64> = Vec::new();
        for e in spectra {
            if min.is_empty() {
                min = vec![f64::INFINITY; e.len()];
            }
            for (g, m) in min.iter_mut().enumerate() {
                *m = m.min(gap_function(e, g + 1));
            }
        }
        GapProfile { min }
    }
}

/// Eigenphases of U in (−π, π], ascending.
pub fn quasienergies(u: &CMat) -> Result<Vec<f64>> {
    Ok(unitary_eigen(u)?.phases)
}
