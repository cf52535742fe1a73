//! Alignment-potential matrix elements in the |l, m=0⟩ basis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Which matrix elements to use on the truncated lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Asymptotic,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "asymptotic" => Ok(Mode::Asymptotic),
            other => Err(Error::Config(format!("mode: unknown value `{other}` (exact|asymptotic)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Asymptotic => "asymptotic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub l_max: usize,
    pub n: usize,
}

impl LatticeSpec {
    pub fn new(l_max: usize, n: usize) -> Result<Self> {
        let s = LatticeSpec { l_max, n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_odd_n(self.n)?;
        if self.l_max + 1 < 3 * self.n {
            return Err(Error::Config(format!(
                "l_max: {} leaves fewer than three unit cells of {} sites",
                self.l_max, self.n
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.l_max + 1
    }
}

pub(crate) fn check_odd_n(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Config(format!("N: must be odd and >= 3, got {n}")));
    }
    Ok(())
}

/// Four kick strengths of the triple kick.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct PulseVector {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl PulseVector {
    pub const ZERO: PulseVector = PulseVector { p1: 0.0, p2: 0.0, p3: 0.0, p4: 0.0 };

    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64) -> Self {
        PulseVector { p1, p2, p3, p4 }
    }

    pub fn scaled(&self, t: f64) -> Self {
        PulseVector::new(t * self.p1, t * self.p2, t * self.p3, t * self.p4)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

#[derive(Clone, Debug)]
pub struct PotentialMatrix {
    pub entries: DMatrix<f64>,
    pub mode: Mode,
}

/// ⟨l′,0| cos θ |l,0⟩.
pub fn exact_cos_element(l_prime: usize, l: usize) -> f64 {
    let lo = l.min(l_prime);
    if l.abs_diff(l_prime) != 1 {
        return 0.0;
    }
    let a = lo as f64;
    (a + 1.0) / ((2.0 * a + 1.0) * (2.0 * a + 3.0)).sqrt()
}

/// ⟨l′,0| cos²θ |l,0⟩.
pub fn exact_cos2_element(l_prime: usize, l: usize) -> f64 {
    match l.abs_diff(l_prime) {
        0 => {
            let a = l as f64;
            (2.0 * a * a + 2.0 * a - 1.0) / ((2.0 * a - 1.0) * (2.0 * a + 3.0))
        }
        2 => {
            let a = l.min(l_prime) as f64;
            (a + 1.0) * (a + 2.0) / ((2.0 * a + 3.0) * ((2.0 * a + 1.0) * (2.0 * a + 5.0)).sqrt())
        }
        _ => 0.0,
    }
}

/// Limits of the elements for l → ∞: hop 1 of cos, diagonal of cos², hop 2 of cos².
pub const ASYMPTOTIC_COS_HOP: f64 = 0.5;
pub const ASYMPTOTIC_COS2_DIAG: f64 = 0.5;
pub const ASYMPTOTIC_COS2_HOP: f64 = 0.25;

/// V = p1·cos θ + p2·cos²θ on l = 0..=l_max.
pub fn real_space_potential(spec: &LatticeSpec, p1: f64, p2: f64, mode: Mode) -> PotentialMatrix {
    let d = spec.dim();
    let mut v = DMatrix::zeros(d, d);
    for l in 0..d {
        let (c1, c0, c2) = match mode {
            Mode::Exact => (
                exact_cos_element(l + 1, l),
                exact_cos2_element(l, l),
                exact_cos2_element(l + 2, l),
            ),
            Mode::Asymptotic => (ASYMPTOTIC_COS_HOP, ASYMPTOTIC_COS2_DIAG, ASYMPTOTIC_COS2_HOP),
        };
        v[(l, l)] = p2 * c0;
        if l + 1 < d {
            v[(l, l + 1)] = p1 * c1;
            v[(l + 1, l)] = p1 * c1;
        }
        if l + 2 < d {
            v[(l, l + 2)] = p2 * c2;
            v[(l + 2, l)] = p2 * c2;
        }
    }
    PotentialMatrix { entries: v, mode }
}

fn asymptotic_amplitude(d: isize, p1: f64, p2: f64) -> f64 {
    match d {
        0 => p2 * ASYMPTOTIC_COS2_DIAG,
        1 | -1 => p1 * ASYMPTOTIC_COS_HOP,
        2 | -2 => p2 * ASYMPTOTIC_COS2_HOP,
        _ => 0.0,
    }
}

/// Bloch form of the asymptotic potential,
/// V_ij(k) = Σ_m e^{−imk} V(l′ = N(n₀+m)+i, l = N n₀+j).
pub fn bloch_potential(n: usize, k: f64, p1: f64, p2: f64) -> Result<CMat> {
    check_odd_n(n)?;
    let ni = n as isize;
    let mut v = CMat::zeros(n, n);
    for i in 0..ni {
        for j in 0..ni {
            let mut z = C64::new(0.0, 0.0);
            for m in -1..=1isize {
                let a = asymptotic_amplitude(ni * m + i - j, p1, p2);
                if a != 0.0 {
                    z += C64::from_polar(a, -(m as f64) * k);
                }
            }
            v[(i as usize, j as usize)] = z;
        }
    }
    Ok(v)
}
