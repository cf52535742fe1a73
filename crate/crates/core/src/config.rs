//! Run configuration: one TOML file with sections, overridable from the command line.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::angular::{check_odd_n, LatticeSpec, Mode, PulseVector};
use crate::dynamics::{EdgeOptions, Preset, ProtocolSpec, DEFAULT_TAIL_THRESHOLD};
use crate::error::{Error, Result};
use crate::floquet::{Convention, KAlphaGrid};
use crate::topology::{NodalMapSpec, PatchSpec, INTEGER_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub n: usize,
    pub l_max: usize,
    pub mode: Mode,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { n: 3, l_max: 401, mode: Mode::Exact }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_k: usize,
    pub n_alpha: usize,
    /// k samples sit at 2π(i + k_shift)/n_k
    pub k_shift: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_k: 100, n_alpha: 100, k_shift: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    Free,
    Constant,
    Fig1Circle,
    Fig3Family,
}

impl std::str::FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "free" => Ok(PresetName::Free),
            "constant" => Ok(PresetName::Constant),
            "fig1_circle" | "fig1" => Ok(PresetName::Fig1Circle),
            "fig3_family" | "fig3" => Ok(PresetName::Fig3Family),
            _ => Err(Error::Config(format!(
                "protocol.preset: unknown preset {s:?} (expected free, constant, fig1_circle, fig3_family)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub preset: PresetName,
    /// fig3_family only
    pub beta: f64,
    /// constant only
    pub pulses: [f64; 4],
    pub n_gamma: usize,
    pub cycles: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig { preset: PresetName::Fig1Circle, beta: 0.3, pulses: [0.0; 4], n_gamma: 40, cycles: 1 }
    }
}

impl ProtocolConfig {
    pub fn spec(&self) -> ProtocolSpec {
        let [p1, p2, p3, p4] = self.pulses;
        let preset = match self.preset {
            PresetName::Free => Preset::Free,
            PresetName::Constant => Preset::Constant { pulses: PulseVector::new(p1, p2, p3, p4) },
            PresetName::Fig1Circle => Preset::Fig1Circle,
            PresetName::Fig3Family => Preset::Fig3Family { beta: self.beta },
        };
        ProtocolSpec { preset, n_gamma: self.n_gamma, cycles: self.cycles }
    }
}

/// Rectangle [k0, k1] × [α0, α1] in radians, enclosing band pair (gap, gap + 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub k: [f64; 2],
    pub alpha: [f64; 2],
    pub gap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Thermal,
    Edge,
}

impl std::str::FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thermal" => Ok(InitialState::Thermal),
            "edge" => Ok(InitialState::Edge),
            _ => Err(Error::Config(format!("evolve.initial: expected thermal or edge, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub initial: InitialState,
    /// π/(τ_B k_B T)
    pub theta: f64,
    /// gap hosting the edge state
    pub gap: usize,
    /// the edge state is taken from the pulses at this α
    pub alpha: f64,
    pub edge: EdgeOptions,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig { initial: InitialState::Thermal, theta: 0.17, gap: 3, alpha: 0.0, edge: EdgeOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// tail mass above which an evolution is flagged unreliable
    pub tail_threshold: f64,
    /// allowed |χ_raw − round(χ_raw)|; at most the library limit
    pub chi_integer: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tail_threshold: DEFAULT_TAIL_THRESHOLD, chi_integer: INTEGER_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub convention: Convention,
    pub grid: GridConfig,
    pub protocol: ProtocolConfig,
    pub patch: Vec<PatchConfig>,
    pub phase_diagram: NodalMapSpec,
    pub evolve: EvolveConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

pub const MIN_TOPOLOGY_GRID: usize = 8;

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.lattice.l_max, self.lattice.n)
    }

    pub fn grid(&self) -> Result<KAlphaGrid> {
        Ok(KAlphaGrid::new(self.grid.n_k, self.grid.n_alpha)?.with_k_shift(self.grid.k_shift))
    }

    pub fn patches(&self) -> Result<Vec<PatchSpec>> {
        let g = self.grid()?;
        self.patch
            .iter()
            .enumerate()
            .map(|(x, p)| {
                if p.gap == 0 || p.gap > self.lattice.n {
                    return Err(Error::Config(format!("patch[{x}].gap: must be in 1..={}, got {}", self.lattice.n, p.gap)));
                }
                if !(p.k[0] < p.k[1] && p.alpha[0] < p.alpha[1]) {
                    return Err(Error::Config(format!("patch[{x}]: ranges must be increasing")));
                }
                PatchSpec::from_coords(p.k, p.alpha, p.gap, &g)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if check_odd_n(self.lattice.n).is_err() {
            return Err(Error::Config(format!("lattice.n: must be odd and >= 3, got {}", self.lattice.n)));
        }
        self.lattice_spec()?;
        self.convention.validate()?;
        self.grid()?;
        if !(0.0..1.0).contains(&self.grid.k_shift) {
            return Err(Error::Config(format!("grid.k_shift: must be in [0, 1), got {}", self.grid.k_shift)));
        }
        self.protocol.spec().validate()?;
        if self.protocol.cycles == 0 {
            return Err(Error::Config("protocol.cycles: must be positive".into()));
        }
        if !self.protocol.beta.is_finite() {
            return Err(Error::Config("protocol.beta: must be finite".into()));
        }
        self.phase_diagram.validate()?;
        if !(self.evolve.theta > 0.0) {
            return Err(Error::Config(format!("evolve.theta: must be positive, got {}", self.evolve.theta)));
        }
        if self.evolve.gap == 0 || self.evolve.gap > self.lattice.n {
            return Err(Error::Config(format!("evolve.gap: must be in 1..={}, got {}", self.lattice.n, self.evolve.gap)));
        }
        if !(self.tolerances.tail_threshold > 0.0) {
            return Err(Error::Config("tolerances.tail_threshold: must be positive".into()));
        }
        if !(self.tolerances.chi_integer > 0.0 && self.tolerances.chi_integer <= INTEGER_TOL) {
            return Err(Error::Config(format!("tolerances.chi_integer: must be in (0, {INTEGER_TOL}]")));
        }
        Ok(())
    }

    /// Extra requirements of the topology commands.
    pub fn validate_topology(&self) -> Result<()> {
        self.validate()?;
        if self.grid.n_k < MIN_TOPOLOGY_GRID || self.grid.n_alpha < MIN_TOPOLOGY_GRID {
            return Err(Error::Config(format!(
                "grid.n_k/grid.n_alpha: topology needs at least {MIN_TOPOLOGY_GRID} points per direction, got {}x{}",
                self.grid.n_k, self.grid.n_alpha
            )));
        }
        self.patches()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let mut c = RunConfig::default();
        c.patch.push(PatchConfig { k: [-2.5132741228718345, 2.5132741228718345], alpha: [-0.6283185307179586, 1.2566370614359172], gap: 1 });
        c.protocol.beta = 0.1 + 0.2;
        c.validate().unwrap();
        let s = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&s).unwrap(), c);
    }

    #[test]
    fn unknown_field_names_location() {
        let e = RunConfig::from_toml_str("[lattice]\nn = 3\nlmax = 10\n").unwrap_err();
        let m = e.to_string();
        assert!(m.contains("lmax") && m.contains("line 3"), "{m}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn bad_values_name_the_field() {
        let c = RunConfig::from_toml_str("[lattice]\nn = 4\n").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("lattice.n"));
        let c = RunConfig::from_toml_str("[grid]\nn_k = 6\n").unwrap();
        assert!(c.validate().is_ok());
        assert!(c.validate_topology().unwrap_err().to_string().contains("grid.n_k"));
        let c = RunConfig::from_toml_str("[protocol]\npreset = \"spiral\"\n");
        assert!(c.is_err());
    }
}
