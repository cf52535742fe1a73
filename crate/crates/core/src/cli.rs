//! Command-line front end. Every output is a pure function of the resolved config.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::angular::Mode;
use crate::config::{InitialState, PatchConfig, PresetName, RunConfig};
use crate::dynamics::{edge_state, evolve, thermal_state, write_populations_csv, write_trace_csv, EvolutionTrace};
use crate::error::{Error, Result};
use crate::linalg::fmt_num;
use crate::floquet::{band_grid, write_grid_csv, BandField};
use crate::topology::{analyze, nodal_line_map, patch_euler_class, write_nodal_csv, zak_loops, Direction, PatchResult, ZakRecord};

#[derive(Debug, Parser)]
#[command(name = "kickrotor", version, about = "Band topology and dynamics of triple-kicked quantum rotors")]
pub struct Cli {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub free_phase_multiplier: Option<u8>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quasienergies and gaps on the (k, α) grid
    Bands(GridArgs),
    /// Nodes, Dirac strings, Zak phases and patch Euler classes
    Topology(TopologyArgs),
    /// Nodal lines over (P1, P4) with P2 = P3 = 0
    PhaseDiagram(PhaseArgs),
    /// Stroboscopic evolution of a thermal or edge state
    Evolve(EvolveArgs),
    /// Zak phases along every k and α loop
    Zak(GridArgs),
    /// Patch Euler classes only
    Euler(TopologyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// free, constant, fig1_circle or fig3_family
    #[arg(long)]
    pub preset: Option<PresetName>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// constant pulses as P1,P2,P3,P4
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pulses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// bands per cell
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_k: Option<usize>,
    #[arg(long)]
    pub n_alpha: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// extra patch as k0,k1,alpha0,alpha1,gap (radians)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub patch: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_p1: Option<usize>,
    #[arg(long)]
    pub n_p4: Option<usize>,
    #[arg(long)]
    pub n_k: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p1_range: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p4_range: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub l_max: Option<usize>,
    /// thermal or edge
    #[arg(long)]
    pub initial: Option<InitialState>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// gap hosting the edge state
    #[arg(long)]
    pub gap: Option<usize>,
    #[arg(long)]
    pub n_gamma: Option<usize>,
    #[arg(long)]
    pub cycles: Option<usize>,
}

fn exact<const M: usize>(flag: &str, v: &[f64]) -> Result<[f64; M]> {
    v.try_into().map_err(|_| Error::Config(format!("--{flag}: expected {M} comma-separated numbers, got {}", v.len())))
}

impl ProtocolArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        if let Some(p) = self.preset {
            c.protocol.preset = p;
        }
        if let Some(b) = self.beta {
            c.protocol.beta = b;
        }
        if let Some(p) = &self.pulses {
            c.protocol.pulses = exact("pulses", p)?;
        }
        Ok(())
    }
}

impl GridArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        self.protocol.apply(c)?;
        if let Some(n) = self.n {
            c.lattice.n = n;
        }
        if let Some(x) = self.n_k {
            c.grid.n_k = x;
        }
        if let Some(x) = self.n_alpha {
            c.grid.n_alpha = x;
        }
        Ok(())
    }
}

impl TopologyArgs {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        self.grid.apply(c)?;
        if let Some(p) = &self.patch {
            let [k0, k1, a0, a1, g] = exact("patch", p)?;
            if g.fract() != 0.0 || g < 1.0 {
                return Err(Error::Config(format!("--patch: gap must be a positive integer, got {g}")));
            }
            c.patch.push(PatchConfig { k: [k0, k1], alpha: [a0, a1], gap: g as usize });
        }
        Ok(())
    }
}

/// Config file, then global flags, then subcommand flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        c.output.dir = d.clone();
    }
    if let Some(m) = cli.mode {
        c.lattice.mode = m;
    }
    if let Some(f) = cli.free_phase_multiplier {
        c.convention.free_phase_multiplier = f;
    }
    match &cli.command {
        Command::Bands(a) | Command::Zak(a) => a.apply(&mut c)?,
        Command::Topology(a) | Command::Euler(a) => a.apply(&mut c)?,
        Command::PhaseDiagram(a) => {
            if let Some(n) = a.n {
                c.lattice.n = n;
            }
            let pd = &mut c.phase_diagram;
            if let Some(x) = a.n_p1 {
                pd.n_p1 = x;
            }
            if let Some(x) = a.n_p4 {
                pd.n_p4 = x;
            }
            if let Some(x) = a.n_k {
                pd.n_k = x;
            }
            if let Some(r) = &a.p1_range {
                pd.p1_range = exact("p1-range", r)?;
            }
            if let Some(r) = &a.p4_range {
                pd.p4_range = exact("p4-range", r)?;
            }
        }
        Command::Evolve(a) => {
            a.protocol.apply(&mut c)?;
            if let Some(n) = a.n {
                c.lattice.n = n;
            }
            if let Some(x) = a.l_max {
                c.lattice.l_max = x;
            }
            if let Some(x) = a.initial {
                c.evolve.initial = x;
            }
            if let Some(x) = a.theta {
                c.evolve.theta = x;
            }
            if let Some(x) = a.gap {
                c.evolve.gap = x;
            }
            if let Some(x) = a.n_gamma {
                c.protocol.n_gamma = x;
            }
            if let Some(x) = a.cycles {
                c.protocol.cycles = x;
            }
        }
    }
    match cli.command {
        Command::Topology(_) | Command::Euler(_) | Command::Zak(_) => c.validate_topology()?,
        _ => c.validate()?,
    }
    Ok(c)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn field(c: &RunConfig) -> Result<BandField> {
    band_grid(c.lattice.n, c.grid()?, &c.protocol.spec(), &c.convention)
}

fn check_chi(c: &RunConfig, r: &PatchResult, grid: (usize, usize)) -> Result<()> {
    if (r.chi_raw - r.chi as f64).abs() > c.tolerances.chi_integer {
        return Err(Error::Resolution { chi_raw: r.chi_raw, suggested_n_k: 2 * grid.0, suggested_n_alpha: 2 * grid.1 });
    }
    Ok(())
}

#[derive(Serialize)]
struct NodeJson {
    id: usize,
    gap: usize,
    k: f64,
    alpha: f64,
    flux: i8,
    plaquette: [usize; 2],
    partner: Option<usize>,
}

#[derive(Serialize)]
struct StringJson {
    gap: usize,
    nodes: Option<[usize; 2]>,
    winding: Option<Direction>,
    string: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct EulerJson {
    patch: [f64; 4],
    gap_pair: [usize; 2],
    chi_raw: f64,
    chi: i64,
    nodes_inside: usize,
}

fn euler_json(c: &RunConfig, results: &[PatchResult]) -> Vec<EulerJson> {
    c.patch
        .iter()
        .zip(results)
        .map(|(p, r)| EulerJson {
            patch: [p.k[0], p.k[1], p.alpha[0], p.alpha[1]],
            gap_pair: r.gap_pair,
            chi_raw: r.chi_raw,
            chi: r.chi,
            nodes_inside: r.nodes_inside,
        })
        .collect()
}

fn write_zak_csv(dir: &Path, name: &str, rows: &[ZakRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, name)?);
    w.write_record(["band", "direction", "transverse", "phase"])?;
    for z in rows {
        let d = match z.direction {
            Direction::K => "k",
            Direction::Alpha => "alpha",
        };
        w.write_record([z.band.to_string(), d.to_string(), fmt_num(z.transverse), fmt_num(z.phase)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EvolveSummary {
    initial: InitialState,
    periods: usize,
    initial_l2: f64,
    final_l2: f64,
    max_l2: f64,
    max_norm_drift: f64,
    max_tail_mass: f64,
    reliable: bool,
}

/// Run one subcommand; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let c = resolve_config(cli)?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads: must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let dir = c.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let mut note = |name: &str| written.push(dir.join(name));
    match &cli.command {
        Command::Bands(_) => {
            let f = field(&c)?;
            write_grid_csv(&f, create(&dir, "bands.csv")?)?;
            note("bands.csv");
        }
        Command::Topology(_) => {
            let f = field(&c)?;
            let patches = c.patches()?;
            let (report, _) = analyze(&f, &patches)?;
            for r in &report.patches {
                check_chi(&c, r, (c.grid.n_k, c.grid.n_alpha))?;
            }
            let nodes: Vec<NodeJson> = report
                .nodes
                .iter()
                .map(|r| NodeJson {
                    id: r.id,
                    gap: r.gap,
                    k: r.k,
                    alpha: r.alpha,
                    flux: r.flux,
                    plaquette: r.plaquette,
                    partner: r.partner,
                })
                .collect();
            let strings: Vec<StringJson> = report
                .strings
                .iter()
                .map(|s| StringJson { gap: s.gap, nodes: s.nodes, winding: s.winding, string: s.string.clone() })
                .collect();
            write_json(&dir, "nodes.json", &nodes)?;
            write_json(&dir, "strings.json", &strings)?;
            write_json(&dir, "euler.json", &euler_json(&c, &report.patches))?;
            write_zak_csv(&dir, "zak.csv", &report.zak)?;
            write_json(
                &dir,
                "topology.json",
                &serde_json::json!({
                    "node_counts": report.node_counts,
                    "strings": report.strings.len(),
                    "zak_loops": report.zak.len(),
                    "unresolved_loops": report.unresolved_loops.len(),
                    "patches": report.patches.len(),
                }),
            )?;
            for n in ["nodes.json", "strings.json", "euler.json", "zak.csv", "topology.json"] {
                note(n);
            }
        }
        Command::Euler(_) => {
            let f = field(&c)?;
            let patches = c.patches()?;
            if patches.is_empty() {
                return Err(Error::Config("patch: euler needs at least one [[patch]] or --patch".into()));
            }
            let results = patches.iter().map(|p| patch_euler_class(p, &f)).collect::<Result<Vec<_>>>()?;
            for r in &results {
                check_chi(&c, r, (c.grid.n_k, c.grid.n_alpha))?;
            }
            write_json(&dir, "euler.json", &euler_json(&c, &results))?;
            note("euler.json");
        }
        Command::Zak(_) => {
            let f = field(&c)?;
            let mut rows = Vec::new();
            for d in [Direction::K, Direction::Alpha] {
                for (z, r) in zak_loops(&f, d)? {
                    r?;
                    rows.push(z);
                }
            }
            write_zak_csv(&dir, "zak.csv", &rows)?;
            write_json(&dir, "zak.json", &rows)?;
            note("zak.csv");
            note("zak.json");
        }
        Command::PhaseDiagram(_) => {
            let pts = nodal_line_map(c.lattice.n, &c.phase_diagram, &c.convention)?;
            write_nodal_csv(&pts, create(&dir, "nodal_lines.csv")?)?;
            note("nodal_lines.csv");
        }
        Command::Evolve(_) => {
            let spec = c.lattice_spec()?;
            let protocol = c.protocol.spec();
            let state = match c.evolve.initial {
                InitialState::Thermal => thermal_state(c.evolve.theta, &spec)?,
                InitialState::Edge => edge_state(
                    &protocol.pulses(c.evolve.alpha),
                    &spec,
                    c.evolve.gap,
                    c.lattice.mode,
                    &c.convention,
                    &c.evolve.edge,
                )?,
            };
            let trace = evolve(&state, &protocol, &spec, c.lattice.mode, &c.convention, c.tolerances.tail_threshold)?;
            write_trace_csv(&trace, create(&dir, "trace.csv")?)?;
            write_populations_csv(&trace, create(&dir, "populations.csv")?)?;
            write_json(&dir, "evolve.json", &summary(c.evolve.initial, &trace))?;
            if !trace.reliable {
                eprintln!(
                    "warning: tail mass {:.3e} exceeded {:.1e}; the cutoff at l_max = {} reflects the state",
                    trace.max_tail(),
                    trace.tail_threshold,
                    spec.l_max
                );
            }
            for n in ["trace.csv", "populations.csv", "evolve.json"] {
                note(n);
            }
        }
    }
    Ok(written)
}

fn summary(initial: InitialState, t: &EvolutionTrace) -> EvolveSummary {
    EvolveSummary {
        initial,
        periods: t.rows.len() - 1,
        initial_l2: t.rows[0].l2_expectation,
        final_l2: t.final_l2(),
        max_l2: t.max_l2(),
        max_norm_drift: t.max_norm_drift(),
        max_tail_mass: t.max_tail(),
        reliable: t.reliable,
    }
}

/// Parse arguments, run, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
