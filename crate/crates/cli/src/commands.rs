use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rotor_wigner::dynamics::{
    classical_hamiltonian, classical_trajectory, run_alignment, ClassicalState, KickReport, TopConstants,
};
use rotor_wigner::io::{self, fmt_f64, AlignGridSpec, RunConfig};
use rotor_wigner::phase_space::grid::{negativity_volume, GridSpec, MomentumWindow, Negativity, PhaseSpaceGrid};
use rotor_wigner::phase_space::{wigner_from_angle_basis, wigner_from_m_basis};
use rotor_wigner::state::{orientation_density, to_m_basis};
use rotor_wigner::states::{self, coherent_state, count_fringes, CoherentSpec};
use rotor_wigner::verify::run_verify;
use rotor_wigner::{Axis, BasisTag, Error, MBasisSpec, MomentumTriple, Result, RotorState};

use crate::plot;
use crate::Common;

/// Normalization must hold to this for a grid to pass.
const NORM_TOL: f64 = 1e-6;

/// Top-shell population that turns the truncation warning into an error.
const TOP_SHELL_ERROR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalPath {
    /// Momentum path for "m" states, angle path for "jkm" states.
    Auto,
    Momentum,
    Angle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig3,
}

/// Files are collected first and written only once every computation has
/// succeeded.
struct Outputs {
    dir: PathBuf,
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: impl AsRef<Path>, content: String) {
        self.files.push((self.dir.join(name), content));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut s = serde_json::to_string_pretty(value).expect("report is plain data");
        s.push('\n');
        self.add(name, s);
    }

    fn add_grid(&mut self, stem: &str, grid: &PhaseSpaceGrid) -> Result<()> {
        self.add(format!("{stem}.toml"), io::format_grid_meta(grid)?);
        self.add(format!("{stem}.tsv"), io::format_grid_table(grid));
        Ok(())
    }

    fn flush(self) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        for (p, c) in &self.files {
            fs::write(p, c)?;
            println!("{}", p.display());
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct GridReport {
    path: &'static str,
    state_hash: String,
    normalization: f64,
    negativity: Negativity,
    /// Largest `|Σ_m W − sin β |ψ|²|` over angle points, when the grid
    /// carries its out-of-window tail.
    angle_marginal_residual: Option<f64>,
    /// Largest `|∫dΩ W − ⟨m|ρ|m⟩|` over the window, for momentum-basis states.
    momentum_marginal_residual: Option<f64>,
    leakage: Option<f64>,
    /// Set when the marginals failed the negativity policy.
    marginal_error: Option<String>,
}

fn grid_report(state: &RotorState, grid: &PhaseSpaceGrid, path: &'static str) -> Result<GridReport> {
    let (angle_res, mom_res, err) = match grid.marginals() {
        Ok(m) => {
            let angle = match grid.tail {
                Some(_) => {
                    let mut worst = 0.0f64;
                    for (i, v) in m.angle.iter().enumerate() {
                        worst = worst.max((v - orientation_density(state, &grid.spec.angle_point(i))?).abs());
                    }
                    Some(worst)
                }
                None => None,
            };
            let mom = match state.basis() {
                BasisTag::M(b) => {
                    let rho = state.density_matrix();
                    let mut worst = 0.0f64;
                    for (k, t) in grid.spec.window.triples().enumerate() {
                        let want = b.index_of(&t).map_or(0.0, |i| rho[(i, i)].re);
                        worst = worst.max((m.momentum[k] - want).abs());
                    }
                    Some(worst)
                }
                BasisTag::Jkm(_) => None,
            };
            (angle, mom, None)
        }
        Err(Error::Tolerance(msg)) => (None, None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(GridReport {
        path,
        state_hash: grid.meta.state_hash.clone(),
        normalization: grid.integral(),
        negativity: negativity_volume(grid),
        angle_marginal_residual: angle_res,
        momentum_marginal_residual: mom_res,
        leakage: grid.meta.leakage,
        marginal_error: err,
    })
}

/// Tolerance failures found after the outputs were written.
fn breach(r: &GridReport) -> Option<String> {
    if let Some(e) = &r.marginal_error {
        return Some(e.clone());
    }
    if (r.normalization - 1.0).abs() > NORM_TOL {
        return Some(format!("normalization {} differs from 1 by more than {NORM_TOL:e}", r.normalization));
    }
    None
}

fn finish(report: &GridReport) -> Result<()> {
    match breach(report) {
        Some(msg) => Err(Error::Tolerance(msg)),
        None => Ok(()),
    }
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "state".into())
}

pub fn wigner(c: &Common, state_path: &Path, counts: [usize; 3], mwin: [u32; 3], path: EvalPath) -> Result<()> {
    let state = io::read_state(state_path)?;
    let spec = GridSpec::new(counts, MomentumWindow::symmetric(mwin))?;
    let path = match (path, state.basis()) {
        (EvalPath::Auto, BasisTag::M(_)) => EvalPath::Momentum,
        (EvalPath::Auto, BasisTag::Jkm(_)) => EvalPath::Angle,
        (p, _) => p,
    };
    let (grid, state, name) = match path {
        EvalPath::Angle => (wigner_from_angle_basis(&state, &spec, c.quadrature_order)?, state, "angle"),
        _ => {
            let (s, leakage) = match state.basis() {
                BasisTag::M(_) => (state, None),
                BasisTag::Jkm(_) => {
                    let (s, rep) = to_m_basis(&state, MBasisSpec { m_max: mwin }, c.quadrature_order)?;
                    (s, Some(rep.leakage))
                }
            };
            let mut g = wigner_from_m_basis(&s, &spec)?;
            g.meta.leakage = leakage;
            (g, s, "momentum")
        }
    };
    let report = grid_report(&state, &grid, name)?;
    let stem = format!("{}_wigner", file_stem(state_path));
    let mut out = Outputs::new(&c.out);
    out.add_grid(&stem, &grid)?;
    out.add_json(&format!("{stem}.report.json"), &report);
    if c.plot {
        out.add("plot.py", plot::script(&[stem.as_str()], None));
    }
    out.flush()?;
    finish(&report)
}

#[derive(Debug, Serialize)]
struct CoherentReport {
    spec: CoherentSpec,
    basis: MBasisSpec,
    /// Grid point of the largest value, `(angle, m)` on the coherent axis.
    peak: (f64, i64),
    #[serde(flatten)]
    grid: GridReport,
}

fn single_axis_spec(axis: Axis, samples: usize, basis: &MBasisSpec) -> Result<GridSpec> {
    let mut counts = [1; 3];
    counts[axis.index()] = samples;
    GridSpec::new(counts, MomentumWindow::of_basis(basis))
}

fn peak(grid: &PhaseSpaceGrid, axis: Axis) -> (f64, i64) {
    let (i, _) = grid.values.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let nk = grid.spec.n_momenta();
    let omega = grid.spec.angle_point(i / nk);
    let m = grid.spec.window.triple_of(i % nk);
    (omega.get(axis), m.get(axis))
}

pub fn coherent(c: &Common, sigma: f64, center: (f64, i64), axis: Axis, samples: usize) -> Result<()> {
    let spec = CoherentSpec::new(sigma, center.0, center.1, axis)?;
    let basis = spec.minimal_basis();
    let state = coherent_state(&spec, &basis)?;
    let gspec = single_axis_spec(axis, samples, &basis)?;
    let grid = wigner_from_m_basis(&state, &gspec)?;
    let report = CoherentReport { spec, basis, peak: peak(&grid, axis), grid: grid_report(&state, &grid, "momentum")? };
    let mut out = Outputs::new(&c.out);
    out.add("coherent.state.toml", io::format_state(&state));
    out.add_grid("coherent", &grid)?;
    out.add_json("coherent.report.json", &report);
    if c.plot {
        out.add("plot.py", plot::script(&["coherent"], None));
    }
    out.flush()?;
    finish(&report.grid)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Component {
    state: CoherentSpec,
    /// `[re, im]`.
    #[serde(default = "unit_weight")]
    weight: [f64; 2],
}

fn unit_weight() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuperposeSpec {
    component: Vec<Component>,
    #[serde(default)]
    grid: SuperposeGrid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuperposeGrid {
    #[serde(default = "default_samples")]
    samples: usize,
    /// Half-width on the coherent axis; defaults to the widest component need.
    window: Option<u32>,
}

fn default_samples() -> usize {
    256
}

impl Default for SuperposeGrid {
    fn default() -> Self {
        Self { samples: default_samples(), window: None }
    }
}

#[derive(Debug, Serialize)]
struct SuperposeReport {
    components: usize,
    basis: MBasisSpec,
    /// Momentum midway between the first two centers, when those sit at one
    /// α and differ in m_α.
    fringe_slice: Option<i64>,
    fringes: Option<usize>,
    #[serde(flatten)]
    grid: GridReport,
}

pub fn superpose(c: &Common, spec_path: &Path) -> Result<()> {
    let text = io::read_text(spec_path)?;
    let spec: SuperposeSpec = io::parse_toml(&text, &spec_path.display().to_string())?;
    let first = spec.component.first().ok_or_else(|| Error::Parse("no [[component]] entries".into()))?;
    let axis = first.state.axis;
    if spec.component.iter().any(|k| k.state.axis != axis) {
        return Err(Error::Parse("all components must share one axis".into()));
    }
    for k in &spec.component {
        k.state.validate()?;
    }
    let mut basis = MBasisSpec { m_max: [0; 3] };
    for k in &spec.component {
        let b = k.state.minimal_basis();
        for a in 0..3 {
            basis.m_max[a] = basis.m_max[a].max(b.m_max[a]);
        }
    }
    if let Some(w) = spec.grid.window {
        basis.m_max[axis.index()] = w;
    }
    let components: Vec<RotorState> = spec.component.iter().map(|k| coherent_state(&k.state, &basis)).collect::<Result<_>>()?;
    let weights: Vec<Complex64> = spec.component.iter().map(|k| Complex64::new(k.weight[0], k.weight[1])).collect();
    let state = states::superpose(&components, &weights)?;
    let gspec = single_axis_spec(axis, spec.grid.samples, &basis)?;
    let grid = wigner_from_m_basis(&state, &gspec)?;

    let s = &spec.component;
    let stacked = s.len() >= 2 && s[0].state.center_angle == s[1].state.center_angle && s[0].state.center_m != s[1].state.center_m;
    let (fringe_slice, fringes) = if axis == Axis::Alpha && stacked {
        let mid = ((s[0].state.center_m + s[1].state.center_m) as f64 / 2.0).round() as i64;
        let mut t = s[0].state.bystanders;
        t[0] = mid;
        (Some(mid), Some(count_fringes(&grid, &MomentumTriple::from_array(t))?))
    } else {
        (None, None)
    };
    let report = SuperposeReport {
        components: spec.component.len(),
        basis,
        fringe_slice,
        fringes,
        grid: grid_report(&state, &grid, "momentum")?,
    };
    let mut out = Outputs::new(&c.out);
    out.add("superpose.state.toml", io::format_state(&state));
    out.add_grid("superpose", &grid)?;
    out.add_json("superpose.report.json", &report);
    if c.plot {
        out.add("plot.py", plot::script(&["superpose"], None));
    }
    out.flush()?;
    finish(&report.grid)
}

#[derive(Debug, Serialize)]
struct SnapshotReport {
    t_bar: f64,
    cos2beta: f64,
    norm: f64,
    grid: Option<String>,
    /// `∫dΩ Σ_m W` over the stored momentum window.
    grid_normalization: Option<f64>,
    /// Largest `|Σ_m W − sin β |ψ|²|` over the β samples, window sum only.
    window_marginal_residual: Option<f64>,
    /// Same check on the momentum-basis image of the snapshot, tail included.
    angle_marginal_residual: Option<f64>,
    /// Norm lost converting the snapshot into the momentum window.
    leakage: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AlignReport {
    config: RunConfig,
    kick: KickReport,
    snapshots: Vec<SnapshotReport>,
}

/// Angle-path grid of a snapshot, the largest window-sum marginal residual of
/// that grid, and the marginal residual of the same snapshot taken through the
/// momentum basis, where the grid carries its exact tail.
fn align_grid(state: &RotorState, g: &AlignGridSpec) -> Result<(PhaseSpaceGrid, f64, f64, f64)> {
    let (k, m) = state.basis().as_jkm()?.fixed_km.expect("alignment runs use a fixed block");
    let spec = g.grid_spec(k, m)?;
    let grid = wigner_from_angle_basis(state, &spec, g.quadrature_order)?;
    let nk = spec.n_momenta();
    let mut window = 0.0f64;
    for i in 0..spec.n_angles() {
        let row: f64 = grid.values[i * nk..(i + 1) * nk].iter().sum();
        window = window.max((row - orientation_density(state, &spec.angle_point(i))?).abs());
    }
    let basis = MBasisSpec::new(m.unsigned_abs(), g.m_beta, k.unsigned_abs());
    let (ms, conv) = to_m_basis(state, basis, g.quadrature_order)?;
    let mgrid = wigner_from_m_basis(&ms, &spec)?;
    let marg = mgrid.marginals()?;
    let mut exact = 0.0f64;
    for (i, v) in marg.angle.iter().enumerate() {
        exact = exact.max((v - orientation_density(&ms, &spec.angle_point(i))?).abs());
    }
    Ok((grid, window, exact, conv.leakage))
}

pub fn align(c: &Common, config: Option<&Path>, preset: Option<Preset>) -> Result<()> {
    let rc = match (config, preset) {
        (Some(p), _) => io::parse_run_config(&io::read_text(p)?).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", p.display())),
            other => other,
        })?,
        (None, Some(Preset::Fig3)) => RunConfig::fig3(),
        (None, None) => return Err(Error::Parse("align needs --config or --preset".into())),
    };
    let cfg = rc.to_alignment()?;
    let run = run_alignment(&cfg)?;
    if run.kick.top_shell_population > TOP_SHELL_ERROR {
        return Err(Error::Truncation(format!(
            "population {:e} in the top two J shells exceeds {TOP_SHELL_ERROR:e}; raise j_max",
            run.kick.top_shell_population
        )));
    }
    let grids: Vec<Option<(PhaseSpaceGrid, f64, f64, f64)>> = match &rc.outputs.grids {
        Some(g) => run.snapshots.par_iter().map(|s| align_grid(s, g).map(Some)).collect::<Result<_>>()?,
        None => vec![None; run.snapshots.len()],
    };

    let mut out = Outputs::new(&c.out);
    let mut snaps = Vec::new();
    let mut stems = Vec::new();
    for (i, ((s, &(t, v)), g)) in run.snapshots.iter().zip(&run.signal).zip(&grids).enumerate() {
        if rc.outputs.snapshots {
            out.add(format!("snapshot_{i:02}.toml"), io::format_state(s));
        }
        let stem = format!("grid_{i:02}");
        let (name, norm, window, exact, leakage) = match g {
            Some((grid, w, e, l)) => {
                out.add_grid(&stem, grid)?;
                stems.push(stem.clone());
                (Some(stem), Some(grid.integral()), Some(*w), Some(*e), Some(*l))
            }
            None => (None, None, None, None, None),
        };
        snaps.push(SnapshotReport {
            t_bar: t,
            cos2beta: v,
            norm: s.norm(),
            grid: name,
            grid_normalization: norm,
            window_marginal_residual: window,
            angle_marginal_residual: exact,
            leakage,
        });
    }
    if rc.outputs.signal {
        out.add("signal.tsv", io::format_signal(&run.signal));
    }
    out.add_json("align.report.json", &AlignReport { config: rc.clone(), kick: run.kick, snapshots: snaps });
    if c.plot {
        let refs: Vec<&str> = stems.iter().map(String::as_str).collect();
        out.add("plot.py", plot::script(&refs, rc.outputs.signal.then_some("signal.tsv")));
    }
    out.flush()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalInit {
    constants: TopConstants,
    state: ClassicalState,
}

#[derive(Debug, Serialize)]
struct ClassicalReport {
    constants: TopConstants,
    initial: ClassicalState,
    t_span: f64,
    tol: f64,
    samples: usize,
    truncated: bool,
    energy_drift: f64,
}

/// Relative energy drift allowed over a trajectory.
const ENERGY_TOL: f64 = 1e-9;

pub fn classical(c: &Common, init: &Path, t_span: f64, tol: f64) -> Result<()> {
    let text = io::read_text(init)?;
    let ini: ClassicalInit = io::parse_toml(&text, &init.display().to_string())?;
    ini.constants.validate()?;
    let path = classical_trajectory(&ini.state, t_span, &ini.constants, tol)?;
    let mut table = String::from("t\talpha\tbeta\tgamma\tp_alpha\tp_beta\tp_gamma\tH\n");
    for (t, x) in path.times.iter().zip(&path.points) {
        let h = classical_hamiltonian(x, &ini.constants)?;
        let cols = [*t, x.alpha, x.beta, x.gamma, x.p_alpha, x.p_beta, x.p_gamma, h].map(fmt_f64);
        table.push_str(&cols.join("\t"));
        table.push('\n');
    }
    let report = ClassicalReport {
        constants: ini.constants,
        initial: ini.state,
        t_span,
        tol,
        samples: path.times.len(),
        truncated: path.truncated,
        energy_drift: path.energy_drift,
    };
    let mut out = Outputs::new(&c.out);
    out.add("trajectory.tsv", table);
    out.add_json("classical.report.json", &report);
    out.flush()?;
    if path.truncated {
        return Err(Error::Truncation(format!(
            "trajectory reached the pole guard at t = {}",
            path.times.last().copied().unwrap_or(0.0)
        )));
    }
    if path.energy_drift > ENERGY_TOL {
        return Err(Error::Tolerance(format!("relative energy drift {:e} exceeds {ENERGY_TOL:e}", path.energy_drift)));
    }
    Ok(())
}

pub fn verify(c: &Common, seed: u64) -> Result<()> {
    let report = run_verify(seed, c.quadrature_order)?;
    for s in &report.suites {
        eprintln!(
            "{:<26} {} residual {:.3e} tol {:.1e}",
            s.name,
            if s.passed { "PASS" } else { "FAIL" },
            s.residual,
            s.tolerance
        );
    }
    let mut out = Outputs::new(&c.out);
    let mut json = report.to_json();
    json.push('\n');
    out.add("verify.report.json", json);
    out.flush()?;
    let failed = report.suites.iter().filter(|s| !s.passed).count();
    if failed > 0 {
        return Err(Error::Tolerance(format!("{failed} invariant suite(s) failed")));
    }
    Ok(())
}
