//! Text formats for states, grids and alignment runs.
//!
//! # State file (TOML)
//!
//! ```toml
//! basis = "m"              # or "jkm"
//! m_max = [4, 0, 0]        # "m" basis: per-axis window
//! # j_max = 10             # "jkm" basis
//! # fixed_km = [3, 3]      # optional (K, M) block
//! coefficients = [[[1, 0, 0], 0.6, 0.0], [[-1, 0, 0], 0.0, 0.8]]
//! # density = [[[1, 0, 0], [1, 0, 0], 0.5, 0.0], ...]
//! ```
//!
//! Index tuples are `[m_α, m_β, m_γ]` or `[J, K, M]`. Exactly one of
//! `coefficients` and `density` is given; density entries whose transpose is
//! missing are filled in by Hermitian symmetry. Unlisted entries are zero.
//!
//! # Grid files
//!
//! A grid is written as `<stem>.toml` (spec, kind, diagnostics, the optional
//! out-of-window tail) and `<stem>.tsv` with the header
//! `alpha beta gamma m_alpha m_beta m_gamma W`, one row per (angle, momentum)
//! pair with angles slowest. Floats carry 17 significant digits.
//!
//! # Run config (TOML)
//!
//! ```toml
//! j_max = 40
//! tol = 1e-10
//! [constants]
//! A = 0.5
//! C = 0.8
//! [pulse]
//! strength = -1e4
//! duration = 1e-3
//! center = 0.0
//! [initial]
//! j = 3
//! k = 3
//! m = 3
//! [times]
//! list = [0.005, 0.05, 1.44]           # or linspace = [start, stop, count]
//! [outputs]
//! signal = true
//! snapshots = false
//! [outputs.grids]                      # optional
//! beta_samples = 128
//! m_beta = 40
//! quadrature_order = 200
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisTag, JKMBasisSpec, Jkm, MBasisSpec, MomentumTriple};
use crate::dynamics::{AlignmentConfig, PulseConfig, TopConstants};
use crate::error::{Error, Result};
use crate::operator::CMatrix;
use crate::phase_space::grid::{GridKind, GridMeta, GridSpec, MomentumWindow, PhaseSpaceGrid};
use crate::quadrature::{check_order, DEFAULT_ORDER};
use crate::state::{CVector, Payload, RotorState};

/// Column header of the grid table.
pub const GRID_HEADER: &str = "alpha\tbeta\tgamma\tm_alpha\tm_beta\tm_gamma\tW";

/// Header of the alignment signal table.
pub const SIGNAL_HEADER: &str = "t_bar\tcos2beta";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

// ---------------------------------------------------------------------------
// state files

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BasisKind {
    M,
    Jkm,
}

type CoeffEntry = ([i64; 3], f64, f64);
type DensityEntry = ([i64; 3], [i64; 3], f64, f64);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    basis: BasisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m_max: Option<[u32; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    j_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_km: Option<(i32, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<CoeffEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<Vec<DensityEntry>>,
}

impl StateFile {
    fn basis(&self) -> Result<BasisTag> {
        match self.basis {
            BasisKind::M => {
                if self.j_max.is_some() || self.fixed_km.is_some() {
                    return Err(Error::Parse("basis \"m\" takes m_max, not j_max or fixed_km".into()));
                }
                let w = self.m_max.ok_or_else(|| Error::Parse("basis \"m\" needs m_max".into()))?;
                Ok(BasisTag::M(MBasisSpec { m_max: w }))
            }
            BasisKind::Jkm => {
                if self.m_max.is_some() {
                    return Err(Error::Parse("basis \"jkm\" takes j_max, not m_max".into()));
                }
                let j = self.j_max.ok_or_else(|| Error::Parse("basis \"jkm\" needs j_max".into()))?;
                match self.fixed_km {
                    Some((k, m)) => Ok(BasisTag::Jkm(
                        JKMBasisSpec::fixed(j, k, m).map_err(|e| parse_err("fixed_km", e))?,
                    )),
                    None => Ok(BasisTag::Jkm(JKMBasisSpec::full(j))),
                }
            }
        }
    }
}

fn index_in(basis: &BasisTag, t: [i64; 3]) -> Option<usize> {
    match basis {
        BasisTag::M(b) => b.index_of(&MomentumTriple::from_array(t)),
        BasisTag::Jkm(b) => {
            let j = u32::try_from(t[0]).ok()?;
            let (k, m) = (i32::try_from(t[1]).ok()?, i32::try_from(t[2]).ok()?);
            b.index_of(&Jkm::new(j, k, m).ok()?)
        }
    }
}

fn tuple_of(basis: &BasisTag, i: usize) -> [i64; 3] {
    match basis {
        BasisTag::M(b) => b.triple_of(i).as_array(),
        BasisTag::Jkm(b) => {
            let q = b.state_of(i);
            [q.j as i64, q.k as i64, q.m as i64]
        }
    }
}

/// Parses a state document.
pub fn parse_state(text: &str) -> Result<RotorState> {
    let f: StateFile = toml::from_str(text).map_err(|e| parse_err("state file", e))?;
    let basis = f.basis()?;
    let n = basis.dim();
    let locate = |t: [i64; 3], what: &str| {
        index_in(&basis, t).ok_or_else(|| Error::Parse(format!("{what} index {t:?} is outside the basis")))
    };
    match (&f.coefficients, &f.density) {
        (Some(entries), None) => {
            let mut c = CVector::zeros(n);
            let mut seen = HashSet::new();
            for &(t, re, im) in entries {
                let i = locate(t, "coefficient")?;
                if !seen.insert(i) {
                    return Err(Error::Parse(format!("duplicate coefficient index {t:?}")));
                }
                if !(re.is_finite() && im.is_finite()) {
                    return Err(Error::Parse(format!("non-finite coefficient at {t:?}")));
                }
                c[i] = Complex64::new(re, im);
            }
            let norm = c.norm();
            if (norm - 1.0).abs() > 1e-12 {
                log::warn!("state coefficients have norm {norm}; normalizing");
            }
            RotorState::pure(basis, c).map_err(|e| parse_err("coefficients", e))
        }
        (None, Some(entries)) => {
            let mut rho = CMatrix::zeros(n, n);
            let mut given = HashSet::new();
            for &(r, c, re, im) in entries {
                let (i, j) = (locate(r, "density row")?, locate(c, "density column")?);
                if !given.insert((i, j)) {
                    return Err(Error::Parse(format!("duplicate density entry {r:?} {c:?}")));
                }
                if !(re.is_finite() && im.is_finite()) {
                    return Err(Error::Parse(format!("non-finite density entry at {r:?} {c:?}")));
                }
                rho[(i, j)] = Complex64::new(re, im);
            }
            for &(i, j) in &given {
                if !given.contains(&(j, i)) {
                    rho[(j, i)] = rho[(i, j)].conj();
                }
            }
            RotorState::mixed(basis, rho).map_err(|e| parse_err("density", e))
        }
        (Some(_), Some(_)) => Err(Error::Parse("give either coefficients or density, not both".into())),
        (None, None) => Err(Error::Parse("state file has neither coefficients nor density".into())),
    }
}

pub fn read_state(path: &Path) -> Result<RotorState> {
    let text = read_text(path)?;
    parse_state(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads a whole file, naming the path in the error.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Serializes a state; entries with modulus below `1e-300` are omitted.
pub fn format_state(state: &RotorState) -> String {
    let basis = state.basis();
    let mut out = String::new();
    match basis {
        BasisTag::M(b) => {
            let [a, bb, g] = b.m_max;
            let _ = writeln!(out, "basis = \"m\"\nm_max = [{a}, {bb}, {g}]");
        }
        BasisTag::Jkm(b) => {
            let _ = writeln!(out, "basis = \"jkm\"\nj_max = {}", b.j_max);
            if let Some((k, m)) = b.fixed_km {
                let _ = writeln!(out, "fixed_km = [{k}, {m}]");
            }
        }
    }
    let tup = |t: [i64; 3]| format!("[{}, {}, {}]", t[0], t[1], t[2]);
    match state.payload() {
        Payload::Pure(c) => {
            out.push_str("coefficients = [\n");
            for (i, z) in c.iter().enumerate() {
                if z.norm() > 1e-300 {
                    let _ = writeln!(out, "  [{}, {}, {}],", tup(tuple_of(basis, i)), fmt_f64(z.re), fmt_f64(z.im));
                }
            }
        }
        Payload::Mixed(r) => {
            out.push_str("density = [\n");
            for i in 0..r.nrows() {
                for j in 0..r.ncols() {
                    let z = r[(i, j)];
                    if z.norm() > 1e-300 {
                        let _ = writeln!(
                            out,
                            "  [{}, {}, {}, {}],",
                            tup(tuple_of(basis, i)),
                            tup(tuple_of(basis, j)),
                            fmt_f64(z.re),
                            fmt_f64(z.im)
                        );
                    }
                }
            }
        }
    }
    out.push_str("]\n");
    out
}

// ---------------------------------------------------------------------------
// grids

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridHeader {
    kind: GridKind,
    spec: GridSpec,
    meta: GridMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<Vec<f64>>,
}

/// Paths `<stem>.toml` and `<stem>.tsv`.
pub fn grid_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("toml"), stem.with_extension("tsv"))
}

pub fn format_grid_meta(grid: &PhaseSpaceGrid) -> Result<String> {
    let h = GridHeader { kind: grid.kind, spec: grid.spec, meta: grid.meta.clone(), tail: grid.tail.clone() };
    toml::to_string(&h).map_err(|e| Error::Parse(format!("grid metadata: {e}")))
}

pub fn format_grid_table(grid: &PhaseSpaceGrid) -> String {
    let spec = &grid.spec;
    let nk = spec.n_momenta();
    let mut out = String::with_capacity(spec.len() * 96 + GRID_HEADER.len() + 1);
    out.push_str(GRID_HEADER);
    out.push('\n');
    let triples: Vec<[i64; 3]> = spec.window.triples().map(|m| m.as_array()).collect();
    for i in 0..spec.n_angles() {
        let [a, b, g] = spec.angle_point(i).as_array().map(fmt_f64);
        for (k, m) in triples.iter().enumerate() {
            let _ = writeln!(out, "{a}\t{b}\t{g}\t{}\t{}\t{}\t{}", m[0], m[1], m[2], fmt_f64(grid.values[i * nk + k]));
        }
    }
    out
}

/// Parses the two halves of a grid and checks that the table matches the spec.
pub fn parse_grid(meta: &str, table: &str) -> Result<PhaseSpaceGrid> {
    let h: GridHeader = toml::from_str(meta).map_err(|e| parse_err("grid metadata", e))?;
    let spec = GridSpec::new(h.spec.counts, h.spec.window).map_err(|e| parse_err("grid spec", e))?;
    let mut lines = table.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == GRID_HEADER => {}
        _ => return Err(Error::Parse(format!("grid table must start with the header {GRID_HEADER:?}"))),
    }
    let nk = spec.n_momenta();
    let mut values = Vec::with_capacity(spec.len());
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = values.len();
        if row >= spec.len() {
            return Err(Error::Parse(format!("line {}: more rows than the spec allows", ln + 1)));
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(Error::Parse(format!("line {}: expected 7 columns, found {}", ln + 1, cols.len())));
        }
        let bad = |c: &str| Error::Parse(format!("line {}: cannot parse {c:?}", ln + 1));
        let mut f = [0.0; 4];
        for (slot, c) in f.iter_mut().zip([cols[0], cols[1], cols[2], cols[6]]) {
            *slot = c.parse().map_err(|_| bad(c))?;
        }
        let mut m = [0i64; 3];
        for (slot, c) in m.iter_mut().zip(&cols[3..6]) {
            *slot = c.parse().map_err(|_| bad(c))?;
        }
        let want_angle = spec.angle_point(row / nk).as_array();
        let want_m = spec.window.triple_of(row % nk).as_array();
        if m != want_m || (0..3).any(|a| (f[a] - want_angle[a]).abs() > 1e-12) {
            return Err(Error::Parse(format!("line {}: row is out of order for the grid spec", ln + 1)));
        }
        values.push(f[3]);
    }
    if values.len() != spec.len() {
        return Err(Error::Parse(format!("grid table has {} rows, spec needs {}", values.len(), spec.len())));
    }
    PhaseSpaceGrid::new(spec, h.kind, values, h.tail, h.meta).map_err(|e| parse_err("grid", e))
}

pub fn write_grid(grid: &PhaseSpaceGrid, stem: &Path) -> Result<()> {
    let (meta, table) = grid_paths(stem);
    let m = format_grid_meta(grid)?;
    fs::write(meta, m)?;
    fs::write(table, format_grid_table(grid))?;
    Ok(())
}

pub fn read_grid(stem: &Path) -> Result<PhaseSpaceGrid> {
    let (meta, table) = grid_paths(stem);
    parse_grid(&read_text(&meta)?, &read_text(&table)?)
}

pub fn format_signal(signal: &[(f64, f64)]) -> String {
    let mut out = String::from(SIGNAL_HEADER);
    out.push('\n');
    for &(t, s) in signal {
        let _ = writeln!(out, "{}\t{}", fmt_f64(t), fmt_f64(s));
    }
    out
}

// ---------------------------------------------------------------------------
// run configs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialLevel {
    pub j: u32,
    pub k: i32,
    pub m: i32,
}

/// Explicit sample times or `linspace = [start, stop, count]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<(f64, f64, usize)>,
}

impl TimesSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let t = match (&self.list, self.linspace) {
            (Some(l), None) => l.clone(),
            (None, Some((a, b, n))) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            },
            _ => return Err(Error::Parse("[times] needs exactly one of list and linspace".into())),
        };
        if t.is_empty() {
            return Err(Error::Parse("[times] is empty".into()));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse("[times] contains a non-finite value".into()));
        }
        if let Some(i) = t.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Parse(format!("[times] must be sorted ascending: {} follows {}", t[i + 1], t[i])));
        }
        Ok(t)
    }
}

/// Wigner snapshots on a β-only grid; `m_α = M` and `m_γ = K` are fixed by
/// the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignGridSpec {
    #[serde(default = "default_beta_samples")]
    pub beta_samples: usize,
    #[serde(default = "default_m_beta")]
    pub m_beta: u32,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
}

fn default_beta_samples() -> usize {
    128
}

fn default_m_beta() -> u32 {
    40
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

impl Default for AlignGridSpec {
    fn default() -> Self {
        Self { beta_samples: default_beta_samples(), m_beta: default_m_beta(), quadrature_order: default_order() }
    }
}

impl AlignGridSpec {
    pub fn grid_spec(&self, k: i32, m: i32) -> Result<GridSpec> {
        let (k, m, b) = (k as i64, m as i64, self.m_beta as i64);
        GridSpec::new([1, self.beta_samples, 1], MomentumWindow::new([m, -b, k], [m, b, k])?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "yes")]
    pub signal: bool,
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grids: Option<AlignGridSpec>,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { signal: true, snapshots: false, grids: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub constants: TopConstants,
    pub pulse: PulseConfig,
    pub initial: InitialLevel,
    #[serde(default = "default_j_max")]
    pub j_max: u32,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub times: TimesSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

fn default_j_max() -> u32 {
    40
}

fn default_tol() -> f64 {
    1e-10
}

impl RunConfig {
    /// The `fig3` preset: `|333⟩`, `A = 1/2`, a 10⁻³ pulse, and the six snapshot
    /// times with grids.
    pub fn fig3() -> Self {
        Self {
            constants: TopConstants { a: 0.5, c: 0.8 },
            pulse: PulseConfig { strength: -1e4, duration: 1e-3, center: 0.0 },
            initial: InitialLevel { j: 3, k: 3, m: 3 },
            j_max: 40,
            tol: 1e-10,
            times: TimesSpec {
                list: Some(vec![0.005, 0.05, 0.09, 0.13, 1.44, std::f64::consts::PI]),
                linspace: None,
            },
            outputs: OutputSpec { signal: true, snapshots: true, grids: Some(AlignGridSpec::default()) },
        }
    }

    pub fn to_alignment(&self) -> Result<AlignmentConfig> {
        let times = self.times.resolve()?;
        if let Some(g) = &self.outputs.grids {
            check_order(g.quadrature_order)?;
            if g.beta_samples == 0 {
                return Err(Error::Configuration("grid beta_samples must be positive".into()));
            }
        }
        let q = &self.initial;
        let cfg = AlignmentConfig {
            constants: self.constants,
            pulse: self.pulse,
            initial: Jkm::new(q.j, q.k, q.m)?,
            j_max: self.j_max,
            times,
            tol: self.tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let c: RunConfig = toml::from_str(text).map_err(|e| parse_err("run config", e))?;
    c.times.resolve()?;
    Ok(c)
}

pub fn format_run_config(c: &RunConfig) -> Result<String> {
    toml::to_string(c).map_err(|e| Error::Parse(format!("run config: {e}")))
}

/// Loads any `deny_unknown_fields` TOML document.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| parse_err(what, e))
}
