//! Sampled phase-space functions.

use serde::{Deserialize, Serialize};

use crate::basis::{Axis, EulerAngles, MBasisSpec, MomentumTriple};
use crate::error::{config, domain, Error, Result};

/// Values below this in a marginal are treated as an implementation fault.
pub const MARGINAL_ABORT: f64 = -1e-6;

/// Values down to this in a marginal are accepted as quadrature noise.
pub const MARGINAL_NOISE: f64 = -1e-8;

/// Inclusive integer range of momenta per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumWindow {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

impl MomentumWindow {
    pub fn new(lo: [i64; 3], hi: [i64; 3]) -> Result<Self> {
        if (0..3).any(|a| lo[a] > hi[a]) {
            return domain(format!("empty momentum window {lo:?}..={hi:?}"));
        }
        Ok(Self { lo, hi })
    }

    /// `|m_axis| ≤ half[axis]`.
    pub fn symmetric(half: [u32; 3]) -> Self {
        let h = half.map(|h| h as i64);
        Self { lo: h.map(|h| -h), hi: h }
    }

    pub fn of_basis(b: &MBasisSpec) -> Self {
        Self::symmetric(b.m_max)
    }

    pub fn axis_len(&self, a: usize) -> usize {
        (self.hi[a] - self.lo[a] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..3).map(|a| self.axis_len(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, m: &MomentumTriple) -> bool {
        let v = m.as_array();
        (0..3).all(|a| v[a] >= self.lo[a] && v[a] <= self.hi[a])
    }

    pub fn covers(&self, b: &MBasisSpec) -> bool {
        (0..3).all(|a| self.lo[a] <= -(b.m_max[a] as i64) && self.hi[a] >= b.m_max[a] as i64)
    }

    /// Flat index with α slowest.
    pub fn index_of(&self, m: &MomentumTriple) -> Option<usize> {
        if !self.contains(m) {
            return None;
        }
        let v = m.as_array();
        let o = |a: usize| (v[a] - self.lo[a]) as usize;
        Some((o(0) * self.axis_len(1) + o(1)) * self.axis_len(2) + o(2))
    }

    pub fn triple_of(&self, i: usize) -> MomentumTriple {
        let ng = self.axis_len(2);
        let nb = self.axis_len(1);
        MomentumTriple::new(
            (i / (ng * nb)) as i64 + self.lo[0],
            ((i / ng) % nb) as i64 + self.lo[1],
            (i % ng) as i64 + self.lo[2],
        )
    }

    pub fn triples(&self) -> impl Iterator<Item = MomentumTriple> + '_ {
        (0..self.len()).map(move |i| self.triple_of(i))
    }

    /// Axis values `lo..=hi`.
    pub fn axis_values(&self, a: usize) -> impl Iterator<Item = i64> {
        self.lo[a]..=self.hi[a]
    }
}

/// Uniform angle samples `θ_j = j·period/n` per axis and a momentum window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: [usize; 3],
    pub window: MomentumWindow,
}

impl GridSpec {
    pub fn new(counts: [usize; 3], window: MomentumWindow) -> Result<Self> {
        if counts.contains(&0) {
            return config(format!("angle counts must be positive, got {counts:?}"));
        }
        Ok(Self { counts, window })
    }

    pub fn n_angles(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn n_momenta(&self) -> usize {
        self.window.len()
    }

    pub fn len(&self) -> usize {
        self.n_angles() * self.n_momenta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, axis: Axis) -> f64 {
        axis.period() / self.counts[axis.index()] as f64
    }

    /// Trapezoid cell volume `h_α h_β h_γ`.
    pub fn cell_volume(&self) -> f64 {
        Axis::ALL.iter().map(|&a| self.step(a)).product()
    }

    pub fn axis_samples(&self, axis: Axis) -> Vec<f64> {
        let h = self.step(axis);
        (0..self.counts[axis.index()]).map(|j| j as f64 * h).collect()
    }

    /// Angle indices of a flat angle index (α slowest).
    pub fn angle_indices(&self, i: usize) -> [usize; 3] {
        let [_, nb, ng] = self.counts;
        [i / (nb * ng), (i / ng) % nb, i % ng]
    }

    pub fn angle_index(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.counts[1] + idx[1]) * self.counts[2] + idx[2]
    }

    pub fn angle_point(&self, i: usize) -> EulerAngles {
        let [ia, ib, ig] = self.angle_indices(i);
        EulerAngles::new(
            ia as f64 * self.step(Axis::Alpha),
            ib as f64 * self.step(Axis::Beta),
            ig as f64 * self.step(Axis::Gamma),
        )
    }
}

/// What the grid values represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// Weyl symbol `W_A = tr[AΔ]`.
    Symbol,
    /// Wigner function `W = W_ρ / 4π³`.
    Wigner,
}

impl GridKind {
    /// Factor that turns stored values into Weyl-symbol values.
    pub fn to_symbol_scale(self) -> f64 {
        match self {
            GridKind::Symbol => 1.0,
            GridKind::Wigner => 4.0 * std::f64::consts::PI.powi(3),
        }
    }
}

/// Provenance and diagnostics stored with a grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMeta {
    pub source: String,
    pub state_hash: String,
    /// Gauss–Legendre order of the angle-representation path, if used.
    pub quadrature_order: Option<usize>,
    /// Norm lost to basis truncation before the grid was built.
    pub leakage: Option<f64>,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
}

/// Real samples `W(Ω_i, m_k)` on a [`GridSpec`].
///
/// `values[i * n_momenta + k]` holds angle point `i` and momentum `k`. For the
/// momentum-representation path `tail[i]` carries `Σ_m W(Ω_i, m)` over all
/// momenta outside the window, which makes the angle marginal exact.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub spec: GridSpec,
    pub kind: GridKind,
    pub values: Vec<f64>,
    pub tail: Option<Vec<f64>>,
    pub meta: GridMeta,
}

/// Both marginals of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    /// `Σ_m W(Ω_i, m)` per angle point.
    pub angle: Vec<f64>,
    /// `∫dΩ W(Ω, m_k)` per momentum.
    pub momentum: Vec<f64>,
    pub min_angle: f64,
    pub min_momentum: f64,
}

impl PhaseSpaceGrid {
    pub fn new(spec: GridSpec, kind: GridKind, values: Vec<f64>, tail: Option<Vec<f64>>, meta: GridMeta) -> Result<Self> {
        if values.len() != spec.len() {
            return domain(format!("grid holds {} values, spec needs {}", values.len(), spec.len()));
        }
        if let Some(t) = &tail {
            if t.len() != spec.n_angles() {
                return domain("tail length does not match the angle grid");
            }
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite grid value at flat index {bad}"));
        }
        Ok(Self { spec, kind, values, tail, meta })
    }

    pub fn value(&self, angle: usize, m: &MomentumTriple) -> Option<f64> {
        let k = self.spec.window.index_of(m)?;
        Some(self.values[angle * self.spec.n_momenta() + k])
    }

    /// Value at a real momentum, rounded half-up to the nearest integer triple.
    pub fn value_at_real(&self, angle: usize, m: [f64; 3]) -> Option<f64> {
        self.value(angle, &MomentumTriple::round_from(m))
    }

    pub fn angle_row(&self, angle: usize) -> &[f64] {
        let n = self.spec.n_momenta();
        &self.values[angle * n..(angle + 1) * n]
    }

    fn same_spec(&self, other: &PhaseSpaceGrid) -> Result<()> {
        if self.spec != other.spec {
            return domain("grids have different specs");
        }
        Ok(())
    }

    /// `∫dΩ Σ_m W` by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_volume()
    }

    pub fn marginals(&self) -> Result<Marginals> {
        let nk = self.spec.n_momenta();
        let dv = self.spec.cell_volume();
        let mut angle: Vec<f64> = self.values.chunks(nk).map(|r| r.iter().sum()).collect();
        if let Some(t) = &self.tail {
            for (a, t) in angle.iter_mut().zip(t) {
                *a += t;
            }
        }
        let mut momentum = vec![0.0; nk];
        for row in self.values.chunks(nk) {
            for (m, v) in momentum.iter_mut().zip(row) {
                *m += v * dv;
            }
        }
        let min_angle = angle.iter().copied().fold(f64::INFINITY, f64::min);
        let min_momentum = momentum.iter().copied().fold(f64::INFINITY, f64::min);
        if self.kind == GridKind::Wigner && (min_angle < MARGINAL_ABORT || min_momentum < MARGINAL_ABORT) {
            let worst_a = angle.iter().position(|&v| v == min_angle).unwrap_or(0);
            let worst_m = momentum.iter().position(|&v| v == min_momentum).unwrap_or(0);
            return Err(Error::Tolerance(format!(
                "negative marginal: angle min {min_angle:e} at {:?}, momentum min {min_momentum:e} at {}",
                self.spec.angle_point(worst_a),
                self.spec.window.triple_of(worst_m)
            )));
        }
        Ok(Marginals { angle, momentum, min_angle, min_momentum })
    }

    /// `∫dΩ Σ_m W_A · W` for a symbol grid `self` and a Wigner grid `state`.
    pub fn pair_integral(&self, other: &PhaseSpaceGrid) -> Result<f64> {
        self.same_spec(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.spec.cell_volume())
    }

    /// Slice along α at fixed momentum and β, γ sample indices.
    pub fn alpha_slice(&self, m: &MomentumTriple, ib: usize, ig: usize) -> Result<Vec<f64>> {
        let k = self
            .spec
            .window
            .index_of(m)
            .ok_or_else(|| Error::Domain(format!("{m} is outside the grid window")))?;
        if ib >= self.spec.counts[1] || ig >= self.spec.counts[2] {
            return domain("slice indices outside the angle grid");
        }
        let nk = self.spec.n_momenta();
        Ok((0..self.spec.counts[0])
            .map(|ia| self.values[self.spec.angle_index([ia, ib, ig]) * nk + k])
            .collect())
    }
}

/// `∫dΩ Σ_m W_A W` for a Wigner grid and a symbol grid.
pub fn phase_space_expectation(state_grid: &PhaseSpaceGrid, symbol_grid: &PhaseSpaceGrid) -> Result<f64> {
    if state_grid.kind != GridKind::Wigner || symbol_grid.kind != GridKind::Symbol {
        return domain("expected a Wigner grid and a symbol grid");
    }
    state_grid.pair_integral(symbol_grid)
}

/// Negativity diagnostics of a Wigner grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    /// `∫dΩ Σ_m max(0, −W)`.
    pub volume: f64,
    pub min: f64,
    pub max: f64,
    /// `min / max`.
    pub ratio: f64,
}

pub fn negativity_volume(grid: &PhaseSpaceGrid) -> Negativity {
    let dv = grid.spec.cell_volume();
    let volume = grid.values.iter().map(|&v| (-v).max(0.0)).sum::<f64>() * dv;
    let min = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ratio = if max != 0.0 { min / max } else { 0.0 };
    Negativity { volume, min, max, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_index_roundtrip() {
        let w = MomentumWindow::new([-1, -2, 0], [3, 4, 0]).unwrap();
        assert_eq!(w.len(), 35);
        for i in 0..w.len() {
            assert_eq!(w.index_of(&w.triple_of(i)), Some(i));
        }
        assert!(MomentumWindow::new([1, 0, 0], [0, 0, 0]).is_err());
        assert!(w.covers(&MBasisSpec::new(1, 0, 0)));
        assert!(!w.covers(&MBasisSpec::new(2, 0, 0)));
    }

    #[test]
    fn angle_points_are_uniform() {
        let s = GridSpec::new([4, 2, 1], MomentumWindow::symmetric([0, 0, 0])).unwrap();
        let p = s.angle_point(s.angle_index([3, 1, 0]));
        assert!((p.alpha() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!((p.beta() - 0.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!(GridSpec::new([0, 1, 1], s.window).is_err());
    }

    #[test]
    fn non_finite_values_rejected() {
        let s = GridSpec::new([1, 1, 1], MomentumWindow::symmetric([0, 0, 0])).unwrap();
        assert!(PhaseSpaceGrid::new(s, GridKind::Wigner, vec![f64::NAN], None, GridMeta::default()).is_err());
        assert!(PhaseSpaceGrid::new(s, GridKind::Wigner, vec![1.0, 2.0], None, GridMeta::default()).is_err());
    }
}
