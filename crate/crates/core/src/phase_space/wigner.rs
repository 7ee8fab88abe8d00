//! Wigner functions and Weyl-symbol grids.
//!
//! [`wigner_from_m_basis`] sums the momentum representation in closed form.
//! [`wigner_from_angle_basis`] integrates the angle representation
//!
//! ```text
//! W(Ω, m) = (1/4π³) ∫dα'dβ'dγ' √(sin β'₊ sin β'₋) e^{i(m_α α' + 2m_β β' + m_γ γ')} ⟨Ω'₋|ρ|Ω'₊⟩
//! ```
//!
//! by quadrature. With `g(Ω) = √(sin β) ⟨Ω|ψ⟩` the integrand is
//! `g(Ω₋) g*(Ω₊)`, which has no pole. An axis on which every component of the
//! state carries the same momentum `m₀` is integrated analytically: its
//! integral is the period times `δ_{m, m₀}`.

use std::f64::consts::PI;

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::basis::{Axis, BasisTag, EulerAngles};
use crate::error::{domain, Result};
use crate::operator::OperatorMatrix;
use crate::phase_space::grid::{GridKind, GridMeta, GridSpec, PhaseSpaceGrid};
use crate::phase_space::modes::{Entry, Execution, ModeTable};
use crate::quadrature::{check_order, GaussLegendre};
use crate::state::{reduced_wavefunction, state_hash, CVector, Payload, RotorState};

/// Imaginary parts above this are reported as a warning.
pub const IMAG_WARN: f64 = 1e-10;

fn four_pi_cubed() -> f64 {
    4.0 * PI.powi(3)
}

/// Nonzero elements `⟨m'|ρ|m''⟩` of an m-basis state.
pub fn state_entries(state: &RotorState) -> Result<Vec<Entry>> {
    let basis = state.basis().as_m()?;
    let triples: Vec<[i64; 3]> = basis.triples().map(|t| t.as_array()).collect();
    let mut out = Vec::new();
    match state.payload() {
        Payload::Pure(c) => {
            let nz: Vec<(usize, Complex64)> =
                c.iter().enumerate().filter(|(_, v)| v.norm_sqr() > 0.0).map(|(i, v)| (i, *v)).collect();
            out.reserve(nz.len() * nz.len());
            for &(i, ci) in &nz {
                for &(j, cj) in &nz {
                    out.push(Entry { row: triples[i], col: triples[j], value: ci * cj.conj() });
                }
            }
        }
        Payload::Mixed(r) => {
            for (i, ti) in triples.iter().enumerate() {
                for (j, tj) in triples.iter().enumerate() {
                    let v = r[(i, j)];
                    if v.norm_sqr() > 0.0 {
                        out.push(Entry { row: *ti, col: *tj, value: v });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Nonzero elements of an m-basis operator.
pub fn operator_entries(op: &OperatorMatrix) -> Result<Vec<Entry>> {
    let basis = op.basis().as_m()?;
    let triples: Vec<[i64; 3]> = basis.triples().map(|t| t.as_array()).collect();
    let m = op.matrix();
    let mut out = Vec::new();
    for (i, ti) in triples.iter().enumerate() {
        for (j, tj) in triples.iter().enumerate() {
            let v = m[(i, j)];
            if v.norm_sqr() > 0.0 {
                out.push(Entry { row: *ti, col: *tj, value: v });
            }
        }
    }
    Ok(out)
}

fn report_imag(max_imag: f64, what: &str) {
    if max_imag > IMAG_WARN {
        log::warn!("{what}: discarded imaginary residue {max_imag:e} exceeds {IMAG_WARN:e}");
    }
}

/// Momentum-representation Wigner function on a grid.
pub fn wigner_from_m_basis(state: &RotorState, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    wigner_from_m_basis_with(state, spec, Execution::default())
}

pub fn wigner_from_m_basis_with(state: &RotorState, spec: &GridSpec, exec: Execution) -> Result<PhaseSpaceGrid> {
    let entries = state_entries(state)?;
    let table = ModeTable::build(&entries, &spec.window);
    let ev = table.evaluate(spec, exec);
    report_imag(ev.max_imag, "wigner_from_m_basis");
    let s = 1.0 / four_pi_cubed();
    let meta = GridMeta {
        source: "momentum representation".into(),
        state_hash: state_hash(state),
        quadrature_order: None,
        leakage: None,
        max_imag: ev.max_imag * s,
    };
    PhaseSpaceGrid::new(
        *spec,
        GridKind::Wigner,
        ev.values.into_iter().map(|v| v * s).collect(),
        Some(ev.tail.into_iter().map(|v| v * s).collect()),
        meta,
    )
}

/// Weyl-symbol grid `tr[AΔ(Ω, m)]` of an m-basis operator.
pub fn symbol_grid(op: &OperatorMatrix, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    symbol_grid_with(op, spec, Execution::default())
}

pub fn symbol_grid_with(op: &OperatorMatrix, spec: &GridSpec, exec: Execution) -> Result<PhaseSpaceGrid> {
    let entries = operator_entries(op)?;
    let table = ModeTable::build(&entries, &spec.window);
    let ev = table.evaluate(spec, exec);
    if op.is_hermitian_flagged() {
        report_imag(ev.max_imag, "symbol_grid");
    }
    let meta = GridMeta { source: "weyl symbol".into(), max_imag: ev.max_imag, ..GridMeta::default() };
    PhaseSpaceGrid::new(*spec, GridKind::Symbol, ev.values, Some(ev.tail), meta)
}

/// Momentum shared by all components on `axis`, if any.
fn sharp_momentum(state: &RotorState, axis: Axis) -> Option<i64> {
    let comps = state.pure_components();
    let mut shared: Option<i64> = None;
    for (_, c) in &comps {
        for (i, v) in c.iter().enumerate() {
            if v.norm_sqr() == 0.0 {
                continue;
            }
            let m = match state.basis() {
                BasisTag::M(b) => b.triple_of(i).get(axis),
                BasisTag::Jkm(b) => {
                    let q = b.state_of(i);
                    match axis {
                        Axis::Alpha => q.m as i64,
                        Axis::Gamma => q.k as i64,
                        Axis::Beta => return None,
                    }
                }
            };
            match shared {
                None => shared = Some(m),
                Some(s) if s != m => return None,
                _ => {}
            }
        }
    }
    shared
}

/// Largest frequency (in units of the axis frequency) present in the state.
fn bandwidth(state: &RotorState, axis: Axis) -> usize {
    match state.basis() {
        BasisTag::M(b) => b.m_max[axis.index()] as usize,
        BasisTag::Jkm(b) => b.j_max as usize,
    }
}

/// Breakpoints of `β'` where `β ± β'/2` crosses a multiple of π.
fn beta_pieces(beta: f64) -> Vec<(f64, f64)> {
    let (lo, hi) = (-PI / 2.0, PI / 2.0);
    let mut cuts = vec![lo, hi];
    for n in -1..=2 {
        let n = n as f64 * PI;
        for c in [2.0 * (beta - n), 2.0 * (n - beta)] {
            if c > lo + 1e-14 && c < hi - 1e-14 {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Angle-representation Wigner function by quadrature.
///
/// `quadrature_order` is the Gauss–Legendre order per integration piece; it is
/// raised automatically where the integrand bandwidth requires it.
pub fn wigner_from_angle_basis(state: &RotorState, spec: &GridSpec, quadrature_order: usize) -> Result<PhaseSpaceGrid> {
    wigner_from_angle_basis_with(state, spec, quadrature_order, Execution::default())
}

pub fn wigner_from_angle_basis_with(
    state: &RotorState,
    spec: &GridSpec,
    quadrature_order: usize,
    exec: Execution,
) -> Result<PhaseSpaceGrid> {
    let order = check_order(quadrature_order)?;
    let comps = state.pure_components();
    if comps.is_empty() {
        return domain("state has no pure components");
    }
    let window = spec.window;
    let kmax = |a: usize| window.lo[a].unsigned_abs().max(window.hi[a].unsigned_abs()) as usize;
    let sharp: Vec<Option<i64>> = Axis::ALL.iter().map(|&a| sharp_momentum(state, a)).collect();
    let bw: Vec<usize> = Axis::ALL.iter().map(|&a| bandwidth(state, a)).collect();

    // α and γ shift nodes; a sharp axis is sampled only at θ' = 0
    let shift_nodes = |a: usize| -> Vec<(f64, f64)> {
        match sharp[a] {
            Some(_) => vec![(0.0, 1.0)],
            None => {
                // half-integer frequencies up to (k + bw) over a 2π interval
                let n = order.max(((kmax(a) + bw[a]) as f64 * PI).ceil() as usize + 32);
                GaussLegendre::new(n).on_interval(-PI, PI).collect()
            }
        }
    };
    let (na_nodes, ng_nodes) = (shift_nodes(0), shift_nodes(2));
    let beta_order = order.max(((kmax(1) + bw[1]) * 2) + 32);
    let beta_rule = GaussLegendre::new(beta_order);

    let nk = window.len();
    let basis = state.basis().clone();
    let scale = 1.0 / four_pi_cubed();
    let freq = [1.0, 2.0, 1.0];
    let period = [2.0 * PI, PI, 2.0 * PI];

    let row_fn = |i: usize, out: &mut [f64]| -> Result<f64> {
        let omega = spec.angle_point(i);
        let base = omega.as_array();
        let beta_nodes: Vec<(f64, f64)> = match sharp[1] {
            Some(_) => vec![(0.0, 1.0)],
            None => beta_pieces(base[1])
                .into_iter()
                .flat_map(|(a, b)| beta_rule.on_interval_sqrt_ends(a, b).collect::<Vec<_>>())
                .collect(),
        };
        // samples of Σ_c p_c g_c(Ω₋) g_c*(Ω₊) at every shift node
        let mut samples: Vec<([f64; 3], f64, Complex64)> =
            Vec::with_capacity(na_nodes.len() * beta_nodes.len() * ng_nodes.len());
        for &(da, wa) in &na_nodes {
            for &(db, wb) in &beta_nodes {
                for &(dg, wg) in &ng_nodes {
                    let minus = EulerAngles::new(base[0] - da / 2.0, base[1] - db / 2.0, base[2] - dg / 2.0);
                    let plus = EulerAngles::new(base[0] + da / 2.0, base[1] + db / 2.0, base[2] + dg / 2.0);
                    let mut f = Complex64::new(0.0, 0.0);
                    for (p, c) in &comps {
                        let gm = reduced_wavefunction(c, &basis, &minus)?;
                        let gp = reduced_wavefunction(c, &basis, &plus)?;
                        f += gm * gp.conj() * *p;
                    }
                    samples.push(([da, db, dg], wa * wb * wg, f));
                }
            }
        }

        let mut worst = 0.0f64;
        for (kk, m) in window.triples().enumerate() {
            let k = m.as_array();
            let mut factor = 1.0;
            let mut skip = false;
            for a in 0..3 {
                if let Some(m0) = sharp[a] {
                    if k[a] != m0 {
                        skip = true;
                        break;
                    }
                    factor *= period[a];
                }
            }
            if skip {
                out[kk] = 0.0;
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (d, w, f) in &samples {
                let ph: f64 = (0..3).map(|a| freq[a] * k[a] as f64 * d[a]).sum();
                acc += f * Complex64::from_polar(*w, ph);
            }
            let v = acc * factor * scale;
            out[kk] = v.re;
            worst = worst.max(v.im.abs());
        }
        Ok(worst)
    };

    let mut values = vec![0.0; spec.len()];
    let results: Vec<Result<f64>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => values.par_chunks_mut(nk.max(1)).enumerate().map(|(i, out)| row_fn(i, out)).collect(),
        _ => values.chunks_mut(nk.max(1)).enumerate().map(|(i, out)| row_fn(i, out)).collect(),
    };
    let mut max_imag = 0.0f64;
    for r in results {
        max_imag = max_imag.max(r?);
    }
    report_imag(max_imag, "wigner_from_angle_basis");
    let meta = GridMeta {
        source: "angle representation".into(),
        state_hash: state_hash(state),
        quadrature_order: Some(order),
        leakage: None,
        max_imag,
    };
    PhaseSpaceGrid::new(*spec, GridKind::Wigner, values, None, meta)
}

/// Convenience: `Σ_c p_c |g_c(Ω)|²`, the orientation density `sin β ⟨Ω|ρ|Ω⟩`.
pub fn density_from_components(comps: &[(f64, CVector)], basis: &BasisTag, omega: &EulerAngles) -> Result<f64> {
    let mut acc = 0.0;
    for (p, c) in comps {
        acc += p * reduced_wavefunction(c, basis, omega)?.norm_sqr();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{JKMBasisSpec, Jkm, MBasisSpec, MomentumTriple};
    use crate::phase_space::grid::MomentumWindow;

    #[test]
    fn momentum_eigenstate_is_a_delta() {
        let b = MBasisSpec::new(2, 2, 2);
        let m0 = MomentumTriple::new(1, -2, 0);
        let s = RotorState::m_eigenstate(b, m0).unwrap();
        let spec = GridSpec::new([3, 4, 2], MomentumWindow::symmetric([2, 2, 2])).unwrap();
        let g = wigner_from_m_basis(&s, &spec).unwrap();
        let want = 1.0 / four_pi_cubed();
        for i in 0..spec.n_angles() {
            for (k, m) in spec.window.triples().enumerate() {
                let v = g.values[i * spec.n_momenta() + k];
                if m == m0 {
                    assert_eq!(v, want);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn beta_pieces_split_at_kinks() {
        let p = beta_pieces(0.3);
        let cuts: Vec<f64> = p.iter().map(|x| x.0).skip(1).collect();
        assert_eq!(cuts.len(), 2);
        assert!((cuts[0] + 0.6).abs() < 1e-15 && (cuts[1] - 0.6).abs() < 1e-15);
        assert_eq!(beta_pieces(PI / 2.0).len(), 1);
        assert_eq!(beta_pieces(0.0).len(), 2);
    }

    #[test]
    fn ground_state_angle_path() {
        let s = RotorState::jkm_eigenstate(JKMBasisSpec::full(1), Jkm::new(0, 0, 0).unwrap()).unwrap();
        let spec = GridSpec::new([3, 5, 2], MomentumWindow::symmetric([1, 6, 1])).unwrap();
        let g = wigner_from_angle_basis(&s, &spec, 64).unwrap();
        let nk = spec.n_momenta();
        for i in 0..spec.n_angles() {
            let row = &g.values[i * nk..(i + 1) * nk];
            // independent of α and γ
            let j = spec.angle_index([0, spec.angle_indices(i)[1], 0]);
            let row0 = &g.values[j * nk..(j + 1) * nk];
            for (a, b) in row.iter().zip(row0) {
                assert!((a - b).abs() < 1e-14);
            }
            // k_α, k_γ ≠ 0 vanish; the β sum only converges slowly in k_β
            for (k, m) in spec.window.triples().enumerate() {
                if m.m_alpha != 0 || m.m_gamma != 0 {
                    assert_eq!(row[k], 0.0);
                }
            }
        }
    }
}
