//! Inverse Weyl map and Weyl-ordered operator products.
//!
//! A symbol sampled on a grid determines its operator on a finite window. The
//! angle dependence of `tr[AΔ(θ, k)]` is a trigonometric polynomial in the
//! differences `δ = p − q`, so a DFT over angles isolates
//!
//! ```text
//! C_δ(k) = Σ_{p − q = δ} A_{pq} Π_axis sinc((p + q − 2k) π / 2)
//! ```
//!
//! and each `C_δ` is a Kronecker product of per-axis sinc design matrices
//! acting on the unknowns `A(s = p + q)`. Solving those in the least-squares
//! sense inverts the map exactly on the window, which the continuum formula
//! `(1/4π³) Σ_m ∫dΩ W_A Δ` does not.

use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{Axis, BasisTag, MBasisSpec, MomentumTriple};
use crate::error::{domain, Error, Result};
use crate::operator::{angle_power_matrix, momentum_matrix, CMatrix, OperatorMatrix};
use crate::phase_space::grid::PhaseSpaceGrid;
use crate::special::sinc_half;

/// Singular values below this are dropped from the per-axis pseudo-inverse.
const PINV_EPS: f64 = 1e-12;

/// Angle samples needed on an axis of half-width `m_max`.
pub fn min_samples(m_max: u32) -> usize {
    4 * m_max as usize + 1
}

/// Mode-`axis` product of a 4-index tensor with `m` (rows replace the axis).
fn mode_product(x: &[Complex64], dims: [usize; 4], axis: usize, m: &CMatrix) -> (Vec<Complex64>, [usize; 4]) {
    debug_assert_eq!(m.ncols(), dims[axis]);
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let (n_in, n_out) = (dims[axis], m.nrows());
    let mut y = vec![Complex64::new(0.0, 0.0); outer * n_out * inner];
    for o in 0..outer {
        for c in 0..n_in {
            let src = &x[(o * n_in + c) * inner..(o * n_in + c + 1) * inner];
            for r in 0..n_out {
                let w = m[(r, c)];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let dst = &mut y[(o * n_out + r) * inner..(o * n_out + r + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    let mut out = dims;
    out[axis] = n_out;
    (y, out)
}

/// `F[δ, j] = e^{−2πi jδ/n} / n` for `δ ∈ [−2W, 2W]`.
fn dft_matrix(n: usize, m_max: u32) -> CMatrix {
    let w = 2 * m_max as i64;
    CMatrix::from_fn((2 * w + 1) as usize, n, |r, j| {
        let d = r as i64 - w;
        Complex64::from_polar(1.0 / n as f64, -TAU * (j as i64 * d) as f64 / n as f64)
    })
}

/// Pseudo-inverse of `M[k, s] = sinc((s − 2k)π/2)` for the sums `s` admitted by `δ`.
struct AxisSolve {
    sums: Vec<i64>,
    pinv: CMatrix,
}

fn axis_solve(ks: &[i64], m_max: u32, delta: i64) -> Result<AxisSolve> {
    let reach = 2 * m_max as i64 - delta.abs();
    let sums: Vec<i64> = (-reach..=reach).step_by(2).collect();
    let design = DMatrix::<f64>::from_fn(ks.len(), sums.len(), |r, c| sinc_half(sums[c] - 2 * ks[r]));
    let pinv = design
        .svd(true, true)
        .pseudo_inverse(PINV_EPS)
        .map_err(|e| Error::Integration(format!("sinc pseudo-inverse failed: {e}")))?;
    Ok(AxisSolve { sums, pinv: pinv.map(|v| Complex64::new(v, 0.0)) })
}

/// Reconstructs the operator whose symbol (or Wigner function) the grid holds.
///
/// Needs at least `4·m_max + 1` angle samples per axis and a momentum window
/// that covers `basis`. Wigner grids reconstruct the density matrix.
pub fn inverse_weyl(grid: &PhaseSpaceGrid, basis: &MBasisSpec) -> Result<OperatorMatrix> {
    let spec = &grid.spec;
    for ax in Axis::ALL {
        let need = min_samples(basis.m_max[ax.index()]);
        if spec.counts[ax.index()] < need {
            return Err(Error::Configuration(format!(
                "inverse Weyl map needs at least {need} angle samples on {ax}, grid has {}",
                spec.counts[ax.index()]
            )));
        }
    }
    let win = &spec.window;
    if !win.covers(basis) {
        return domain("grid momentum window does not cover the target basis");
    }

    let nk = spec.n_momenta();
    let scale = grid.kind.to_symbol_scale();
    let x: Vec<Complex64> = grid.values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
    let mut dims = [spec.counts[0], spec.counts[1], spec.counts[2], nk];
    let mut x = x;
    for a in 0..3 {
        let f = dft_matrix(spec.counts[a], basis.m_max[a]);
        (x, dims) = mode_product(&x, dims, a, &f);
    }

    let ks: Vec<Vec<i64>> = (0..3).map(|a| win.axis_values(a).collect()).collect();
    let mut solves: HashMap<(usize, i64), AxisSolve> = HashMap::new();
    for a in 0..3 {
        let w = 2 * basis.m_max[a] as i64;
        for d in -w..=w {
            solves.insert((a, d), axis_solve(&ks[a], basis.m_max[a], d)?);
        }
    }

    let kdims = [win.axis_len(0), win.axis_len(1), win.axis_len(2), 1];
    let wd = basis.m_max.map(|w| 2 * w as i64);
    let mut out = CMatrix::zeros(basis.dim(), basis.dim());
    for da in -wd[0]..=wd[0] {
        for db in -wd[1]..=wd[1] {
            for dg in -wd[2]..=wd[2] {
                let row = (((da + wd[0]) as usize * dims[1] + (db + wd[1]) as usize) * dims[2]
                    + (dg + wd[2]) as usize)
                    * nk;
                let mut c = x[row..row + nk].to_vec();
                let mut cd = kdims;
                let delta = [da, db, dg];
                let parts: Vec<&AxisSolve> = (0..3).map(|a| &solves[&(a, delta[a])]).collect();
                for a in 0..3 {
                    (c, cd) = mode_product(&c, cd, a, &parts[a].pinv);
                }
                for (ia, &sa) in parts[0].sums.iter().enumerate() {
                    for (ib, &sb) in parts[1].sums.iter().enumerate() {
                        for (ig, &sg) in parts[2].sums.iter().enumerate() {
                            let s = [sa, sb, sg];
                            let p = MomentumTriple::from_array([0, 1, 2].map(|a| (s[a] + delta[a]) / 2));
                            let q = MomentumTriple::from_array([0, 1, 2].map(|a| (s[a] - delta[a]) / 2));
                            let (Some(i), Some(j)) = (basis.index_of(&p), basis.index_of(&q)) else {
                                continue;
                            };
                            out[(i, j)] = c[(ia * cd[1] + ib) * cd[2] + ig];
                        }
                    }
                }
            }
        }
    }
    OperatorMatrix::new(BasisTag::M(*basis), out, true)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `{θⁿ, p̂ᵐ}_W = 2^{−m} Σ_k C(m, k) p̂^{m−k} θⁿ p̂^k` on one axis.
///
/// `θⁿ` is the multiplication operator built from the Fourier series of the
/// n-th power of the angle, and `p̂` is the physical momentum (so `2m_β` on β).
pub fn weyl_ordered_product(n: u32, m: u32, axis: Axis, basis: &MBasisSpec) -> Result<OperatorMatrix> {
    let tag = BasisTag::M(*basis);
    let theta = angle_power_matrix(axis, n, &tag)?;
    let p = momentum_matrix(axis, &tag)?;
    let pd: Vec<Complex64> = (0..basis.dim()).map(|i| p.matrix()[(i, i)]).collect();
    let t = theta.matrix();
    let d = basis.dim();
    let mut out = CMatrix::zeros(d, d);
    for k in 0..=m {
        let c = binomial(m, k) / 2f64.powi(m as i32);
        for i in 0..d {
            let left = pd[i].powu(m - k);
            for j in 0..d {
                out[(i, j)] += t[(i, j)] * left * pd[j].powu(k) * c;
            }
        }
    }
    OperatorMatrix::new(tag, out, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::grid::{GridKind, GridMeta, GridSpec, MomentumWindow};
    use crate::phase_space::kernel::weyl_symbol;
    use crate::phase_space::wigner::symbol_grid;
    use crate::basis::EulerAngles;

    fn constant_grid(counts: [usize; 3], win: MomentumWindow) -> PhaseSpaceGrid {
        let spec = GridSpec::new(counts, win).unwrap();
        PhaseSpaceGrid::new(spec, GridKind::Symbol, vec![1.0; spec.len()], None, GridMeta::default()).unwrap()
    }

    #[test]
    fn unit_symbol_gives_identity() {
        let b = MBasisSpec::new(2, 1, 0);
        let g = constant_grid([9, 5, 1], MomentumWindow::of_basis(&b));
        let op = inverse_weyl(&g, &b).unwrap();
        let diff = (op.matrix() - CMatrix::identity(b.dim(), b.dim())).camax();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn too_coarse_grid_names_the_minimum() {
        let b = MBasisSpec::single_axis(Axis::Alpha, 4);
        let g = constant_grid([10, 1, 1], MomentumWindow::of_basis(&b));
        let e = inverse_weyl(&g, &b).unwrap_err();
        assert!(e.to_string().contains("17"), "{e}");
    }

    #[test]
    fn momentum_symbol_round_trip() {
        let b = MBasisSpec::new(3, 2, 1);
        let spec = GridSpec::new([13, 9, 5], MomentumWindow::of_basis(&b)).unwrap();
        for ax in Axis::ALL {
            let p = momentum_matrix(ax, &BasisTag::M(b)).unwrap();
            let back = inverse_weyl(&symbol_grid(&p, &spec).unwrap(), &b).unwrap();
            assert!((back.matrix() - p.matrix()).camax() < 1e-10);
        }
    }

    #[test]
    fn ordered_product_degenerate_cases() {
        let b = MBasisSpec::single_axis(Axis::Alpha, 8);
        let p = weyl_ordered_product(0, 1, Axis::Alpha, &b).unwrap();
        let om = EulerAngles::new(0.4, 0.0, 0.0);
        for m in -3..=3 {
            let s = weyl_symbol(&p, &om, &MomentumTriple::new(m, 0, 0)).unwrap();
            assert!((s.re - m as f64).abs() < 1e-12 && s.im.abs() < 1e-12);
        }
        let a = weyl_ordered_product(1, 0, Axis::Alpha, &b).unwrap();
        let pos = crate::operator::position_angle_matrix(Axis::Alpha, &BasisTag::M(b)).unwrap();
        assert!((a.matrix() - pos.matrix()).camax() < 1e-14);
        assert_eq!(binomial(4, 2), 6.0);
    }
}
