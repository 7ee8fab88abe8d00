//! Displacement operators and the Stratonovich–Weyl kernel.
//!
//! Per axis with eigenphase factor `f` (1 for α, γ and 2 for β):
//!
//! ```text
//! ⟨m₁|D(θ, k)|m₀⟩ = δ_{m₁, m₀+k} e^{−i f θ m₀}
//! ⟨a|Δ(θ, k)|b⟩   = e^{i f θ (b − a)} sinc(((a + b)/2 − k) π)
//! ```
//!
//! The second line is `D Δ(0,0) D†` written out; it is used directly so the
//! kernel stays exactly Hermitian on a truncated window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Axis, BasisTag, EulerAngles, MBasisSpec, MomentumTriple};
use crate::error::{domain, Result};
use crate::operator::{kron3, CMatrix, OperatorMatrix};
use crate::special::sinc_half;

/// Translation by `omega` in angle and `m` in momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSpec {
    pub omega: EulerAngles,
    pub m: MomentumTriple,
}

impl DisplacementSpec {
    pub fn new(omega: EulerAngles, m: MomentumTriple) -> Self {
        Self { omega, m }
    }

    pub fn identity() -> Self {
        Self { omega: EulerAngles::zero(), m: MomentumTriple::ZERO }
    }
}

fn displacement_axis(m_max: u32, theta: f64, f: f64, k: i64) -> CMatrix {
    let n = 2 * m_max as usize + 1;
    let w = m_max as i64;
    let mut d = CMatrix::zeros(n, n);
    for m0 in -w..=w {
        let m1 = m0 + k;
        if m1.abs() <= w {
            d[((m1 + w) as usize, (m0 + w) as usize)] = Complex64::from_polar(1.0, -theta * f * m0 as f64);
        }
    }
    d
}

/// Tensor-product displacement `D(Ω, m)` on a momentum window.
///
/// Shifts that push a state outside the window leave a zero column; see
/// [`displacement_zero_columns`].
pub fn displacement_matrix(spec: &DisplacementSpec, basis: &MBasisSpec) -> OperatorMatrix {
    let f: Vec<CMatrix> = Axis::ALL
        .iter()
        .map(|&a| displacement_axis(basis.m_max[a.index()], spec.omega.get(a), a.frequency(), spec.m.get(a)))
        .collect();
    let m = kron3(basis, [Some(&f[0]), Some(&f[1]), Some(&f[2])]);
    OperatorMatrix::new_unchecked(BasisTag::M(*basis), m, false)
}

/// Number of basis states the displacement maps out of the window.
pub fn displacement_zero_columns(spec: &DisplacementSpec, basis: &MBasisSpec) -> usize {
    basis.triples().filter(|m| !basis.contains(&m.add(&spec.m))).count()
}

/// Single-axis kernel `Δ_axis(θ, k)`.
pub fn kernel_axis(axis: Axis, m_max: u32, theta: f64, k: i64) -> CMatrix {
    let n = 2 * m_max as usize + 1;
    let w = m_max as i64;
    let f = axis.frequency();
    CMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (i as i64 - w, j as i64 - w);
        let s = sinc_half(a + b - 2 * k);
        if s == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(s, f * theta * (b - a) as f64)
        }
    })
}

/// Single-axis origin kernel `⟨m₁|Δ_axis(0,0)|m₀⟩ = sinc((m₀ + m₁)π/2)`.
///
/// The result lives on the single-axis window of `axis`. The full origin kernel
/// is the tensor product of all three, i.e. [`kernel`] at the origin.
pub fn kernel_origin(axis: Axis, basis: &MBasisSpec) -> OperatorMatrix {
    let single = MBasisSpec::single_axis(axis, basis.m_max[axis.index()]);
    let m = kernel_axis(axis, basis.m_max[axis.index()], 0.0, 0);
    OperatorMatrix::new_unchecked(BasisTag::M(single), m, true)
}

/// Displaced kernel `Δ(Ω, m) = D(Ω, m) Δ(0,0) D†(Ω, m)`.
pub fn kernel(omega: &EulerAngles, m: &MomentumTriple, basis: &MBasisSpec) -> OperatorMatrix {
    let f: Vec<CMatrix> = Axis::ALL
        .iter()
        .map(|&a| kernel_axis(a, basis.m_max[a.index()], omega.get(a), m.get(a)))
        .collect();
    let mat = kron3(basis, [Some(&f[0]), Some(&f[1]), Some(&f[2])]);
    OperatorMatrix::new_unchecked(BasisTag::M(*basis), mat, true)
}

/// Weyl symbol `tr[AΔ(Ω, m)]` at one phase-space point.
///
/// Evaluated as the double sum over nonzero matrix elements, without building
/// the kernel matrix.
pub fn weyl_symbol(op: &OperatorMatrix, omega: &EulerAngles, m: &MomentumTriple) -> Result<Complex64> {
    let basis = op.basis().as_m()?;
    let a = op.matrix();
    let triples: Vec<MomentumTriple> = basis.triples().collect();
    let k = m.as_array();
    let theta = omega.as_array();
    let freq = [1.0, 2.0, 1.0];
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, mr) in triples.iter().enumerate() {
        let p = mr.as_array();
        for (c, mc) in triples.iter().enumerate() {
            let v = a[(r, c)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let q = mc.as_array();
            let mut w = 1.0;
            let mut phase = 0.0;
            for ax in 0..3 {
                w *= sinc_half(p[ax] + q[ax] - 2 * k[ax]);
                if w == 0.0 {
                    break;
                }
                phase += freq[ax] * theta[ax] * (p[ax] - q[ax]) as f64;
            }
            if w != 0.0 {
                acc += v * Complex64::from_polar(w, phase);
            }
        }
    }
    Ok(acc)
}

/// `tr[AΔ]` with the kernel built as a dense matrix; slow reference route.
pub fn symbol_via_kernel(op: &OperatorMatrix, omega: &EulerAngles, m: &MomentumTriple) -> Result<Complex64> {
    let basis = op.basis().as_m()?;
    if op.dim() != basis.dim() {
        return domain("operator dimension does not match its basis");
    }
    let d = kernel(omega, m, basis);
    Ok((op.matrix() * d.matrix()).trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use std::f64::consts::PI;

    #[test]
    fn identity_displacement() {
        let b = MBasisSpec::new(1, 2, 1);
        let d = displacement_matrix(&DisplacementSpec::identity(), &b);
        assert_eq!(d.matrix(), &CMatrix::identity(b.dim(), b.dim()));
    }

    #[test]
    fn integer_eigenphase() {
        let b = MBasisSpec::single_axis(Axis::Alpha, 3);
        let spec = DisplacementSpec::new(EulerAngles::new(PI, 0.0, 0.0), MomentumTriple::ZERO);
        let d = displacement_matrix(&spec, &b);
        let i = b.index_of(&MomentumTriple::new(2, 0, 0)).unwrap();
        assert!((d.matrix()[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn interior_unitarity_and_leakage() {
        let b = MBasisSpec::single_axis(Axis::Beta, 5);
        let spec = DisplacementSpec::new(EulerAngles::new(0.0, 0.7, 0.0), MomentumTriple::new(0, 2, 0));
        let d = displacement_matrix(&spec, &b);
        let dd = d.matrix().adjoint() * d.matrix();
        for i in 0..b.dim() {
            let m = b.triple_of(i).m_beta;
            // columns that stay inside the window after the shift
            if m + 2 <= 5 {
                assert!((dd[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!(displacement_zero_columns(&spec, &b), 2);
    }

    #[test]
    fn origin_kernel_entries() {
        let b = MBasisSpec::single_axis(Axis::Alpha, 2);
        let k = kernel_origin(Axis::Alpha, &b);
        let at = |a: i64, c: i64| k.matrix()[((a + 2) as usize, (c + 2) as usize)];
        assert_eq!(at(0, 0).re, 1.0);
        assert_eq!(at(1, 1).re, 0.0);
        // (1/2π) ∫_{−π}^{π} e^{−iα'/2} dα'
        let g = GaussLegendre::new(64);
        let oracle = g.integrate(-PI, PI, |x| (0.5 * x).cos()) / (2.0 * PI);
        assert!((at(1, 0).re - oracle).abs() < 1e-15);
        assert!((oracle - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_conjugated_origin_in_interior() {
        let b = MBasisSpec::new(6, 4, 0);
        let omega = EulerAngles::new(0.4, 1.3, 0.0);
        let m = MomentumTriple::new(1, -1, 0);
        let direct = kernel(&omega, &m, &b);
        let origin = kernel(&EulerAngles::zero(), &MomentumTriple::ZERO, &b);
        let d = displacement_matrix(&DisplacementSpec::new(omega, m), &b);
        let conj = d.matrix() * origin.matrix() * d.matrix().adjoint();
        for (i, ti) in b.triples().enumerate() {
            for (j, tj) in b.triples().enumerate() {
                let shifted_in = |t: MomentumTriple| b.contains(&t.sub(&m));
                if shifted_in(ti) && shifted_in(tj) {
                    assert!((direct.matrix()[(i, j)] - conj[(i, j)]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn kernel_hermitian_with_unit_trace() {
        let b = MBasisSpec::new(3, 3, 3);
        let k = kernel(&EulerAngles::new(1.0, 1.0, 1.0), &MomentumTriple::new(2, -1, 3), &b);
        assert!(k.hermitian_defect() < 1e-12);
        assert!((k.matrix().trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pointwise_symbol_matches_kernel_trace() {
        let b = MBasisSpec::new(2, 2, 1);
        let n = b.dim();
        let a = CMatrix::from_fn(n, n, |i, j| Complex64::new((i * 7 + j) as f64 * 0.01, (i as f64 - j as f64) * 0.03));
        let op = OperatorMatrix::new_unchecked(BasisTag::M(b), a, false);
        let om = EulerAngles::new(0.3, 2.1, 4.0);
        let m = MomentumTriple::new(1, 0, -1);
        let x = weyl_symbol(&op, &om, &m).unwrap();
        let y = symbol_via_kernel(&op, &om, &m).unwrap();
        assert!((x - y).norm() < 1e-13);
    }
}
