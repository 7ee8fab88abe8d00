//! Pure and mixed rotor states, angle wavefunctions and basis conversion.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::basis::{BasisTag, EulerAngles, JKMBasisSpec, Jkm, MBasisSpec, MomentumTriple};
use crate::dmatrix::{small_d_column, wigner_big_d};
use crate::error::{domain, Error, Result};
use crate::operator::{CMatrix, OperatorMatrix};
use crate::quadrature::{check_order, GaussLegendre};

pub type CVector = DVector<Complex64>;

pub const NORM_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Coefficient vector or density matrix.
#[derive(Debug, Clone)]
pub enum Payload {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A normalized state on a truncated basis.
#[derive(Debug, Clone)]
pub struct RotorState {
    basis: BasisTag,
    payload: Payload,
}

impl RotorState {
    /// Normalizes `coeffs` and wraps them as a pure state.
    pub fn pure(basis: BasisTag, coeffs: CVector) -> Result<Self> {
        if coeffs.len() != basis.dim() {
            return domain(format!(
                "{} coefficients for a basis of dimension {}",
                coeffs.len(),
                basis.dim()
            ));
        }
        let n = coeffs.norm();
        if !n.is_finite() || n == 0.0 {
            return domain("state vector has zero or non-finite norm");
        }
        Ok(Self { basis, payload: Payload::Pure(coeffs / Complex64::new(n, 0.0)) })
    }

    /// Validates a density matrix (Hermitian, unit trace, positive semidefinite).
    pub fn mixed(basis: BasisTag, rho: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return domain(format!("density matrix is {}x{}, basis has dimension {d}", rho.nrows(), rho.ncols()));
        }
        let op = OperatorMatrix::new_unchecked(basis.clone(), rho, false);
        let herm = op.hermitian_defect();
        if herm >= NORM_TOL {
            return domain(format!("density matrix is not Hermitian: defect {herm:e}"));
        }
        let rho = op.into_matrix();
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() >= NORM_TOL {
            return domain(format!("density matrix trace is {tr}, expected 1"));
        }
        let lo = rho.clone().symmetric_eigenvalues().min();
        if lo < -PSD_TOL {
            return domain(format!("density matrix has eigenvalue {lo:e} below -{PSD_TOL:e}"));
        }
        Ok(Self { basis, payload: Payload::Mixed(rho) })
    }

    pub fn m_eigenstate(spec: MBasisSpec, m: MomentumTriple) -> Result<Self> {
        let i = spec.index_of(&m).ok_or_else(|| Error::Domain(format!("{m} is outside the window")))?;
        let mut c = CVector::zeros(spec.dim());
        c[i] = Complex64::new(1.0, 0.0);
        Self::pure(BasisTag::M(spec), c)
    }

    pub fn jkm_eigenstate(spec: JKMBasisSpec, q: Jkm) -> Result<Self> {
        let i = spec.index_of(&q).ok_or_else(|| Error::Domain(format!("{q} is not in the basis")))?;
        let mut c = CVector::zeros(spec.dim());
        c[i] = Complex64::new(1.0, 0.0);
        Self::pure(BasisTag::Jkm(spec), c)
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.payload, Payload::Pure(_))
    }

    pub fn coefficients(&self) -> Option<&CVector> {
        match &self.payload {
            Payload::Pure(c) => Some(c),
            Payload::Mixed(_) => None,
        }
    }

    pub fn require_pure(&self) -> Result<&CVector> {
        self.coefficients().ok_or_else(|| Error::Domain("operation requires a pure state".into()))
    }

    pub fn density_matrix(&self) -> CMatrix {
        match &self.payload {
            Payload::Pure(c) => c * c.adjoint(),
            Payload::Mixed(r) => r.clone(),
        }
    }

    /// `‖ψ‖` for pure states, `tr ρ` for mixed ones.
    pub fn norm(&self) -> f64 {
        match &self.payload {
            Payload::Pure(c) => c.norm(),
            Payload::Mixed(r) => r.trace().re,
        }
    }

    /// Weighted pure components `(p_i, |ψ_i⟩)`; a pure state yields itself.
    ///
    /// Mixed states are eigendecomposed; components with weight below 1e-14 are
    /// dropped.
    pub fn pure_components(&self) -> Vec<(f64, CVector)> {
        match &self.payload {
            Payload::Pure(c) => vec![(1.0, c.clone())],
            Payload::Mixed(r) => {
                let eig = r.clone().symmetric_eigen();
                eig.eigenvalues
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 1e-14)
                    .map(|(i, &w)| (w, eig.eigenvectors.column(i).into_owned()))
                    .collect()
            }
        }
    }

    /// Applies a unitary (or any operator) and renormalizes nothing.
    pub fn evolve(&self, u: &OperatorMatrix) -> Result<Self> {
        if u.basis() != &self.basis {
            return domain("operator and state live on different bases");
        }
        let payload = match &self.payload {
            Payload::Pure(c) => Payload::Pure(u.matrix() * c),
            Payload::Mixed(r) => Payload::Mixed(u.matrix() * r * u.matrix().adjoint()),
        };
        Ok(Self { basis: self.basis.clone(), payload })
    }

    pub(crate) fn from_parts_unchecked(basis: BasisTag, payload: Payload) -> Self {
        Self { basis, payload }
    }
}

/// SHA-256 over the basis tag and the raw bits of the payload.
pub fn state_hash(state: &RotorState) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(format!("{:?}", state.basis()).as_bytes());
    let mut push = |c: &Complex64| {
        h.update(c.re.to_bits().to_le_bytes());
        h.update(c.im.to_bits().to_le_bytes());
    };
    match state.payload() {
        Payload::Pure(c) => c.iter().for_each(&mut push),
        Payload::Mixed(r) => r.iter().for_each(&mut push),
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// `⟨Ω|m⟩ = e^{i(m_α α + 2 m_β β + m_γ γ)} / √(4π³ sin β)` without the `1/√sin β`.
fn m_plane_wave(m: &MomentumTriple, omega: &EulerAngles) -> Complex64 {
    let phase = m.m_alpha as f64 * omega.alpha()
        + 2.0 * m.m_beta as f64 * omega.beta()
        + m.m_gamma as f64 * omega.gamma();
    Complex64::from_polar(1.0 / (4.0 * PI.powi(3)).sqrt(), phase)
}

/// `⟨Ω|JKM⟩ = √((2J+1)/8π²) D^{J*}_{MK}(Ω)`.
pub fn jkm_wavefunction(q: &Jkm, omega: &EulerAngles) -> Result<Complex64> {
    let d = wigner_big_d(q.j, q.m, q.k, omega)?;
    Ok(d.conj() * ((2 * q.j + 1) as f64 / (8.0 * PI * PI)).sqrt())
}

/// `√(sin β) ⟨Ω|ψ⟩`, finite everywhere in both bases.
pub fn reduced_wavefunction(coeffs: &CVector, basis: &BasisTag, omega: &EulerAngles) -> Result<Complex64> {
    match basis {
        BasisTag::M(spec) => Ok(spec
            .triples()
            .zip(coeffs.iter())
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(m, c)| c * m_plane_wave(&m, omega))
            .sum()),
        BasisTag::Jkm(spec) => {
            let s = omega.beta().sin().sqrt();
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, c) in spec.states().zip(coeffs.iter()) {
                if *c != Complex64::new(0.0, 0.0) {
                    acc += c * jkm_wavefunction(&q, omega)?;
                }
            }
            Ok(acc * s)
        }
    }
}

/// `⟨Ω|ψ⟩` for a pure state.
pub fn angle_wavefunction(state: &RotorState, omega: &EulerAngles) -> Result<Complex64> {
    let c = state.require_pure()?;
    match state.basis() {
        BasisTag::M(_) => {
            let s = omega.beta().sin();
            if s <= f64::EPSILON {
                return Err(Error::Pole { beta: omega.beta() });
            }
            Ok(reduced_wavefunction(c, state.basis(), omega)? / s.sqrt())
        }
        BasisTag::Jkm(spec) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, ci) in spec.states().zip(c.iter()) {
                if *ci != Complex64::new(0.0, 0.0) {
                    acc += ci * jkm_wavefunction(&q, omega)?;
                }
            }
            Ok(acc)
        }
    }
}

/// Orientation density `sin β ⟨Ω|ρ|Ω⟩`, finite at the poles in both bases.
pub fn orientation_density(state: &RotorState, omega: &EulerAngles) -> Result<f64> {
    let mut acc = 0.0;
    for (w, c) in state.pure_components() {
        acc += w * reduced_wavefunction(&c, state.basis(), omega)?.norm_sqr();
    }
    Ok(acc)
}

/// `tr(ρA)` or `⟨ψ|A|ψ⟩`.
pub fn expectation(state: &RotorState, op: &OperatorMatrix) -> Result<Complex64> {
    if op.basis() != state.basis() {
        return domain("operator and state live on different bases");
    }
    Ok(match state.payload() {
        Payload::Pure(c) => c.dotc(&(op.matrix() * c)),
        Payload::Mixed(r) => (r * op.matrix()).trace(),
    })
}

/// `|⟨a|b⟩|²` for pure states, `tr(ρ_a ρ_b)` otherwise.
pub fn overlap(a: &RotorState, b: &RotorState) -> Result<f64> {
    if a.basis() != b.basis() {
        return domain("states live on different bases");
    }
    Ok(match (a.coefficients(), b.coefficients()) {
        (Some(x), Some(y)) => x.dotc(y).norm_sqr(),
        _ => (a.density_matrix() * b.density_matrix()).trace().re,
    })
}

/// [`overlap`] divided by the norms (traces) of both states.
///
/// Integrated states carry a small reported norm drift; this compares
/// directions only.
pub fn fidelity(a: &RotorState, b: &RotorState) -> Result<f64> {
    let raw = overlap(a, b)?;
    let size = |s: &RotorState| match s.payload() {
        Payload::Pure(c) => c.norm_squared(),
        Payload::Mixed(r) => r.trace().re,
    };
    Ok(raw / (size(a) * size(b)))
}

/// Quadrature order actually used for `⟨m|JKM⟩`.
///
/// The integrand oscillates like `e^{−2i m_β β}` and carries a degree-J
/// polynomial factor, so the requested order is raised if it cannot resolve
/// them.
pub fn overlap_order(requested: usize, j: u32, m_beta: i64) -> usize {
    requested.max(4 * m_beta.unsigned_abs() as usize + 2 * j as usize + 32)
}

/// `⟨m|JKM⟩ = δ_{m_α M} δ_{m_γ K} √((2J+1)/2π) ∫_0^π √(sin β) e^{−2i m_β β} d^J_{MK}(β) dβ`.
pub fn basis_overlap(q: &Jkm, m: &MomentumTriple, quadrature_order: usize) -> Result<Complex64> {
    let q = Jkm::new(q.j, q.k, q.m)?;
    let order = overlap_order(check_order(quadrature_order)?, q.j, m.m_beta);
    if m.m_alpha != q.m as i64 || m.m_gamma != q.k as i64 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let g = GaussLegendre::new(order);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, w) in g.on_interval_sqrt_ends(0.0, PI) {
        let d = crate::dmatrix::wigner_small_d(q.j, q.m, q.k, b)?;
        acc += Complex64::from_polar(w * b.sin().sqrt() * d, -2.0 * m.m_beta as f64 * b);
    }
    Ok(acc * ((2 * q.j + 1) as f64 / TAU).sqrt())
}

/// Outcome of a basis conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionReport {
    /// Norm (or trace) captured inside the target window before renormalizing.
    pub captured: f64,
    pub leakage: f64,
    pub quadrature_order: usize,
}

/// Matrix `⟨m|JKM⟩` with rows over `window` and columns over `jkm`.
pub fn overlap_matrix(jkm: &JKMBasisSpec, window: &MBasisSpec, quadrature_order: usize) -> Result<CMatrix> {
    let requested = check_order(quadrature_order)?;
    let mb_max = window.m_max[1] as i64;
    let order = overlap_order(requested, jkm.j_max, mb_max);
    let g = GaussLegendre::new(order);
    let nodes: Vec<(f64, f64)> = g.on_interval_sqrt_ends(0.0, PI).collect();

    let mut out = CMatrix::zeros(window.dim(), jkm.dim());
    let blocks: Vec<(i32, i32)> = match jkm.fixed_km {
        Some(km) => vec![km],
        None => {
            let j = jkm.j_max as i32;
            (-j..=j).flat_map(|k| (-j..=j).map(move |m| (k, m))).collect()
        }
    };
    for (k, m) in blocks {
        if k.unsigned_abs() > window.m_max[2] || m.unsigned_abs() > window.m_max[0] {
            continue;
        }
        let j0 = k.unsigned_abs().max(m.unsigned_abs());
        if j0 > jkm.j_max {
            continue;
        }
        // d columns at each node, then Fourier projection per m_β
        let cols: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&(b, _)| small_d_column(jkm.j_max, m, k, b))
            .collect::<Result<_>>()?;
        for mb in -mb_max..=mb_max {
            let row = window
                .index_of(&MomentumTriple::new(m as i64, mb, k as i64))
                .expect("inside window");
            for j in j0..=jkm.j_max {
                let col = match jkm.index_of(&Jkm { j, k, m }) {
                    Some(c) => c,
                    None => continue,
                };
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, &(b, w)) in nodes.iter().enumerate() {
                    let d = cols[n][(j - j0) as usize];
                    acc += Complex64::from_polar(w * b.sin().sqrt() * d, -2.0 * mb as f64 * b);
                }
                out[(row, col)] = acc * ((2 * j + 1) as f64 / TAU).sqrt();
            }
        }
    }
    Ok(out)
}

/// Converts a symmetric-top state into the momentum basis, renormalizing the
/// part captured inside `window`.
pub fn to_m_basis(
    state: &RotorState,
    window: MBasisSpec,
    quadrature_order: usize,
) -> Result<(RotorState, ConversionReport)> {
    let jkm = state.basis().as_jkm()?;
    let u = overlap_matrix(jkm, &window, quadrature_order)?;
    let order = overlap_order(quadrature_order, jkm.j_max, window.m_max[1] as i64);
    let basis = BasisTag::M(window);
    let (captured, payload) = match state.payload() {
        Payload::Pure(c) => {
            let v = &u * c;
            let n2 = v.norm_squared();
            if n2 == 0.0 {
                return domain("state has no weight inside the momentum window");
            }
            (n2, Payload::Pure(v / Complex64::new(n2.sqrt(), 0.0)))
        }
        Payload::Mixed(r) => {
            let v = &u * r * u.adjoint();
            let tr = v.trace().re;
            if tr <= 0.0 {
                return domain("state has no weight inside the momentum window");
            }
            (tr, Payload::Mixed(v / Complex64::new(tr, 0.0)))
        }
    };
    let report = ConversionReport { captured, leakage: 1.0 - captured, quadrature_order: order };
    Ok((RotorState::from_parts_unchecked(basis, payload), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::momentum_matrix;
    use crate::Axis;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ground_state_wavefunction_is_constant() {
        let s = RotorState::jkm_eigenstate(JKMBasisSpec::full(2), Jkm::new(0, 0, 0).unwrap()).unwrap();
        for om in [EulerAngles::new(0.1, 0.2, 0.3), EulerAngles::new(5.0, 3.0, 1.0)] {
            let v = angle_wavefunction(&s, &om).unwrap();
            assert!((v - c(0.112_539_539_519_638_26, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn momentum_zero_wavefunction_at_equator() {
        let s = RotorState::m_eigenstate(MBasisSpec::new(1, 1, 1), MomentumTriple::ZERO).unwrap();
        let v = angle_wavefunction(&s, &EulerAngles::new(0.0, PI / 2.0, 0.0)).unwrap();
        assert!((v - c(0.089_793_561_062_583_28, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        let s = RotorState::m_eigenstate(MBasisSpec::new(1, 1, 1), MomentumTriple::ZERO).unwrap();
        let err = angle_wavefunction(&s, &EulerAngles::new(0.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
        assert!(angle_wavefunction(&s, &EulerAngles::new(0.0, PI, 0.0)).is_err());
    }

    #[test]
    fn jkm_wavefunction_matches_oracle() {
        let s = RotorState::jkm_eigenstate(JKMBasisSpec::full(2), Jkm::new(2, 1, 1).unwrap()).unwrap();
        let v = angle_wavefunction(&s, &EulerAngles::new(0.3, 1.1, 0.5)).unwrap();
        let want = c(-0.011_826_007_933_646_257, -0.012_176_513_744_465_689);
        assert!((v - want).norm() < 1e-15, "{v}");
    }

    #[test]
    fn overlap_values() {
        let q0 = Jkm::new(0, 0, 0).unwrap();
        assert_eq!(basis_overlap(&q0, &MomentumTriple::new(1, 0, 0), 200).unwrap(), c(0.0, 0.0));
        let v = basis_overlap(&q0, &MomentumTriple::ZERO, 200).unwrap();
        assert!((v - c(0.955_977_594_972_249_99, 0.0)).norm() < 1e-14, "{v}");
        // closed-form Fourier oracle for √sin β against d^2_00
        let q2 = Jkm::new(2, 0, 0).unwrap();
        let v = basis_overlap(&q2, &MomentumTriple::new(0, 1, 0), 200).unwrap();
        assert!((v - c(0.641_289_266_197_413_65, 0.0)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn overlap_columns_approach_unit_norm_monotonically() {
        let jkm = JKMBasisSpec::fixed(4, 1, 2).unwrap();
        let mut prev = vec![0.0; jkm.dim()];
        for w in [2u32, 4, 8, 16, 32] {
            let u = overlap_matrix(&jkm, &MBasisSpec::new(2, w, 1), 200).unwrap();
            for (col, p) in prev.iter_mut().enumerate() {
                let n = u.column(col).norm_squared();
                assert!(n > *p && n < 1.0 + 1e-12, "window {w} column {col}: {n}");
                *p = n;
            }
        }
        assert!(prev.iter().all(|&n| 1.0 - n < 2e-3), "{prev:?}");
    }

    #[test]
    fn matrix_agrees_with_pointwise_overlap() {
        let jkm = JKMBasisSpec::full(2);
        let win = MBasisSpec::new(2, 3, 2);
        let u = overlap_matrix(&jkm, &win, 64).unwrap();
        for (col, q) in jkm.states().enumerate() {
            for (row, m) in win.triples().enumerate() {
                let v = basis_overlap(&q, &m, 64).unwrap();
                assert!((u[(row, col)] - v).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn conversion_reports_leakage() {
        let s = RotorState::jkm_eigenstate(JKMBasisSpec::fixed(3, 3, 3).unwrap(), Jkm::new(3, 3, 3).unwrap()).unwrap();
        let (m, rep) = to_m_basis(&s, MBasisSpec::new(3, 24, 3), 200).unwrap();
        assert!((m.norm() - 1.0).abs() < 1e-12);
        assert!(rep.leakage > 0.0 && rep.leakage < 1e-3, "{rep:?}");
        let om = EulerAngles::new(0.4, 0.9, 2.0);
        let a = orientation_density(&s, &om).unwrap();
        let b = orientation_density(&m, &om).unwrap();
        // √sin β endpoint kinks make pointwise convergence slow in the window
        assert!((a - b).abs() < 1e-2 * a, "{a} vs {b}, {rep:?}");
    }

    #[test]
    fn expectation_basics() {
        let spec = MBasisSpec::single_axis(Axis::Alpha, 4);
        let s = RotorState::m_eigenstate(spec, MomentumTriple::new(3, 0, 0)).unwrap();
        let id = OperatorMatrix::identity(BasisTag::M(spec));
        assert!((expectation(&s, &id).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let p = momentum_matrix(Axis::Alpha, &BasisTag::M(spec)).unwrap();
        assert_eq!(expectation(&s, &p).unwrap(), c(3.0, 0.0));
        let other = OperatorMatrix::identity(BasisTag::M(MBasisSpec::single_axis(Axis::Alpha, 3)));
        assert!(expectation(&s, &other).is_err());
    }

    #[test]
    fn mixed_state_validation() {
        let spec = MBasisSpec::single_axis(Axis::Alpha, 1);
        let b = BasisTag::M(spec);
        let mut rho = CMatrix::zeros(3, 3);
        rho[(0, 0)] = c(0.5, 0.0);
        rho[(2, 2)] = c(0.5, 0.0);
        let s = RotorState::mixed(b.clone(), rho.clone()).unwrap();
        assert_eq!(s.pure_components().len(), 2);
        rho[(0, 0)] = c(0.6, 0.0);
        assert!(RotorState::mixed(b.clone(), rho.clone()).is_err());
        rho[(0, 0)] = c(1.5, 0.0);
        rho[(2, 2)] = c(-0.5, 0.0);
        assert!(RotorState::mixed(b.clone(), rho).is_err());
        assert!(RotorState::pure(b, CVector::zeros(3)).is_err());
    }
}
