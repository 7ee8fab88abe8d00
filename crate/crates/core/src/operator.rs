//! Dense operators on truncated bases.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{Axis, BasisTag, MBasisSpec};
use crate::error::{domain, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Square complex matrix tagged with the basis it acts on.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    basis: BasisTag,
    matrix: CMatrix,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn new(basis: BasisTag, matrix: CMatrix, hermitian: bool) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return domain(format!(
                "matrix is {}x{} but the basis has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        let op = Self { basis, matrix, hermitian };
        if hermitian {
            let defect = op.hermitian_defect();
            if defect >= HERMITIAN_TOL {
                return domain(format!("operator flagged Hermitian has |A - A†| = {defect:e}"));
            }
        }
        Ok(op)
    }

    pub(crate) fn new_unchecked(basis: BasisTag, matrix: CMatrix, hermitian: bool) -> Self {
        Self { basis, matrix, hermitian }
    }

    pub fn identity(basis: BasisTag) -> Self {
        let d = basis.dim();
        Self::new_unchecked(basis, CMatrix::identity(d, d), true)
    }

    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let d = self.hermitian_defect();
        if d >= HERMITIAN_TOL {
            return domain(format!("operator is not Hermitian: |A - A†| = {d:e}"));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.basis.clone(), self.matrix.adjoint(), self.hermitian)
    }

    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.same_basis(rhs)?;
        Ok(Self::new_unchecked(self.basis.clone(), &self.matrix * &rhs.matrix, false))
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Result<Self> {
        self.same_basis(rhs)?;
        let h = self.hermitian && rhs.hermitian;
        Ok(Self::new_unchecked(self.basis.clone(), &self.matrix + &rhs.matrix, h))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let h = self.hermitian && c.im == 0.0;
        Self::new_unchecked(self.basis.clone(), &self.matrix * c, h)
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &OperatorMatrix) -> Result<Self> {
        self.same_basis(u)?;
        let m = &u.matrix * &self.matrix * u.matrix.adjoint();
        Ok(Self::new_unchecked(self.basis.clone(), m, self.hermitian))
    }

    /// Marks the operator Hermitian after verifying it.
    pub fn into_hermitian(mut self) -> Result<Self> {
        self.check_hermitian()?;
        self.hermitian = true;
        Ok(self)
    }

    fn same_basis(&self, rhs: &OperatorMatrix) -> Result<()> {
        if self.basis != rhs.basis {
            return domain("operators live on different bases");
        }
        Ok(())
    }
}

/// Places a single-axis matrix into the full momentum basis (identity on the
/// other two axes).
pub fn lift_axis_matrix(axis: Axis, basis: &MBasisSpec, factor: &CMatrix) -> CMatrix {
    let mut factors = [None, None, None];
    factors[axis.index()] = Some(factor);
    kron3(basis, factors)
}

/// Tensor product of per-axis matrices in the α-slowest layout of [`MBasisSpec`].
/// `None` stands for the identity on that axis.
pub fn kron3(basis: &MBasisSpec, factors: [Option<&CMatrix>; 3]) -> CMatrix {
    let lens = [
        basis.axis_len(Axis::Alpha),
        basis.axis_len(Axis::Beta),
        basis.axis_len(Axis::Gamma),
    ];
    let entry = |a: usize, i: usize, j: usize| -> Complex64 {
        match factors[a] {
            Some(m) => m[(i, j)],
            None => {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    };
    let d = basis.dim();
    let mut out = CMatrix::zeros(d, d);
    for ia in 0..lens[0] {
        for ja in 0..lens[0] {
            let ea = entry(0, ia, ja);
            if ea == Complex64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..lens[1] {
                for jb in 0..lens[1] {
                    let eab = ea * entry(1, ib, jb);
                    if eab == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for ig in 0..lens[2] {
                        for jg in 0..lens[2] {
                            let e = eab * entry(2, ig, jg);
                            if e == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let r = (ia * lens[1] + ib) * lens[2] + ig;
                            let c = (ja * lens[1] + jb) * lens[2] + jg;
                            out[(r, c)] = e;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Single-axis Toeplitz matrix `<m'|f(θ)|m> = c(m' − m)` from Fourier coefficients.
pub fn toeplitz_axis(m_max: u32, coeff: impl Fn(i64) -> Complex64) -> CMatrix {
    let n = 2 * m_max as usize + 1;
    CMatrix::from_fn(n, n, |i, j| coeff(i as i64 - j as i64))
}

/// `(1/2π) ∫_0^{2π} x^p e^{−inx} dx` in closed form.
pub fn power_fourier_coefficient(p: u32, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(TAU.powi(p as i32) / (p as f64 + 1.0), 0.0);
    }
    // I_p = i (2π)^p / n − i p I_{p−1} / n, I_0 = 0
    let nf = n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 1..=p {
        acc = I * TAU.powi(q as i32) / nf - I * (q as f64) * acc / nf;
    }
    acc / TAU
}

/// Single-axis matrix of `θ^p` for the chosen angle.
///
/// On β the plane waves are `e^{i2mβ}` over a period π, which rescales the α
/// coefficients by `2^{−p}`.
pub fn angle_power_axis(axis: Axis, p: u32, m_max: u32) -> CMatrix {
    let scale = axis.frequency().powi(-(p as i32));
    toeplitz_axis(m_max, |n| power_fourier_coefficient(p, n) * scale)
}

/// Multiplication operator of the chosen Euler angle in the momentum basis.
///
/// Diagonal π (α, γ) or π/2 (β); off-diagonal `i/(m' − m)` or `i/(2(m' − m))`.
pub fn position_angle_matrix(axis: Axis, basis: &BasisTag) -> Result<OperatorMatrix> {
    let mb = basis.as_m()?;
    let f = axis.frequency();
    let mean = axis.period() / 2.0;
    let factor = toeplitz_axis(mb.m_max[axis.index()], |n| {
        if n == 0 {
            Complex64::new(mean, 0.0)
        } else {
            I / (f * n as f64)
        }
    });
    Ok(OperatorMatrix::new_unchecked(
        basis.clone(),
        lift_axis_matrix(axis, mb, &factor),
        true,
    ))
}

/// `θ^p` on the chosen axis by the same Fourier recipe as [`position_angle_matrix`].
pub fn angle_power_matrix(axis: Axis, p: u32, basis: &BasisTag) -> Result<OperatorMatrix> {
    let mb = basis.as_m()?;
    let factor = angle_power_axis(axis, p, mb.m_max[axis.index()]);
    Ok(OperatorMatrix::new_unchecked(basis.clone(), lift_axis_matrix(axis, mb, &factor), true))
}

/// Diagonal momentum operator `p̂_axis` (ħ = 1, so `p_β = 2 m_β`).
pub fn momentum_matrix(axis: Axis, basis: &BasisTag) -> Result<OperatorMatrix> {
    let mb = basis.as_m()?;
    let d = mb.dim();
    let f = axis.frequency();
    let mut m = CMatrix::zeros(d, d);
    for (i, t) in mb.triples().enumerate() {
        m[(i, i)] = Complex64::new(f * t.get(axis) as f64, 0.0);
    }
    Ok(OperatorMatrix::new_unchecked(basis.clone(), m, true))
}

/// Fourier coefficient `(1/π) ∫_0^π cos β e^{−i2nβ} dβ`.
pub fn cos_beta_coefficient(n: i64) -> Complex64 {
    let nf = n as f64;
    I * (4.0 * nf / (PI * (1.0 - 4.0 * nf * nf)))
}

/// `cos β̂` in the momentum basis; dense because cos β is not π-periodic.
pub fn cos_beta_matrix_m(basis: &BasisTag) -> Result<OperatorMatrix> {
    let mb = basis.as_m()?;
    let factor = toeplitz_axis(mb.m_max[1], cos_beta_coefficient);
    Ok(OperatorMatrix::new_unchecked(basis.clone(), lift_axis_matrix(Axis::Beta, mb, &factor), true))
}

/// `cos² β̂ = 1/2 + cos 2β / 2` in the momentum basis (tridiagonal on β).
pub fn cos2_beta_matrix_m(basis: &BasisTag) -> Result<OperatorMatrix> {
    let mb = basis.as_m()?;
    let factor = toeplitz_axis(mb.m_max[1], |n| match n {
        0 => Complex64::new(0.5, 0.0),
        1 | -1 => Complex64::new(0.25, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    Ok(OperatorMatrix::new_unchecked(basis.clone(), lift_axis_matrix(Axis::Beta, mb, &factor), true))
}

/// `sin² β̂ = 1/2 − cos 2β / 2` in the momentum basis (tridiagonal on β).
pub fn sin2_beta_matrix_m(basis: &BasisTag) -> Result<OperatorMatrix> {
    let mb = basis.as_m()?;
    let factor = toeplitz_axis(mb.m_max[1], |n| match n {
        0 => Complex64::new(0.5, 0.0),
        1 | -1 => Complex64::new(-0.25, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    Ok(OperatorMatrix::new_unchecked(basis.clone(), lift_axis_matrix(Axis::Beta, mb, &factor), true))
}
