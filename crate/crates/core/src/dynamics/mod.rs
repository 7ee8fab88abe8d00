//! Kicked symmetric-top dynamics and its classical limit.
//!
//! Times are in units of `ħ/I₁`, in which `A = ħ²/2I₁` equals 1/2.


pub mod canonical;
pub mod classical;
pub mod kick;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisTag, JKMBasisSpec, Jkm};
use crate::dmatrix::small_d_column;
use crate::error::{config, Result};
use crate::operator::{CMatrix, OperatorMatrix};
use crate::quadrature::{check_order, GaussLegendre};
use crate::special::clebsch_gordan;

pub use canonical::{canonical_hamiltonian_check, CanonicalReport};
pub use classical::{
    classical_hamiltonian, classical_trajectory, classical_vector_field, ClassicalPath, ClassicalState, POLE_GUARD,
};
pub use kick::{
    alignment_signal, free_propagate, propagate_kick, run_alignment, sudden_kick, AlignmentConfig, AlignmentRun,
    KickReport,
};

/// Rotational constants `A = 1/2I₁` and `C = 1/2I₃` (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopConstants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl TopConstants {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        let t = Self { a, c };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.c > 0.0 && self.a.is_finite() && self.c.is_finite()) {
            return config(format!("rotational constants must be positive, got A = {}, C = {}", self.a, self.c));
        }
        Ok(())
    }

    pub fn i1(&self) -> f64 {
        0.5 / self.a
    }

    pub fn i3(&self) -> f64 {
        0.5 / self.c
    }

    /// `E(J, K) = A J(J+1) + (C − A) K²`.
    pub fn energy(&self, j: u32, k: i32) -> f64 {
        let j = j as f64;
        self.a * j * (j + 1.0) + (self.c - self.a) * (k * k) as f64
    }
}

/// Gaussian laser pulse coupling through `strength · g(t) · cos²β̂`.
///
/// `g` has unit peak and full width at half maximum `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub strength: f64,
    pub duration: f64,
    #[serde(default)]
    pub center: f64,
}

/// The pulse is integrated over `center ± PULSE_HALF_WIDTHS · duration`.
pub const PULSE_HALF_WIDTHS: f64 = 5.0;

impl PulseConfig {
    pub fn new(strength: f64, duration: f64, center: f64) -> Result<Self> {
        let p = Self { strength, duration, center };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return config(format!("pulse duration must be positive, got {}", self.duration));
        }
        if !self.strength.is_finite() || !self.center.is_finite() {
            return config("pulse strength and center must be finite");
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.duration;
        (-4.0 * std::f64::consts::LN_2 * x * x).exp()
    }

    pub fn start(&self) -> f64 {
        self.center - PULSE_HALF_WIDTHS * self.duration
    }

    pub fn end(&self) -> f64 {
        self.center + PULSE_HALF_WIDTHS * self.duration
    }

    /// `strength · ∫g dt` over the whole line, `strength · τ √(π / 4 ln 2)`.
    pub fn kick_area(&self) -> f64 {
        self.strength * self.duration * (std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt()
    }
}

/// Field-free energies `E(J, K)` in basis order.
pub fn free_energies(basis: &JKMBasisSpec, constants: &TopConstants) -> Vec<f64> {
    basis.states().map(|q| constants.energy(q.j, q.k)).collect()
}

/// `⟨J'KM|cos²β̂|JKM⟩` from Clebsch–Gordan coefficients, using
/// `cos²β = (1 + 2P₂(cos β))/3`.
pub fn cos2beta_element_cg(jp: u32, j: u32, k: i32, m: i32) -> f64 {
    let (jp_, j_) = (jp as i32, j as i32);
    let p2 = ((2 * j + 1) as f64 / (2 * jp + 1) as f64).sqrt()
        * clebsch_gordan(j_, m, 2, 0, jp_, m)
        * clebsch_gordan(j_, k, 2, 0, jp_, k);
    let delta = if jp == j { 1.0 } else { 0.0 };
    (delta + 2.0 * p2) / 3.0
}

/// `cos²β̂` in the symmetric-top basis by Gauss–Legendre quadrature in `cos β`.
///
/// The integrand is a polynomial in `cos β` of degree at most `2 j_max + 2`, so
/// an order of `j_max + 2` is already exact; the requested order is honoured
/// when larger. Elements between different `(K, M)` vanish.
pub fn cos2beta_matrix(basis: &JKMBasisSpec, quadrature_order: usize) -> Result<OperatorMatrix> {
    let order = check_order(quadrature_order)?.max(basis.j_max as usize + 4);
    let g = GaussLegendre::new(order);
    let nodes: Vec<(f64, f64)> = g.on_interval(-1.0, 1.0).collect();
    let states: Vec<Jkm> = basis.states().collect();
    let mut blocks: Vec<(i32, i32)> = states.iter().map(|q| (q.k, q.m)).collect();
    blocks.sort_unstable();
    blocks.dedup();

    let n = basis.dim();
    let mut out = CMatrix::zeros(n, n);
    for (k, m) in blocks {
        let j0 = k.unsigned_abs().max(m.unsigned_abs());
        let cols: Vec<Vec<f64>> =
            nodes.iter().map(|&(x, _)| small_d_column(basis.j_max, m, k, x.acos())).collect::<Result<_>>()?;
        let members: Vec<(usize, u32)> =
            states.iter().enumerate().filter(|(_, q)| q.k == k && q.m == m).map(|(i, q)| (i, q.j)).collect();
        for &(i, ji) in &members {
            for &(l, jl) in &members {
                if ji.abs_diff(jl) > 2 || l < i {
                    continue;
                }
                let mut acc = 0.0;
                for (p, &(x, w)) in nodes.iter().enumerate() {
                    acc += w * x * x * cols[p][(ji - j0) as usize] * cols[p][(jl - j0) as usize];
                }
                let v = acc * (((2 * ji + 1) * (2 * jl + 1)) as f64).sqrt() / 2.0;
                out[(i, l)] = v.into();
                out[(l, i)] = v.into();
            }
        }
    }
    OperatorMatrix::new(BasisTag::Jkm(basis.clone()), out, true)
}
