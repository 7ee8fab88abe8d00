//! Phase-space coordinates and truncated Hilbert-space bases of the rigid rotor.
//!
//! Two bases are supported: the momentum basis `|m_alpha m_beta m_gamma>` of the
//! canonical Euler-angle momenta and the symmetric-top basis `|J K M>`. Both are
//! truncated to finite windows; the index maps below are bijections between flat
//! indices and quantum numbers.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// One of the three Euler angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Alpha,
    Beta,
    Gamma,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Alpha, Axis::Beta, Axis::Gamma];

    pub fn index(self) -> usize {
        match self {
            Axis::Alpha => 0,
            Axis::Beta => 1,
            Axis::Gamma => 2,
        }
    }

    /// Length of the angular range: 2π for α and γ, π for β.
    pub fn period(self) -> f64 {
        match self {
            Axis::Beta => PI,
            _ => TAU,
        }
    }

    /// Factor relating the integer label to the plane-wave frequency,
    /// `e^{i f m θ}` with `f = 2` on β and `f = 1` otherwise.
    pub fn frequency(self) -> f64 {
        match self {
            Axis::Beta => 2.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::Alpha => "alpha",
            Axis::Beta => "beta",
            Axis::Gamma => "gamma",
        };
        f.write_str(s)
    }
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Orientation `Ω = (α, β, γ)` in the z-y-z convention.
///
/// Always canonical: α, γ ∈ [0, 2π), β ∈ [0, π). Out-of-range inputs are wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha: wrap(alpha, TAU),
            beta: wrap(beta, PI),
            gamma: wrap(gamma, TAU),
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Alpha => self.alpha,
            Axis::Beta => self.beta,
            Axis::Gamma => self.gamma,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Translation `Ω + Ω'` with wrapping.
    pub fn translate(&self, by: &EulerAngles) -> Self {
        Self::new(self.alpha + by.alpha, self.beta + by.beta, self.gamma + by.gamma)
    }

    /// Translation `Ω − Ω'` with wrapping.
    pub fn translate_back(&self, by: &EulerAngles) -> Self {
        Self::new(self.alpha - by.alpha, self.beta - by.beta, self.gamma - by.gamma)
    }
}

/// Integer labels of the canonical momenta.
///
/// The physical momenta are `p_α = m_α`, `p_β = 2 m_β`, `p_γ = m_γ` (ħ = 1); the
/// factor two only ever appears in [`MomentumTriple::physical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MomentumTriple {
    pub m_alpha: i64,
    pub m_beta: i64,
    pub m_gamma: i64,
}

impl MomentumTriple {
    pub const ZERO: MomentumTriple = MomentumTriple { m_alpha: 0, m_beta: 0, m_gamma: 0 };

    pub fn new(m_alpha: i64, m_beta: i64, m_gamma: i64) -> Self {
        Self { m_alpha, m_beta, m_gamma }
    }

    pub fn from_array(m: [i64; 3]) -> Self {
        Self::new(m[0], m[1], m[2])
    }

    pub fn as_array(&self) -> [i64; 3] {
        [self.m_alpha, self.m_beta, self.m_gamma]
    }

    pub fn get(&self, axis: Axis) -> i64 {
        self.as_array()[axis.index()]
    }

    /// Physical momenta `(p_α, p_β, p_γ)` in units of ħ.
    pub fn physical(&self) -> [f64; 3] {
        [self.m_alpha as f64, 2.0 * self.m_beta as f64, self.m_gamma as f64]
    }

    /// Nearest integer labels for real-valued momentum arguments, rounding halves up.
    pub fn round_from(m: [f64; 3]) -> Self {
        let r = |x: f64| (x + 0.5).floor() as i64;
        Self::new(r(m[0]), r(m[1]), r(m[2]))
    }

    pub fn sub(&self, other: &MomentumTriple) -> Self {
        Self::new(
            self.m_alpha - other.m_alpha,
            self.m_beta - other.m_beta,
            self.m_gamma - other.m_gamma,
        )
    }

    pub fn add(&self, other: &MomentumTriple) -> Self {
        Self::new(
            self.m_alpha + other.m_alpha,
            self.m_beta + other.m_beta,
            self.m_gamma + other.m_gamma,
        )
    }
}

impl fmt::Display for MomentumTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.m_alpha, self.m_beta, self.m_gamma)
    }
}

/// Symmetric truncation window `|m_axis| ≤ m_max_axis` of the momentum basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MBasisSpec {
    pub m_max: [u32; 3],
}

impl MBasisSpec {
    pub fn new(m_max_alpha: u32, m_max_beta: u32, m_max_gamma: u32) -> Self {
        Self { m_max: [m_max_alpha, m_max_beta, m_max_gamma] }
    }

    /// Window that is non-trivial on a single axis only.
    pub fn single_axis(axis: Axis, m_max: u32) -> Self {
        let mut w = [0; 3];
        w[axis.index()] = m_max;
        Self { m_max: w }
    }

    pub fn axis_len(&self, axis: Axis) -> usize {
        2 * self.m_max[axis.index()] as usize + 1
    }

    pub fn dim(&self) -> usize {
        Axis::ALL.iter().map(|&a| self.axis_len(a)).product()
    }

    pub fn contains(&self, m: &MomentumTriple) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| m.get(a).unsigned_abs() <= self.m_max[a.index()] as u64)
    }

    /// Flat index of `m`; α is the slowest axis, γ the fastest.
    pub fn index_of(&self, m: &MomentumTriple) -> Option<usize> {
        if !self.contains(m) {
            return None;
        }
        let off = |a: Axis| (m.get(a) + self.m_max[a.index()] as i64) as usize;
        let nb = self.axis_len(Axis::Beta);
        let ng = self.axis_len(Axis::Gamma);
        Some((off(Axis::Alpha) * nb + off(Axis::Beta)) * ng + off(Axis::Gamma))
    }

    pub fn triple_of(&self, index: usize) -> MomentumTriple {
        let nb = self.axis_len(Axis::Beta);
        let ng = self.axis_len(Axis::Gamma);
        let ig = index % ng;
        let ib = (index / ng) % nb;
        let ia = index / (ng * nb);
        MomentumTriple::new(
            ia as i64 - self.m_max[0] as i64,
            ib as i64 - self.m_max[1] as i64,
            ig as i64 - self.m_max[2] as i64,
        )
    }

    pub fn triples(&self) -> impl Iterator<Item = MomentumTriple> + '_ {
        (0..self.dim()).map(move |i| self.triple_of(i))
    }
}

/// Symmetric-top quantum numbers `(J, K, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Jkm {
    pub j: u32,
    pub k: i32,
    pub m: i32,
}

impl Jkm {
    pub fn new(j: u32, k: i32, m: i32) -> Result<Self> {
        if k.unsigned_abs() > j || m.unsigned_abs() > j {
            return domain(format!("|K| and |M| must not exceed J in ({j}, {k}, {m})"));
        }
        Ok(Self { j, k, m })
    }
}

impl fmt::Display for Jkm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{} {} {}>", self.j, self.k, self.m)
    }
}

/// Truncated symmetric-top basis `J ≤ j_max`, optionally restricted to a single
/// `(K, M)` block (the free top and the cos²β coupling both conserve K and M).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JKMBasisSpec {
    pub j_max: u32,
    pub fixed_km: Option<(i32, i32)>,
}

impl JKMBasisSpec {
    pub fn full(j_max: u32) -> Self {
        Self { j_max, fixed_km: None }
    }

    pub fn fixed(j_max: u32, k: i32, m: i32) -> Result<Self> {
        let j_min = k.unsigned_abs().max(m.unsigned_abs());
        if j_min > j_max {
            return domain(format!("j_max = {j_max} is below max(|K|, |M|) = {j_min}"));
        }
        Ok(Self { j_max, fixed_km: Some((k, m)) })
    }

    /// Smallest admissible J in a fixed block.
    pub fn j_min(&self) -> u32 {
        match self.fixed_km {
            Some((k, m)) => k.unsigned_abs().max(m.unsigned_abs()),
            None => 0,
        }
    }

    pub fn dim(&self) -> usize {
        match self.fixed_km {
            Some(_) => (self.j_max - self.j_min() + 1) as usize,
            None => (0..=self.j_max).map(|j| ((2 * j + 1) * (2 * j + 1)) as usize).sum(),
        }
    }

    pub fn state_of(&self, index: usize) -> Jkm {
        match self.fixed_km {
            Some((k, m)) => Jkm { j: self.j_min() + index as u32, k, m },
            None => {
                let mut rest = index;
                let mut j = 0u32;
                loop {
                    let block = ((2 * j + 1) * (2 * j + 1)) as usize;
                    if rest < block {
                        let n = (2 * j + 1) as usize;
                        let k = (rest / n) as i32 - j as i32;
                        let m = (rest % n) as i32 - j as i32;
                        return Jkm { j, k, m };
                    }
                    rest -= block;
                    j += 1;
                }
            }
        }
    }

    pub fn index_of(&self, q: &Jkm) -> Option<usize> {
        if q.j > self.j_max || q.k.unsigned_abs() > q.j || q.m.unsigned_abs() > q.j {
            return None;
        }
        match self.fixed_km {
            Some((k, m)) => {
                (q.k == k && q.m == m && q.j >= self.j_min()).then(|| (q.j - self.j_min()) as usize)
            }
            None => {
                let before: usize = (0..q.j).map(|j| ((2 * j + 1) * (2 * j + 1)) as usize).sum();
                let n = (2 * q.j + 1) as usize;
                let ik = (q.k + q.j as i32) as usize;
                let im = (q.m + q.j as i32) as usize;
                Some(before + ik * n + im)
            }
        }
    }

    pub fn states(&self) -> impl Iterator<Item = Jkm> + '_ {
        (0..self.dim()).map(move |i| self.state_of(i))
    }
}

/// Basis a state or operator is expressed in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    M(MBasisSpec),
    Jkm(JKMBasisSpec),
}

impl BasisTag {
    pub fn dim(&self) -> usize {
        match self {
            BasisTag::M(b) => b.dim(),
            BasisTag::Jkm(b) => b.dim(),
        }
    }

    pub fn as_m(&self) -> Result<&MBasisSpec> {
        match self {
            BasisTag::M(b) => Ok(b),
            BasisTag::Jkm(_) => domain("operation requires the momentum basis"),
        }
    }

    pub fn as_jkm(&self) -> Result<&JKMBasisSpec> {
        match self {
            BasisTag::Jkm(b) => Ok(b),
            BasisTag::M(_) => domain("operation requires the symmetric-top basis"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn angles_wrap_into_range() {
        let w = EulerAngles::new(-0.5, 3.5, 7.0);
        assert!((w.alpha() - (TAU - 0.5)).abs() < 1e-15);
        assert!((w.beta() - (3.5 - PI)).abs() < 1e-15);
        assert!((w.gamma() - (7.0 - TAU)).abs() < 1e-15);
        let t = EulerAngles::new(6.0, 3.0, 1.0).translate(&EulerAngles::new(1.0, 1.0, 0.0));
        assert!((t.alpha() - (7.0 - TAU)).abs() < 1e-15);
        assert!((t.beta() - (4.0 - PI)).abs() < 1e-15);
    }

    #[test]
    fn tiny_negative_angle_stays_half_open() {
        let w = EulerAngles::new(-1e-300, -1e-300, -1e-300);
        assert!(w.alpha() < TAU && w.beta() < PI && w.gamma() < TAU);
    }

    #[test]
    fn physical_momentum_doubles_beta_only() {
        let m = MomentumTriple::new(3, -2, 5);
        assert_eq!(m.physical(), [3.0, -4.0, 5.0]);
        assert_eq!(m.as_array(), [3, -2, 5]);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(MomentumTriple::round_from([0.5, -0.5, 2.49]).as_array(), [1, 0, 2]);
        assert_eq!(MomentumTriple::round_from([-1.5, 1.51, -2.6]).as_array(), [-1, 2, -3]);
    }

    #[test]
    fn jkm_fixed_block_layout() {
        let b = JKMBasisSpec::fixed(10, 3, 3).unwrap();
        assert_eq!(b.dim(), 8);
        assert_eq!(b.state_of(0), Jkm { j: 3, k: 3, m: 3 });
        assert_eq!(b.index_of(&Jkm { j: 10, k: 3, m: 3 }), Some(7));
        assert_eq!(b.index_of(&Jkm { j: 10, k: 2, m: 3 }), None);
        assert!(JKMBasisSpec::fixed(2, 3, 0).is_err());
    }

    #[test]
    fn jkm_full_roundtrip() {
        let b = JKMBasisSpec::full(4);
        assert_eq!(b.dim(), 1 + 9 + 25 + 49 + 81);
        for (i, q) in b.states().enumerate() {
            assert!(q.j <= 4 && q.k.unsigned_abs() <= q.j && q.m.unsigned_abs() <= q.j);
            assert_eq!(b.index_of(&q), Some(i));
        }
    }

    proptest! {
        #[test]
        fn m_index_map_is_bijective(a in 0u32..5, b in 0u32..5, c in 0u32..5) {
            let spec = MBasisSpec::new(a, b, c);
            for i in 0..spec.dim() {
                let t = spec.triple_of(i);
                prop_assert!(spec.contains(&t));
                prop_assert_eq!(spec.index_of(&t), Some(i));
            }
        }

        #[test]
        fn construction_always_canonical(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
            let w = EulerAngles::new(a, b, c);
            prop_assert!((0.0..TAU).contains(&w.alpha()));
            prop_assert!((0.0..PI).contains(&w.beta()));
            prop_assert!((0.0..TAU).contains(&w.gamma()));
        }
    }
}
