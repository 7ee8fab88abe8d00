//! Laser kick, free evolution and the alignment signal.
//!
//! The kick is integrated in the interaction picture of the free top,
//! `c_I(t) = e^{iE(t − t₀)} c(t)`, so the integrator only resolves the pulse and
//! not the free phases.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisTag, JKMBasisSpec, Jkm};
use crate::dynamics::{cos2beta_matrix, free_energies, PulseConfig, TopConstants};
use crate::error::{config, domain, Error, Result};
use crate::ode::{dopri5, Control, Stats, Tolerances};
use crate::operator::OperatorMatrix;
use crate::quadrature::DEFAULT_ORDER;
use crate::state::{expectation, CVector, Payload, RotorState};

/// Population in the top two J shells above which a warning is logged.
pub const LEAKAGE_WARN: f64 = 1e-6;

/// Diagnostics of one pulse integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KickReport {
    pub t_start: f64,
    pub t_end: f64,
    /// `|‖ψ‖² − 1|` at the end of the integration.
    pub norm_drift: f64,
    /// Population of `J ≥ j_max − 1`.
    pub top_shell_population: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

fn fixed_block(state: &RotorState) -> Result<(&JKMBasisSpec, &CVector)> {
    let b = state.basis().as_jkm()?;
    if b.fixed_km.is_none() {
        return domain("kick propagation needs a fixed (K, M) symmetric-top basis");
    }
    Ok((b, state.require_pure()?))
}

fn top_shell(basis: &JKMBasisSpec, c: &CVector) -> f64 {
    basis
        .states()
        .zip(c.iter())
        .filter(|(q, _)| q.j + 1 >= basis.j_max)
        .map(|(_, v)| v.norm_sqr())
        .sum()
}

/// Real symmetric `cos²β̂` for the interaction.
fn coupling(basis: &JKMBasisSpec) -> Result<DMatrix<f64>> {
    Ok(cos2beta_matrix(basis, DEFAULT_ORDER)?.matrix().map(|v| v.re))
}

/// Integrates the pulse from its start to `t_stop` (clamped to the pulse window).
fn kick_until(
    initial: &RotorState,
    pulse: &PulseConfig,
    constants: &TopConstants,
    tol: f64,
    t_stop: f64,
) -> Result<(RotorState, KickReport)> {
    pulse.validate()?;
    constants.validate()?;
    if !(tol > 0.0) {
        return config("integration tolerance must be positive");
    }
    let (basis, c0) = fixed_block(initial)?;
    let e = free_energies(basis, constants);
    let v = coupling(basis)?;
    let n = basis.dim();
    let t0 = pulse.start();
    let t1 = t_stop.clamp(t0, pulse.end());

    let mut y: Vec<f64> = c0.iter().flat_map(|z| [z.re, z.im]).collect();
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = pulse.strength * pulse.envelope(t);
        let dt = t - t0;
        for i in 0..n {
            u[i] = Complex64::new(y[2 * i], y[2 * i + 1]) * Complex64::from_polar(1.0, -e[i] * dt);
        }
        for i in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                w += u[j] * v[(i, j)];
            }
            let d = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, e[i] * dt) * w;
            dy[2 * i] = d.re;
            dy[2 * i + 1] = d.im;
        }
    };
    let mut tols = Tolerances::new(tol);
    tols.h_max = pulse.duration / 4.0;
    let (_, stats): (f64, Stats) = dopri5(rhs, t0, t1, &mut y, &tols, |_, _| Control::Continue)?;

    let span = t1 - t0;
    let c: CVector = CVector::from_fn(n, |i, _| {
        Complex64::new(y[2 * i], y[2 * i + 1]) * Complex64::from_polar(1.0, -e[i] * span)
    });
    let norm_drift = (c.norm_squared() - 1.0).abs();
    let report = KickReport {
        t_start: t0,
        t_end: t1,
        norm_drift,
        top_shell_population: top_shell(basis, &c),
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
    };
    if norm_drift > 100.0 * tol {
        return Err(Error::Integration(format!(
            "norm drift {norm_drift:e} exceeds 100 x tol = {:e} after {} steps ({} rejected)",
            100.0 * tol,
            stats.accepted,
            stats.rejected
        )));
    }
    if report.top_shell_population > LEAKAGE_WARN {
        log::warn!(
            "population {:e} in the top two J shells (j_max = {}); the basis may be too small",
            report.top_shell_population,
            basis.j_max
        );
    }
    Ok((RotorState::from_parts_unchecked(initial.basis().clone(), Payload::Pure(c)), report))
}

/// Propagates through the whole pulse window `center ± 5·duration`.
///
/// The input is the state at the start of the window and the output the state
/// at its end. Norm drift is reported, not corrected.
pub fn propagate_kick(
    initial: &RotorState,
    pulse: &PulseConfig,
    constants: &TopConstants,
    tol: f64,
) -> Result<(RotorState, KickReport)> {
    kick_until(initial, pulse, constants, tol, pulse.end())
}

/// Impulsive reference: free evolution to the pulse center, `e^{−iκ cos²β̂}`
/// with the full kick area `κ`, then free evolution to the window end.
pub fn sudden_kick(initial: &RotorState, pulse: &PulseConfig, constants: &TopConstants) -> Result<RotorState> {
    let (basis, _) = fixed_block(initial)?;
    let v = coupling(basis)?;
    let eig = v.symmetric_eigen();
    let kappa = pulse.kick_area();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -kappa * l));
    let q = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let u = &q * nalgebra::DMatrix::from_diagonal(&phases) * q.adjoint();
    let half = free_propagate(initial, pulse.center - pulse.start(), constants)?;
    let kicked = half.evolve(&OperatorMatrix::new(BasisTag::Jkm(basis.clone()), u, false)?)?;
    free_propagate(&kicked, pulse.end() - pulse.center, constants)
}

/// Exact field-free evolution by `e^{−iE(J,K)t}` (pure or mixed).
pub fn free_propagate(state: &RotorState, t_bar: f64, constants: &TopConstants) -> Result<RotorState> {
    let basis = state.basis().as_jkm()?;
    let e = free_energies(basis, constants);
    let payload = match state.payload() {
        Payload::Pure(c) => Payload::Pure(CVector::from_fn(c.len(), |i, _| {
            c[i] * Complex64::from_polar(1.0, -e[i] * t_bar)
        })),
        Payload::Mixed(r) => Payload::Mixed(nalgebra::DMatrix::from_fn(r.nrows(), r.ncols(), |i, j| {
            r[(i, j)] * Complex64::from_polar(1.0, -(e[i] - e[j]) * t_bar)
        })),
    };
    Ok(RotorState::from_parts_unchecked(state.basis().clone(), payload))
}

/// Run description: molecule, pulse, initial `|JKM⟩` and sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentConfig {
    pub constants: TopConstants,
    pub pulse: PulseConfig,
    pub initial: Jkm,
    pub j_max: u32,
    pub times: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.pulse.validate()?;
        Jkm::new(self.initial.j, self.initial.k, self.initial.m)?;
        JKMBasisSpec::fixed(self.j_max, self.initial.k, self.initial.m)?;
        if self.initial.j > self.j_max {
            return config(format!("initial J = {} exceeds j_max = {}", self.initial.j, self.j_max));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return config("sample times must be finite");
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return config("sample times must be sorted ascending");
        }
        if !(self.tol > 0.0) {
            return config("tolerance must be positive");
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<JKMBasisSpec> {
        JKMBasisSpec::fixed(self.j_max, self.initial.k, self.initial.m)
    }
}

/// States and `⟨cos²β⟩` at every sample time.
#[derive(Debug, Clone)]
pub struct AlignmentRun {
    pub config: AlignmentConfig,
    pub kick: KickReport,
    pub snapshots: Vec<RotorState>,
    pub signal: Vec<(f64, f64)>,
}

/// Runs the kick and samples the state at the configured times.
///
/// The initial state sits at the start of the pulse window. Times inside the
/// window are reached by integrating to them; all others by exact free
/// evolution from the nearest integrated state.
pub fn run_alignment(cfg: &AlignmentConfig) -> Result<AlignmentRun> {
    cfg.validate()?;
    let basis = cfg.basis()?;
    let initial = RotorState::jkm_eigenstate(basis.clone(), cfg.initial)?;
    let (post, kick) = propagate_kick(&initial, &cfg.pulse, &cfg.constants, cfg.tol)?;
    let (t0, t1) = (cfg.pulse.start(), cfg.pulse.end());
    let mut snapshots = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        let s = if t <= t0 {
            free_propagate(&initial, t - t0, &cfg.constants)?
        } else if t < t1 {
            kick_until(&initial, &cfg.pulse, &cfg.constants, cfg.tol, t)?.0
        } else {
            free_propagate(&post, t - t1, &cfg.constants)?
        };
        snapshots.push(s);
    }
    let signal = alignment_signal(&snapshots, &cfg.times)?;
    Ok(AlignmentRun { config: cfg.clone(), kick, snapshots, signal })
}

/// `(t, ⟨cos²β⟩)` for each state.
pub fn alignment_signal(states: &[RotorState], times: &[f64]) -> Result<Vec<(f64, f64)>> {
    if states.len() != times.len() {
        return domain("need one time per state");
    }
    let mut cache: Option<(JKMBasisSpec, OperatorMatrix)> = None;
    let mut out = Vec::with_capacity(states.len());
    for (s, &t) in states.iter().zip(times) {
        let b = s.basis().as_jkm()?;
        if cache.as_ref().map(|(cb, _)| cb != b).unwrap_or(true) {
            cache = Some((b.clone(), cos2beta_matrix(b, DEFAULT_ORDER)?));
        }
        let op = &cache.as_ref().expect("filled above").1;
        let v = expectation(s, op)?;
        if v.im.abs() > 1e-12 {
            log::warn!("<cos^2 beta> has imaginary part {:e} at t = {t}", v.im);
        }
        out.push((t, v.re));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fidelity, overlap};
    use std::f64::consts::PI;

    fn top() -> TopConstants {
        TopConstants::new(0.5, 0.8).unwrap()
    }

    fn start(j_max: u32) -> RotorState {
        let b = JKMBasisSpec::fixed(j_max, 3, 3).unwrap();
        RotorState::jkm_eigenstate(b, Jkm { j: 3, k: 3, m: 3 }).unwrap()
    }

    #[test]
    fn zero_strength_is_free_evolution() {
        let s = start(20);
        let mixed = crate::states::superpose(
            &[s.clone(), RotorState::jkm_eigenstate(s.basis().as_jkm().unwrap().clone(), Jkm { j: 5, k: 3, m: 3 }).unwrap()],
            &[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        )
        .unwrap();
        let p = PulseConfig::new(0.0, 1e-3, 0.0).unwrap();
        let (k, rep) = propagate_kick(&mixed, &p, &top(), 1e-10).unwrap();
        let f = free_propagate(&mixed, p.end() - p.start(), &top()).unwrap();
        assert!(overlap(&k, &f).unwrap() > 1.0 - 1e-12);
        assert!(rep.norm_drift < 1e-12);
    }

    #[test]
    fn recurrence_at_two_pi() {
        let s = start(30);
        let p = PulseConfig::new(-1e4, 1e-3, 0.0).unwrap();
        let (k, _) = propagate_kick(&s, &p, &top(), 1e-10).unwrap();
        let back = free_propagate(&k, 2.0 * PI, &top()).unwrap();
        let f = fidelity(&k, &back).unwrap();
        assert!((f - 1.0).abs() < 1e-12, "{f}");
    }

    #[test]
    fn kick_aligns_and_matches_sudden_limit() {
        let s = start(40);
        let p = PulseConfig::new(-1e4, 1e-3, 0.0).unwrap();
        let (k, rep) = propagate_kick(&s, &p, &top(), 1e-10).unwrap();
        assert!(rep.norm_drift < 1e-8);
        let sig = alignment_signal(&[s.clone(), k.clone()], &[0.0, 1.0]).unwrap();
        assert!(sig[1].1 > sig[0].1);
        let sudden = sudden_kick(&s, &p, &top()).unwrap();
        let f = overlap(&k, &sudden).unwrap();
        assert!(f > 1.0 - 1e-4, "sudden-limit fidelity {f}");
    }

    #[test]
    fn isotropic_state_stays_at_one_third() {
        let b = JKMBasisSpec::fixed(6, 0, 0).unwrap();
        let s = RotorState::jkm_eigenstate(b, Jkm { j: 0, k: 0, m: 0 }).unwrap();
        let states: Vec<RotorState> = (0..4).map(|i| free_propagate(&s, i as f64, &top()).unwrap()).collect();
        for (_, v) in alignment_signal(&states, &[0.0, 1.0, 2.0, 3.0]).unwrap() {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unsorted_times_rejected() {
        let cfg = AlignmentConfig {
            constants: top(),
            pulse: PulseConfig::new(-1e4, 1e-3, 0.0).unwrap(),
            initial: Jkm { j: 3, k: 3, m: 3 },
            j_max: 20,
            times: vec![0.1, 0.05],
            tol: 1e-10,
        };
        assert!(matches!(run_alignment(&cfg), Err(Error::Configuration(_))));
    }
}
