//! Classical symmetric top: the characteristics of the leading-order Liouville
//! equation, which are Hamilton's equations of
//!
//! ```text
//! H = (p_α − p_γ cos β)² / (2I₁ sin²β) + p_β² / 2I₁ + p_γ² / 2I₃
//! ```

use serde::{Deserialize, Serialize};

use crate::basis::EulerAngles;
use crate::dynamics::TopConstants;
use crate::error::{config, Error, Result};
use crate::ode::{dopri5, Control, Tolerances};

/// Smallest `sin β` the vector field accepts.
pub const POLE_GUARD: f64 = 1e-8;

/// Point in the classical phase space with continuous momenta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalState {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p_alpha: f64,
    pub p_beta: f64,
    pub p_gamma: f64,
}

impl ClassicalState {
    pub fn omega(&self) -> EulerAngles {
        EulerAngles::new(self.alpha, self.beta, self.gamma)
    }

    fn guard(&self) -> Result<f64> {
        let s = self.beta.sin();
        if !(s > POLE_GUARD) || !(0.0..=std::f64::consts::PI).contains(&self.beta) {
            return Err(Error::Singularity(format!("beta = {} is within the pole guard", self.beta)));
        }
        Ok(s)
    }
}

pub fn classical_hamiltonian(x: &ClassicalState, constants: &TopConstants) -> Result<f64> {
    let s = x.guard()?;
    let u = x.p_alpha - x.p_gamma * x.beta.cos();
    Ok(u * u / (2.0 * constants.i1() * s * s)
        + x.p_beta * x.p_beta / (2.0 * constants.i1())
        + x.p_gamma * x.p_gamma / (2.0 * constants.i3()))
}

/// `(α̇, β̇, γ̇, ṗ_α, ṗ_β, ṗ_γ)`.
pub fn classical_vector_field(x: &ClassicalState, constants: &TopConstants) -> Result<[f64; 6]> {
    let s = x.guard()?;
    let c = x.beta.cos();
    let i1 = constants.i1();
    let (pa, pb, pg) = (x.p_alpha, x.p_beta, x.p_gamma);
    Ok([
        (pa - pg * c) / (i1 * s * s),
        pb / i1,
        (pg * c * c - pa * c) / (i1 * s * s) + pg / constants.i3(),
        0.0,
        -(pg - pa * c) * (pa - pg * c) / (i1 * s * s * s),
        0.0,
    ])
}

/// Sampled trajectory with conservation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPath {
    pub times: Vec<f64>,
    pub points: Vec<ClassicalState>,
    /// Set when the path stopped early at the pole guard.
    pub truncated: bool,
    /// Largest `|H(t) − H(0)| / |H(0)|` over accepted steps.
    pub energy_drift: f64,
}

/// Adaptive integration over `[0, t_span]`; `p_α` and `p_γ` are constants of
/// motion and are carried, not integrated.
pub fn classical_trajectory(
    initial: &ClassicalState,
    t_span: f64,
    constants: &TopConstants,
    tol: f64,
) -> Result<ClassicalPath> {
    constants.validate()?;
    if !(t_span >= 0.0 && t_span.is_finite()) {
        return config(format!("time span must be finite and non-negative, got {t_span}"));
    }
    if !(tol > 0.0) {
        return config("tolerance must be positive");
    }
    let h0 = classical_hamiltonian(initial, constants)?;
    let (pa, pg) = (initial.p_alpha, initial.p_gamma);
    let at = |y: &[f64]| ClassicalState { alpha: y[0], beta: y[1], gamma: y[2], p_alpha: pa, p_beta: y[3], p_gamma: pg };
    let rhs = |_: f64, y: &[f64], d: &mut [f64]| match classical_vector_field(&at(y), constants) {
        Ok(v) => {
            d[0] = v[0];
            d[1] = v[1];
            d[2] = v[2];
            d[3] = v[4];
        }
        // a trial stage past the pole: poison it so the step is rejected
        Err(_) => d.iter_mut().for_each(|x| *x = f64::NAN),
    };
    let mut y = [initial.alpha, initial.beta, initial.gamma, initial.p_beta];
    let mut times = vec![0.0];
    let mut points = vec![*initial];
    let mut drift = 0.0f64;
    let mut truncated = false;
    let scale = h0.abs().max(f64::MIN_POSITIVE);
    let observe = |t: f64, y: &[f64]| {
        let x = at(y);
        match classical_hamiltonian(&x, constants) {
            Ok(h) => {
                drift = drift.max((h - h0).abs() / scale);
                times.push(t);
                points.push(x);
                Control::Continue
            }
            Err(_) => {
                truncated = true;
                Control::Stop
            }
        }
    };
    match dopri5(rhs, 0.0, t_span, &mut y, &Tolerances::new(tol), observe) {
        Ok(_) => {}
        // the error estimate turns non-finite only when stages cross the pole
        Err(Error::Integration(msg)) if msg.contains("non-finite") => truncated = true,
        Err(e) => return Err(e),
    }
    if truncated {
        log::warn!("classical trajectory stopped at the pole guard after t = {}", times.last().unwrap_or(&0.0));
    }
    Ok(ClassicalPath { times, points, truncated, energy_drift: drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn top() -> TopConstants {
        TopConstants::new(0.5, 0.8).unwrap()
    }

    fn state(beta: f64, p: [f64; 3]) -> ClassicalState {
        ClassicalState { alpha: 0.3, beta, gamma: 1.0, p_alpha: p[0], p_beta: p[1], p_gamma: p[2] }
    }

    #[test]
    fn free_beta_motion() {
        let v = classical_vector_field(&state(1.0, [0.0, 2.0, 0.0]), &top()).unwrap();
        assert_eq!(v[4], 0.0);
        assert_eq!(v[1], 2.0);
    }

    #[test]
    fn equator_force() {
        let v = classical_vector_field(&state(FRAC_PI_2, [3.0, 0.0, 3.0]), &top()).unwrap();
        assert!((v[4] + 9.0 / top().i1()).abs() < 1e-12);
    }

    #[test]
    fn pole_guard() {
        assert!(matches!(classical_vector_field(&state(0.0, [1.0, 0.0, 0.0]), &top()), Err(Error::Singularity(_))));
    }

    #[test]
    fn conservation_over_ten_units() {
        let x = state(1.1, [3.0, 0.7, 1.0]);
        let p = classical_trajectory(&x, 10.0, &top(), 1e-12).unwrap();
        assert!(!p.truncated);
        assert!(p.energy_drift < 1e-9, "{}", p.energy_drift);
        assert!(p.points.iter().all(|q| q.p_alpha == 3.0 && q.p_gamma == 1.0));
        assert_eq!(*p.times.last().unwrap(), 10.0);
    }

    #[test]
    fn pole_bound_path_is_truncated() {
        // p_α = p_γ = 0 lets β run straight into the pole
        let x = state(1.0, [0.0, -1.0, 0.0]);
        let p = classical_trajectory(&x, 10.0, &top(), 1e-10).unwrap();
        assert!(p.truncated);
    }
}
