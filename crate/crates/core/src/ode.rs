//! Adaptive Dormand–Prince 5(4) integration of real first-order systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    pub max_steps: usize,
    /// Largest allowed step; zero means unbounded.
    pub h_max: f64,
}

impl Tolerances {
    pub fn new(tol: f64) -> Self {
        Self { abs: tol, rel: tol, max_steps: 1_000_000, h_max: 0.0 }
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// What the step observer asks the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
///
/// `observe(t, y)` runs after every accepted step and may stop the
/// integration early; the returned time is where it ended.
pub fn dopri5<F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y: &mut [f64],
    tol: &Tolerances,
    mut observe: O,
) -> Result<(f64, Stats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]) -> Control,
{
    let n = y.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut stats = Stats::default();
    if span == 0.0 {
        return Ok((t0, stats));
    }
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    f(t, y, &mut k[0]);

    // initial step from the derivative scale
    let scale = |i: usize, y: &[f64]| tol.abs + tol.rel * y[i].abs();
    let d0 = (0..n).map(|i| (y[i] / scale(i, y)).powi(2)).sum::<f64>().sqrt() / (n as f64).sqrt();
    let d1 = (0..n).map(|i| (k[0][i] / scale(i, y)).powi(2)).sum::<f64>().sqrt() / (n as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span);
    if tol.h_max > 0.0 {
        h = h.min(tol.h_max);
    }

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::Integration(format!("step budget of {} exhausted at t = {t}", tol.max_steps)));
        }
        let last = (t + dir * h - t1) * dir >= 0.0;
        if last {
            h = (t1 - t).abs();
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = y[i] + dir * h * acc;
            }
            f(t + dir * C[s] * h, &tmp, &mut k[s]);
        }
        let mut err = 0.0;
        for i in 0..n {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B5[s] * k[s][i];
                lo += B4[s] * k[s][i];
            }
            y5[i] = y[i] + dir * h * hi;
            let sc = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
            err += ((dir * h * (hi - lo)) / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + dir * h };
            y.copy_from_slice(&y5);
            stats.accepted += 1;
            // first-same-as-last: stage 7 is f at the new point
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
            if observe(t, y) == Control::Stop {
                return Ok((t, stats));
            }
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if tol.h_max > 0.0 {
            h = h.min(tol.h_max);
        }
        if h < 1e-14 * span.max(t.abs()) {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok((t, stats))
}
