//! Small special functions shared across modules.

use std::f64::consts::PI;
use std::sync::OnceLock;

const LN_FACT_LEN: usize = 512;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_LEN];
        for n in 1..LN_FACT_LEN {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// `ln n!` from a cached table (n < 512).
pub fn ln_factorial(n: u32) -> f64 {
    ln_factorial_table()[n as usize]
}

/// `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc_pi(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        (px).sin() / px
    }
}

/// `sinc(nπ/2)` for integer `n`, evaluated in closed form.
///
/// Even `n` gives a Kronecker delta; odd `n = 2l + 1` gives `(−1)^l / (π (l + ½))`.
pub fn sinc_half(n: i64) -> f64 {
    if n % 2 == 0 {
        if n == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        let l = (n - 1).div_euclid(2);
        let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign / (PI * (l as f64 + 0.5))
    }
}

/// Jacobi theta function `ϑ₃(0, q) = 1 + 2 Σ_{n≥1} q^{n²}` for `0 ≤ q < 1`.
///
/// The series is cut once the next term drops below 1e-17 relative, which
/// bounds the neglected tail by a geometric series far below 1e-15.
pub fn theta3(q: f64) -> f64 {
    assert!((0.0..1.0).contains(&q), "theta3 needs 0 <= q < 1");
    if q == 0.0 {
        return 1.0;
    }
    let lq = q.ln();
    let mut sum = 0.0;
    let mut n = 1u64;
    loop {
        let term = ((n * n) as f64 * lq).exp();
        sum += term;
        if term < 1e-17 * (1.0 + 2.0 * sum) {
            break;
        }
        n += 1;
    }
    1.0 + 2.0 * sum
}

/// Clebsch–Gordan coefficient `⟨j₁ m₁ j₂ m₂ | j m⟩` (Condon–Shortley phases, integer spins).
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m || j < (j1 - j2).abs() || j > j1 + j2 || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    let lf = |n: i32| ln_factorial(n as u32);
    let pre = 0.5 * ((2 * j + 1) as f64).ln()
        + 0.5
            * (lf(j1 + j2 - j) + lf(j1 - j2 + j) + lf(-j1 + j2 + j) - lf(j1 + j2 + j + 1)
                + lf(j1 + m1)
                + lf(j1 - m1)
                + lf(j2 + m2)
                + lf(j2 - m2)
                + lf(j + m)
                + lf(j - m));
    let kmin = 0.max(j2 - j - m1).max(j1 - j + m2);
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = lf(k) + lf(j1 + j2 - j - k) + lf(j1 - m1 - k) + lf(j2 + m2 - k) + lf(j - j2 + m1 + k)
            + lf(j - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (pre - den).exp();
    }
    sum
}
