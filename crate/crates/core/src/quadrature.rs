//! Quadrature rules.
//!
//! Gauss–Legendre on finite intervals, a variant that absorbs square-root
//! endpoint behaviour through the map `x = a + (b − a)(1 − cos u)/2`, and the
//! uniform periodic trapezoid rule.

use std::f64::consts::PI;

use crate::error::{config, Result};

/// Smallest quadrature order accepted from user configuration.
pub const MIN_ORDER: usize = 32;

/// Default order of Gauss–Legendre rules on β-type integrals.
pub const DEFAULT_ORDER: usize = 200;

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            weights[i] = w;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = w;
        }
        // nodes descend from +1; flip to ascending order
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped affinely to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Nodes and weights on `[a, b]` under `x = a + (b − a)(1 − cos u)/2`, `u ∈ [0, π]`.
    ///
    /// Integrands with `√(x − a)` or `√(b − x)` factors become analytic in `u`, so
    /// the rule converges exponentially on them.
    pub fn on_interval_sqrt_ends(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let span = b - a;
        self.on_interval(0.0, PI).map(move |(u, w)| {
            let x = a + span * 0.5 * (1.0 - u.cos());
            (x, w * span * 0.5 * u.sin())
        })
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Validates a user-supplied order.
pub fn check_order(order: usize) -> Result<usize> {
    if order < MIN_ORDER {
        return config(format!("quadrature order {order} is below the minimum {MIN_ORDER}"));
    }
    Ok(order)
}

/// Uniform sample points `j·period/n` and the trapezoid weight `period/n`.
pub fn periodic_points(n: usize, period: f64) -> (Vec<f64>, f64) {
    let h = period / n as f64;
    ((0..n).map(|j| j as f64 * h).collect(), h)
}
