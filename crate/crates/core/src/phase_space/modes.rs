//! Fourier-mode tables for fast symbol evaluation on grids.
//!
//! A matrix element `⟨m'|A|m''⟩` contributes
//! `e^{i f·θ·(m' − m'')} Π_axis sinc((k − (m' + m'')/2)π)` to `W_A(θ, k)`.
//! Grouping elements by the difference `δ = m' − m''` turns the symbol into
//!
//! ```text
//! W_A(θ, k) = Σ_δ C_δ(k) e^{i f·θ·δ}
//! ```
//!
//! so a grid evaluation costs `#angles × #δ × #k` instead of
//! `#angles × #k × #entries`. Tables are immutable once built and are shared
//! read-only by the workers that fill disjoint rows of the output.

use std::collections::HashMap;

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::basis::Axis;
use crate::phase_space::grid::{GridSpec, MomentumWindow};
use crate::special::sinc_half;

const FREQ: [f64; 3] = [1.0, 2.0, 1.0];

/// One nonzero matrix element `⟨row|A|col⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: [i64; 3],
    pub col: [i64; 3],
    pub value: Complex64,
}

/// How grid rows are distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon workers when the `parallel` feature is on, otherwise sequential.
    #[default]
    Parallel,
    Sequential,
}

/// Output of a grid evaluation before scaling.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub values: Vec<f64>,
    pub tail: Vec<f64>,
    pub max_imag: f64,
}

/// Mode coefficients `C_δ(k)` on a momentum window plus the out-of-window tail.
#[derive(Debug, Clone)]
pub struct ModeTable {
    window: MomentumWindow,
    deltas: Vec<[i64; 3]>,
    /// `coeffs[d * n_k + k]`.
    coeffs: Vec<Complex64>,
    /// `Σ_{k ∉ window} C_δ(k)` per δ.
    tail: Vec<Complex64>,
}

/// `Σ_{k=lo}^{hi} sinc((k − s/2)π)`.
fn window_sinc_sum(s: i64, lo: i64, hi: i64) -> f64 {
    if s.rem_euclid(2) == 0 {
        let c = s / 2;
        return if c >= lo && c <= hi { 1.0 } else { 0.0 };
    }
    (lo..=hi).map(|k| sinc_half(s - 2 * k)).sum()
}

impl ModeTable {
    pub fn build(entries: &[Entry], window: &MomentumWindow) -> Self {
        let nk = window.len();
        let lens = [window.axis_len(0), window.axis_len(1), window.axis_len(2)];
        let mut index: HashMap<[i64; 3], usize> = HashMap::new();
        let mut deltas = Vec::new();
        let mut coeffs: Vec<Complex64> = Vec::new();
        let mut tail: Vec<Complex64> = Vec::new();
        let mut sum_cache: HashMap<(usize, i64), f64> = HashMap::new();
        let mut factors: [Vec<(usize, f64)>; 3] = Default::default();

        for e in entries {
            if e.value == Complex64::new(0.0, 0.0) {
                continue;
            }
            let delta = [0, 1, 2].map(|a| e.row[a] - e.col[a]);
            let s = [0, 1, 2].map(|a| e.row[a] + e.col[a]);
            let d = *index.entry(delta).or_insert_with(|| {
                deltas.push(delta);
                coeffs.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), nk));
                tail.push(Complex64::new(0.0, 0.0));
                deltas.len() - 1
            });

            let mut inside = 1.0;
            for a in 0..3 {
                factors[a].clear();
                for (i, k) in window.axis_values(a).enumerate() {
                    let w = sinc_half(s[a] - 2 * k);
                    if w != 0.0 {
                        factors[a].push((i, w));
                    }
                }
                let (lo, hi) = (window.lo[a], window.hi[a]);
                inside *= *sum_cache.entry((a, s[a])).or_insert_with(|| window_sinc_sum(s[a], lo, hi));
            }
            tail[d] += e.value * (1.0 - inside);

            let row = &mut coeffs[d * nk..(d + 1) * nk];
            for &(ia, wa) in &factors[0] {
                let va = e.value * wa;
                for &(ib, wb) in &factors[1] {
                    let vab = va * wb;
                    let base = (ia * lens[1] + ib) * lens[2];
                    for &(ig, wg) in &factors[2] {
                        row[base + ig] += vab * wg;
                    }
                }
            }
        }
        Self { window: *window, deltas, coeffs, tail }
    }

    pub fn window(&self) -> &MomentumWindow {
        &self.window
    }

    pub fn n_modes(&self) -> usize {
        self.deltas.len()
    }

    pub fn deltas(&self) -> &[[i64; 3]] {
        &self.deltas
    }

    /// Symbol values on all grid points (unscaled), with the exact tail.
    pub fn evaluate(&self, spec: &GridSpec, exec: Execution) -> Evaluated {
        assert_eq!(spec.window, self.window, "grid window differs from table window");
        let nk = spec.n_momenta();
        let na = spec.n_angles();

        // per-axis phase tables indexed by (sample, distinct δ_axis)
        let mut axis_delta_index: [HashMap<i64, usize>; 3] = Default::default();
        let mut axis_deltas: [Vec<i64>; 3] = Default::default();
        for d in &self.deltas {
            for a in 0..3 {
                let n = axis_deltas[a].len();
                if let std::collections::hash_map::Entry::Vacant(v) = axis_delta_index[a].entry(d[a]) {
                    v.insert(n);
                    axis_deltas[a].push(d[a]);
                }
            }
        }
        let tables: Vec<Vec<Complex64>> = Axis::ALL
            .iter()
            .map(|&ax| {
                let a = ax.index();
                let samples = spec.axis_samples(ax);
                let nd = axis_deltas[a].len();
                let mut t = Vec::with_capacity(samples.len() * nd);
                for th in samples {
                    for &dl in &axis_deltas[a] {
                        t.push(Complex64::from_polar(1.0, FREQ[a] * th * dl as f64));
                    }
                }
                t
            })
            .collect();
        let mode_axis: Vec<[usize; 3]> = self
            .deltas
            .iter()
            .map(|d| [0, 1, 2].map(|a| axis_delta_index[a][&d[a]]))
            .collect();
        let nds = [axis_deltas[0].len(), axis_deltas[1].len(), axis_deltas[2].len()];

        let row_fn = |i: usize, out: &mut [f64], tail_out: &mut f64| -> f64 {
            let idx = spec.angle_indices(i);
            let mut acc = vec![Complex64::new(0.0, 0.0); nk];
            let mut t = Complex64::new(0.0, 0.0);
            for (m, ma) in mode_axis.iter().enumerate() {
                let ph = tables[0][idx[0] * nds[0] + ma[0]]
                    * tables[1][idx[1] * nds[1] + ma[1]]
                    * tables[2][idx[2] * nds[2] + ma[2]];
                let c = &self.coeffs[m * nk..(m + 1) * nk];
                for (a, v) in acc.iter_mut().zip(c) {
                    *a += v * ph;
                }
                t += self.tail[m] * ph;
            }
            let mut worst = t.im.abs();
            for (o, a) in out.iter_mut().zip(&acc) {
                *o = a.re;
                worst = worst.max(a.im.abs());
            }
            *tail_out = t.re;
            worst
        };

        let mut values = vec![0.0; na * nk];
        let mut tail = vec![0.0; na];
        let max_imag = match exec {
            #[cfg(feature = "parallel")]
            Execution::Parallel => values
                .par_chunks_mut(nk.max(1))
                .zip(tail.par_iter_mut())
                .enumerate()
                .map(|(i, (out, t))| row_fn(i, out, t))
                .reduce(|| 0.0, f64::max),
            _ => values
                .chunks_mut(nk.max(1))
                .zip(tail.iter_mut())
                .enumerate()
                .map(|(i, (out, t))| row_fn(i, out, t))
                .fold(0.0, f64::max),
        };
        Evaluated { values, tail, max_imag }
    }

    /// `W_A(θ, k)` at arbitrary angles for window momentum index `k`.
    pub fn value_at(&self, theta: [f64; 3], k: usize) -> Complex64 {
        let nk = self.window.len();
        self.deltas
            .iter()
            .enumerate()
            .map(|(m, d)| {
                let phase: f64 = (0..3).map(|a| FREQ[a] * theta[a] * d[a] as f64).sum();
                self.coeffs[m * nk + k] * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{EulerAngles, MBasisSpec};
    use crate::operator::OperatorMatrix;
    use crate::phase_space::kernel::weyl_symbol;
    use crate::BasisTag;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_entries(basis: &MBasisSpec, rng: &mut ChaCha8Rng) -> (Vec<Entry>, OperatorMatrix) {
        let n = basis.dim();
        let mut m = crate::operator::CMatrix::zeros(n, n);
        let mut e = Vec::new();
        for (i, r) in basis.triples().enumerate() {
            for (j, c) in basis.triples().enumerate() {
                let v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = v;
                e.push(Entry { row: r.as_array(), col: c.as_array(), value: v });
            }
        }
        (e, OperatorMatrix::new_unchecked(BasisTag::M(*basis), m, false))
    }

    #[test]
    fn grid_matches_pointwise_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basis = MBasisSpec::new(2, 1, 2);
        let (entries, op) = random_entries(&basis, &mut rng);
        let window = MomentumWindow::new([-3, -1, 0], [2, 2, 1]).unwrap();
        let table = ModeTable::build(&entries, &window);
        let spec = GridSpec::new([5, 3, 4], window).unwrap();
        let out = table.evaluate(&spec, Execution::Sequential);
        for i in 0..spec.n_angles() {
            let om = spec.angle_point(i);
            for (k, m) in window.triples().enumerate() {
                let want = weyl_symbol(&op, &om, &m).unwrap();
                let got = out.values[i * window.len() + k];
                assert!((got - want.re).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = MBasisSpec::new(3, 2, 0);
        let (entries, _) = random_entries(&basis, &mut rng);
        let window = MomentumWindow::symmetric([4, 3, 0]);
        let table = ModeTable::build(&entries, &window);
        let spec = GridSpec::new([9, 7, 1], window).unwrap();
        let a = table.evaluate(&spec, Execution::Sequential);
        let b = table.evaluate(&spec, Execution::Parallel);
        assert_eq!(a.values, b.values);
        assert_eq!(a.tail, b.tail);
    }

    #[test]
    fn tail_completes_the_momentum_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = MBasisSpec::new(0, 3, 0);
        let (entries, _) = random_entries(&basis, &mut rng);
        let small = MomentumWindow::symmetric([0, 1, 0]);
        let big = MomentumWindow::symmetric([0, 4000, 0]);
        let om = EulerAngles::new(0.0, 0.37, 0.0).as_array();
        let ts = ModeTable::build(&entries, &small);
        let tb = ModeTable::build(&entries, &big);
        let sum_small: Complex64 = (0..small.len()).map(|k| ts.value_at(om, k)).sum();
        let tail: Complex64 = ts
            .deltas
            .iter()
            .enumerate()
            .map(|(m, d)| ts.tail[m] * Complex64::from_polar(1.0, 2.0 * om[1] * d[1] as f64))
            .sum();
        let sum_big: Complex64 = (0..big.len()).map(|k| tb.value_at(om, k)).sum();
        // the wide window converges like 1/k², so compare loosely against it
        assert!((sum_small + tail - sum_big).norm() < 1e-3);
        // and exactly against the closed form Σ_{all k} = Σ entries e^{iθδ}
        let exact: Complex64 = entries
            .iter()
            .map(|e| e.value * Complex64::from_polar(1.0, 2.0 * om[1] * (e.row[1] - e.col[1]) as f64))
            .sum();
        assert!((sum_small + tail - exact).norm() < 1e-12);
    }
}
