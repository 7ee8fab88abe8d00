//! Acceptance criteria 1 to 11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rotor_wigner::dynamics::{
    alignment_signal, canonical_hamiltonian_check, classical_trajectory, classical_vector_field, free_propagate,
    run_alignment, sudden_kick, AlignmentConfig, ClassicalState, PulseConfig, TopConstants,
};
use rotor_wigner::operator::{momentum_matrix, position_angle_matrix, OperatorMatrix};
use rotor_wigner::phase_space::grid::{GridSpec, MomentumWindow, PhaseSpaceGrid};
use rotor_wigner::phase_space::kernel::{displacement_matrix, kernel, weyl_symbol, DisplacementSpec};
use rotor_wigner::phase_space::{inverse_weyl, symbol_grid, weyl_ordered_product, wigner_from_angle_basis, wigner_from_m_basis};
use rotor_wigner::quadrature::DEFAULT_ORDER;
use rotor_wigner::state::{fidelity, orientation_density, to_m_basis};
use rotor_wigner::states::{coherent_state, count_fringes, superpose, CoherentSpec};
use rotor_wigner::verify::{finite_difference_field, random_angles, random_hermitian};
use rotor_wigner::{Axis, BasisTag, EulerAngles, JKMBasisSpec, Jkm, MBasisSpec, MomentumTriple, Result, RotorState};

const SEED: u64 = 20240607;

struct Outcome {
    passed: bool,
    measured: String,
}

fn outcome(passed: bool, measured: impl Into<String>) -> Outcome {
    Outcome { passed, measured: measured.into() }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest pointwise marginal residual of a momentum-path grid against the
/// orientation density and the diagonal of ρ.
fn marginal_residuals(state: &RotorState, grid: &PhaseSpaceGrid) -> Result<(f64, f64)> {
    let m = grid.marginals()?;
    let mut angle = 0.0f64;
    for (i, v) in m.angle.iter().enumerate() {
        angle = angle.max((v - orientation_density(state, &grid.spec.angle_point(i))?).abs());
    }
    let b = state.basis().as_m()?;
    let rho = state.density_matrix();
    let mut mom = 0.0f64;
    for (k, t) in grid.spec.window.triples().enumerate() {
        let want = b.index_of(&t).map_or(0.0, |i| rho[(i, i)].re);
        mom = mom.max((m.momentum[k] - want).abs());
    }
    Ok((angle, mom))
}

/// Momentum-basis image of a fixed-block symmetric-top state, β window `w`.
fn m_image(state: &RotorState, w: u32) -> Result<RotorState> {
    let (k, m) = state.basis().as_jkm()?.fixed_km.expect("fixed block");
    Ok(to_m_basis(state, MBasisSpec::new(m.unsigned_abs(), w, k.unsigned_abs()), DEFAULT_ORDER)?.0)
}

fn beta_grid(state: &RotorState) -> Result<PhaseSpaceGrid> {
    let b = state.basis().as_m()?;
    let spec = GridSpec::new([1, 4 * b.m_max[1] as usize + 1, 1], MomentumWindow::of_basis(b))?;
    wigner_from_m_basis(state, &spec)
}

fn c1_normalization() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut grids = Vec::new();
    let b = MBasisSpec::single_axis(Axis::Alpha, 24);
    let spec = GridSpec::new([4 * 24 + 1, 1, 1], MomentumWindow::of_basis(&b))?;
    let mut coherent = || -> Result<RotorState> {
        let s = CoherentSpec::new(rng.random_range(0.7..3.0), rng.random_range(0.0..2.0 * PI), rng.random_range(-4..=4), Axis::Alpha)?;
        coherent_state(&s, &b)
    };
    let pool: Vec<RotorState> = (0..10).map(|_| coherent()).collect::<Result<_>>()?;
    for s in &pool[..4] {
        grids.push(wigner_from_m_basis(s, &spec)?);
    }
    for i in 0..3 {
        let w = Complex64::from_polar(1.0, 1.3 * i as f64);
        let s = superpose(&[pool[4 + 2 * i].clone(), pool[5 + 2 * i].clone()], &[Complex64::new(1.0, 0.0), w])?;
        grids.push(wigner_from_m_basis(&s, &spec)?);
    }
    let t = TopConstants::new(0.5, 0.8)?;
    for (q, strength, tb) in [((0, 0, 0), -300.0, 0.3), ((2, 1, 1), -2000.0, 0.07), ((3, 3, 3), -1e4, 1.44)] {
        let init = RotorState::jkm_eigenstate(JKMBasisSpec::fixed(40, q.1, q.2)?, Jkm::new(q.0, q.1, q.2)?)?;
        let kicked = free_propagate(&sudden_kick(&init, &PulseConfig::new(strength, 1e-3, 0.0)?, &t)?, tb, &t)?;
        grids.push(beta_grid(&m_image(&kicked, 40)?)?);
    }
    let norm = grids.iter().map(|g| (g.integral() - 1.0).abs()).fold(0.0, f64::max);
    let imag = grids.iter().map(|g| g.meta.max_imag).fold(0.0, f64::max);
    let el = start.elapsed();
    Ok(outcome(
        norm < 1e-6 && imag < 1e-10 && el < Duration::from_secs(120),
        format!("|norm - 1| {norm:.2e}, imaginary residue {imag:.2e}, {} states in {el:.2?}", grids.len()),
    ))
}

fn c2_marginals() -> Result<Outcome> {
    let spec = CoherentSpec::new(7.0, PI, 10, Axis::Alpha)?;
    let b = spec.minimal_basis();
    let s = coherent_state(&spec, &b)?;
    let g = wigner_from_m_basis(&s, &GridSpec::new([4 * b.m_max[0] as usize + 1, 1, 1], MomentumWindow::of_basis(&b))?)?;
    let (a1, m1) = marginal_residuals(&s, &g)?;
    let jkm = RotorState::jkm_eigenstate(JKMBasisSpec::fixed(40, 3, 3)?, Jkm::new(3, 3, 3)?)?;
    let img = m_image(&jkm, 40)?;
    let (a2, m2) = marginal_residuals(&img, &beta_grid(&img)?)?;
    let worst = a1.max(m1).max(a2).max(m2);
    Ok(outcome(
        worst < 1e-6,
        format!("coherent angle {a1:.2e} momentum {m1:.2e}; |333> angle {a2:.2e} momentum {m2:.2e}"),
    ))
}

fn c3_eigenstate() -> Result<Outcome> {
    let b = MBasisSpec::new(3, 3, 3);
    let m0 = MomentumTriple::new(1, -2, 3);
    let s = RotorState::m_eigenstate(b, m0)?;
    let spec = GridSpec::new([6, 6, 6], MomentumWindow::of_basis(&b))?;
    let g = wigner_from_m_basis(&s, &spec)?;
    let c = 1.0 / (4.0 * PI.powi(3));
    let nk = spec.n_momenta();
    let mut worst = 0.0f64;
    for (i, v) in g.values.iter().enumerate() {
        let want = if spec.window.triple_of(i % nk) == m0 { c } else { 0.0 };
        worst = worst.max((v - want).abs());
    }
    let rel = worst / c;
    Ok(outcome(rel <= 8.0 * f64::EPSILON, format!("max relative error {rel:.2e} (8 eps = {:.2e})", 8.0 * f64::EPSILON)))
}

fn fringes_for(k: i64) -> Result<usize> {
    let specs = [CoherentSpec::new(1.0, PI, k, Axis::Alpha)?, CoherentSpec::new(1.0, PI, -k, Axis::Alpha)?];
    let b = MBasisSpec::single_axis(Axis::Alpha, specs[0].required_window());
    let s = superpose(
        &[coherent_state(&specs[0], &b)?, coherent_state(&specs[1], &b)?],
        &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
    )?;
    let g = wigner_from_m_basis(&s, &GridSpec::new([256, 1, 1], MomentumWindow::of_basis(&b))?)?;
    count_fringes(&g, &MomentumTriple::new(0, 0, 0))
}

fn c4_fringes() -> Result<Outcome> {
    let counts: Vec<(i64, usize)> = [4, 2, 3].into_iter().map(|k| Ok((k, fringes_for(k)?))).collect::<Result<_>>()?;
    let ok = counts.iter().all(|&(k, n)| n as i64 == 2 * k);
    let text: Vec<String> = counts.iter().map(|(k, n)| format!("+-{k}: {n}")).collect();
    Ok(outcome(ok, text.join(", ")))
}

/// Worst `|symbol − exact|` over α ∈ [π/2, 3π/2] and |m_α| ≤ W/4.
fn correspondence_error(op: &OperatorMatrix, w: u32, exact: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for ia in 0..=16 {
        let a = PI / 2.0 + PI * ia as f64 / 16.0;
        for k in -(w as i64) / 4..=(w as i64) / 4 {
            let s = weyl_symbol(op, &EulerAngles::new(a, 0.0, 0.0), &MomentumTriple::new(k, 0, 0))?;
            worst = worst.max((s.re - exact(a, k as f64)).abs());
        }
    }
    Ok(worst)
}

fn c5_weyl() -> Result<Outcome> {
    let b64 = BasisTag::M(MBasisSpec::single_axis(Axis::Alpha, 64));
    let ea = correspondence_error(&position_angle_matrix(Axis::Alpha, &b64)?, 64, |a, _| a)?;
    let ep = correspondence_error(&momentum_matrix(Axis::Alpha, &b64)?, 64, |_, m| m)?;
    let mut ratios = Vec::new();
    for (n, m) in [(1u32, 1u32), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)] {
        let mut err = [0.0; 2];
        for (e, w) in err.iter_mut().zip([32u32, 64]) {
            let op = weyl_ordered_product(n, m, Axis::Alpha, &MBasisSpec::single_axis(Axis::Alpha, w))?;
            *e = correspondence_error(&op, w, |a, k| a.powi(n as i32) * k.powi(m as i32))?;
        }
        ratios.push(((n, m), err[1], err[0] / err[1]));
    }
    // a product reproduced exactly at both windows has nothing left to shrink
    let shrinks = |e: f64, r: f64| e < 1e-12 || r >= 2.0;
    let ok = ea < 1e-3 && ep < 1e-3 && ratios.iter().all(|&(_, e, r)| shrinks(e, r));
    let text: Vec<String> = ratios
        .iter()
        .map(|((n, m), e, r)| if *e < 1e-12 { format!("({n},{m}) exact") } else { format!("({n},{m}) {e:.2e} x{r:.2}") })
        .collect();
    Ok(outcome(
        ok,
        format!("window 64: alpha {ea:.2e}, p_alpha {ep:.2e}; products at 64 with 32->64 shrink: {}", text.join(", ")),
    ))
}

fn c6_covariance() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let b = MBasisSpec::new(3, 3, 3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = random_hermitian(&b, [2, 2, 2], &mut rng);
        let shift = MomentumTriple::new(rng.random_range(-1..=1), rng.random_range(-1..=1), rng.random_range(-1..=1));
        let by = random_angles(&mut rng);
        let moved = a.conjugate_by(&displacement_matrix(&DisplacementSpec::new(by, shift), &b))?;
        let om = random_angles(&mut rng);
        let m = MomentumTriple::new(rng.random_range(-3..=3), rng.random_range(-3..=3), rng.random_range(-3..=3));
        let lhs = weyl_symbol(&moved, &om, &m)?;
        let rhs = weyl_symbol(&a, &om.translate_back(&by), &m.sub(&shift))?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(outcome(worst < 1e-8, format!("20 pairs, max deviation {worst:.2e}")))
}

fn c7_kernel() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let b = MBasisSpec::new(3, 3, 3);
    let mut herm = 0.0f64;
    for _ in 0..20 {
        let m = MomentumTriple::new(rng.random_range(-3..=3), rng.random_range(-3..=3), rng.random_range(-3..=3));
        herm = herm.max(kernel(&random_angles(&mut rng), &m, &b).hermitian_defect());
    }
    let b = MBasisSpec::new(3, 2, 2);
    let spec = GridSpec::new([13, 9, 9], MomentumWindow::of_basis(&b))?;
    let mut trip = 0.0f64;
    for _ in 0..3 {
        let a = random_hermitian(&b, [2, 1, 1], &mut rng);
        trip = trip.max((inverse_weyl(&symbol_grid(&a, &spec)?, &b)?.matrix() - a.matrix()).camax());
    }
    Ok(outcome(herm < 1e-12 && trip < 1e-8, format!("hermiticity {herm:.2e}, round trip {trip:.2e}")))
}

fn c8_cross() -> Result<Outcome> {
    let b = MBasisSpec::new(10, 0, 0);
    let s = coherent_state(&CoherentSpec::new(1.0, 1.0, 2, Axis::Alpha)?, &b)?;
    let g = GridSpec::new([16, 8, 2], MomentumWindow::symmetric([10, 3, 1]))?;
    let d1 = max_abs_diff(&wigner_from_angle_basis(&s, &g, DEFAULT_ORDER)?.values, &wigner_from_m_basis(&s, &g)?.values);
    let js = RotorState::jkm_eigenstate(JKMBasisSpec::full(2), Jkm::new(2, 0, 0)?)?;
    let (ms, _) = to_m_basis(&js, MBasisSpec::new(0, 96, 0), DEFAULT_ORDER)?;
    let g = GridSpec::new([4, 8, 4], MomentumWindow::symmetric([1, 4, 1]))?;
    let d2 = max_abs_diff(&wigner_from_angle_basis(&js, &g, DEFAULT_ORDER)?.values, &wigner_from_m_basis(&ms, &g)?.values);
    Ok(outcome(d1.max(d2) < 1e-6, format!("sigma = 1 coherent {d1:.2e}, |200> {d2:.2e}")))
}

fn c9_alignment() -> Result<Outcome> {
    let start = Instant::now();
    let constants = TopConstants::new(0.5, 0.8)?;
    let pulse = PulseConfig::new(-1e4, 1e-3, 0.0)?;
    let deltas: Vec<f64> = (0..20).map(|i| 0.2 * i as f64 / 19.0).collect();
    let mut times = vec![pulse.end()];
    times.extend(deltas.iter().copied());
    times.extend(deltas.iter().map(|d| PI + d));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let cfg = AlignmentConfig { constants, pulse, initial: Jkm::new(3, 3, 3)?, j_max: 40, times, tol: 1e-10 };
    let run = run_alignment(&cfg)?;
    let init = RotorState::jkm_eigenstate(cfg.basis()?, cfg.initial)?;
    let pre = alignment_signal(std::slice::from_ref(&init), &[0.0])?[0].1;
    let at = |t: f64| run.signal.iter().position(|s| s.0 == t).expect("sampled");
    let post_i = at(pulse.end());
    let post = run.signal[post_i].1;
    let revival = deltas.iter().map(|&d| (run.signal[at(PI + d)].1 - run.signal[at(d)].1).abs()).fold(0.0, f64::max);
    let kicked = &run.snapshots[post_i];
    let fid = fidelity(kicked, &free_propagate(kicked, 2.0 * PI, &constants)?)?;
    let el = start.elapsed();
    let (a, b, c) = (post > pre, revival < 1e-6, (1.0 - fid).abs() < 1e-10);
    Ok(outcome(
        a && b && c && el < Duration::from_secs(60),
        format!(
            "(a) {} pre {pre:.4} post {post:.4}; (b) {} revival deviation {revival:.3e}; (c) {} 1 - F(2pi) {:.2e}; {el:.2?}",
            pf(a),
            pf(b),
            pf(c),
            1.0 - fid
        ),
    ))
}

fn c10_classical() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let t = TopConstants::new(0.5, 0.8)?;
    let mut random_point = |beta_margin: f64| ClassicalState {
        alpha: rng.random_range(0.0..2.0 * PI),
        beta: rng.random_range(beta_margin..PI - beta_margin),
        gamma: rng.random_range(0.0..2.0 * PI),
        p_alpha: rng.random_range(-3.0..3.0),
        p_beta: rng.random_range(-3.0..3.0),
        p_gamma: rng.random_range(-3.0..3.0),
    };
    let mut grad = 0.0f64;
    for _ in 0..100 {
        let x = random_point(0.3);
        let v = classical_vector_field(&x, &t)?;
        let fd = finite_difference_field(&x, &t, 1e-3)?;
        for i in 0..6 {
            grad = grad.max((v[i] - fd[i]).abs() / v[i].abs().max(1.0));
        }
    }
    let (mut energy, mut cyclic, mut paths) = (0.0f64, 0.0f64, 0);
    while paths < 5 {
        let mut x = random_point(0.3);
        x.p_alpha = x.p_alpha.abs() + 1.0;
        let p = classical_trajectory(&x, 10.0, &t, 1e-12)?;
        if p.truncated {
            continue;
        }
        paths += 1;
        energy = energy.max(p.energy_drift);
        for q in &p.points {
            cyclic = cyclic.max((q.p_alpha - x.p_alpha).abs() / x.p_alpha.abs().max(1.0));
            cyclic = cyclic.max((q.p_gamma - x.p_gamma).abs() / x.p_gamma.abs().max(1.0));
        }
    }
    Ok(outcome(
        grad < 1e-9 && energy < 1e-9 && cyclic < 1e-9,
        format!("gradient {grad:.2e}; over [0, 10]: energy {energy:.2e}, p_alpha/p_gamma {cyclic:.2e}"),
    ))
}

fn c11_canonical() -> Result<Outcome> {
    let r = canonical_hamiltonian_check(&[8, 12], (1, 0), &TopConstants::new(0.5, 0.8)?)?;
    let d: Vec<String> = r.windows.iter().map(|w| format!("{:.4}", w.discrepancy)).collect();
    Ok(outcome(
        r.improvement[0] >= 2.0,
        format!("discrepancy at windows 8, 12: {}; improvement x{:.3}", d.join(", "), r.improvement[0]),
    ))
}

type Check = fn() -> Result<Outcome>;

fn pf(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("normalization and realness", c1_normalization),
        ("marginal identities", c2_marginals),
        ("momentum-eigenstate exactness", c3_eigenstate),
        ("fringe count", c4_fringes),
        ("Weyl correspondence", c5_weyl),
        ("translation covariance", c6_covariance),
        ("kernel axioms", c7_kernel),
        ("cross-validation of the two evaluation paths", c8_cross),
        ("alignment dynamics", c9_alignment),
        ("classical limit", c10_classical),
        ("canonical-Hamiltonian spectrum", c11_canonical),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failed += usize::from(!o.passed);
        println!("{} criterion {:>2} {name}: {}", pf(o.passed), i + 1, o.measured);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
