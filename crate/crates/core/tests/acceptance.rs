//! Acceptance suite: one test per criterion, each printing a PASS or FAIL
//! line with the measured numbers behind the verdict.
//!
//! Run with `cargo test -p virtdyn-core --test acceptance -- --nocapture`
//! to see the lines for passing criteria as well.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use virtdyn_core::analysis::{check_lemma, LemmaId};
use virtdyn_core::convergence::{rate_sweep, InterpolationMode};
use virtdyn_core::math::ulp_distance;
use virtdyn_core::newtonian::{energies, solve, terminal_velocity, time_of_flight};
use virtdyn_core::recurrence::{
    implicit_meeting_time, run, step, step_acceleration_form, turnaround_index, ModelParams,
    ModelState,
};

fn report(criterion: &str, passed: bool, details: &str) {
    println!(
        "criterion {criterion}: {} - {details}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} failed: {details}");
}

// Shared random-configuration draw. |w0| is capped at min(5, 0.9 c) and
// gamma / y0 at 100 so the geometric growth of y over 10 c steps stays
// inside f64 range; within those caps the draws cover c across three
// decades and both velocity signs.
fn random_config(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    let c = 10f64.powf(rng.gen_range(1.0..4.0));
    let gamma = 10f64.powf(rng.gen_range(-2.0..1.0));
    let y0 = rng.gen_range(0.1..10.0);
    let w0 = rng.gen_range(-1.0..1.0) * 5.0_f64.min(0.9 * c);
    (c, gamma, y0, w0)
}

#[test]
fn criterion_1_speed_limit_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0usize;
    let mut max_speed_fraction: f64 = 0.0;
    for _ in 0..1000 {
        let (c, gamma, y0, w0) = random_config(&mut rng);
        let params = ModelParams::new(c, gamma).unwrap();
        let n = virtdyn_core::horizon_steps(10.0, c);
        let traj = run(&params, y0, w0, n).unwrap();
        for s in traj.states() {
            if !(s.w.abs() < c) || !(s.y > 0.0) {
                violations += 1;
            }
            max_speed_fraction = max_speed_fraction.max(s.w.abs() / c);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "1 (speed-limit suite)",
        violations == 0 && elapsed < 60.0,
        &format!(
            "1000 configs, horizons 10c, violations = {violations}, \
             max |w|/c = {max_speed_fraction:.6}, runtime = {elapsed:.1} s (< 60 s)"
        ),
    );
}

#[test]
fn criterion_2_monotonicity_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let (c, gamma, y0, w0) = random_config(&mut rng);
        let params = ModelParams::new(c, gamma).unwrap();
        let n = virtdyn_core::horizon_steps(10.0, c);
        let traj = run(&params, y0, w0.abs(), n).unwrap();
        let lemma = check_lemma(&traj, LemmaId::Monotonic, 10.0).unwrap();
        if !lemma.passed {
            failures.push(format!("config {i}: {:?}", lemma.witnesses));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "2 (monotonicity suite)",
        failures.is_empty(),
        &format!(
            "1000 configs with w0 >= 0, violations = {}, runtime = {elapsed:.1} s{}",
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; first: {}", failures[0])
            }
        ),
    );
}

#[test]
fn criterion_3_negative_branch_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut failures = Vec::new();
    let mut worst_fill: f64 = 0.0;
    for i in 0..100 {
        let c = 10f64.powf(rng.gen_range(1.0..2.5));
        let gamma = rng.gen_range(0.5..5.0);
        let y0 = rng.gen_range(0.1..3.0);
        let w0 = -rng.gen_range(0.01..1.5f64).min(0.45 * c);
        let params = ModelParams::new(c, gamma).unwrap();
        let b4 = w0.abs() * (y0 + params.alpha() / 2.0) / gamma;
        let n_bound = (b4 * c).ceil();
        let traj = run(&params, y0, w0, n_bound as usize + 2).unwrap();

        match turnaround_index(&traj) {
            Some(n) if (n as f64) <= n_bound => worst_fill = worst_fill.max(n as f64 / n_bound),
            other => {
                failures.push(format!("config {i}: N = {other:?} exceeds ceil(B4 c) = {n_bound}"));
                continue;
            }
        }
        // dy <= -alpha pre-turnaround and 0 <= w_N <= dw_{N-1} via the checker
        let lemma = check_lemma(&traj, LemmaId::NegativeBranch, 1.0).unwrap();
        if !lemma.passed {
            failures.push(format!("config {i}: {:?}", lemma.witnesses));
        }
    }
    report(
        "3 (negative-branch suite)",
        failures.is_empty(),
        &format!(
            "100 configs with w0 < 0, violations = {}, worst N / ceil(B4 c) = {worst_fill:.3}{}",
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; first: {}", failures[0])
            }
        ),
    );
}

#[test]
fn criterion_4_formulation_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst_ulp = 0u64;
    for _ in 0..1_000_000 {
        let c = 10f64.powf(rng.gen_range(0.0..6.0));
        let gamma = 10f64.powf(rng.gen_range(-3.0..3.0));
        let y = 10f64.powf(rng.gen_range(-3.0..3.0));
        let w = rng.gen_range(-0.999..0.999) * c;
        let params = ModelParams::new(c, gamma).unwrap();
        let state = ModelState::initial(y, w);

        let (sj, ij) = step(&state, &params).unwrap();
        let (sa, ia) = step_acceleration_form(&state, &params).unwrap();
        let dt_implicit = implicit_meeting_time(&state, &params).unwrap();

        for (a, b) in [
            (ij.dt, ia.dt),
            (ij.dy, ia.dy),
            (ij.dw, ia.dw),
            (ij.a, ia.a),
            (ij.dt, dt_implicit),
            (sj.t, sa.t),
            (sj.y, sa.y),
            (sj.w, sa.w),
        ] {
            worst_ulp = worst_ulp.max(ulp_distance(a, b));
        }
    }
    report(
        "4 (formulation equivalence)",
        worst_ulp <= 1,
        &format!("10^6 randomized steps, worst componentwise distance = {worst_ulp} ulp (<= 1)"),
    );
}

#[test]
fn criterion_5_potential_lemma_boundedness() {
    let mut dev_c = Vec::new();
    for &c in &[1e3, 1e4, 1e5] {
        let params = ModelParams::new(c, 1.0).unwrap();
        let traj = run(&params, 1.0, 0.0, virtdyn_core::horizon_steps(1.0, c)).unwrap();
        let lemma = check_lemma(&traj, LemmaId::Potential, 1.0).unwrap();
        assert!(lemma.passed, "potential identities broken: {:?}", lemma.witnesses);
        dev_c.push(lemma.measured_constants["potential_deviation_times_c"]);
    }
    let max = dev_c.iter().cloned().fold(f64::MIN, f64::max);
    let min = dev_c.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    report(
        "5 (potential lemma, D2 boundedness)",
        spread < 3.0,
        &format!(
            "deviation*c at c = 1e3/1e4/1e5: {:.3e} / {:.3e} / {:.3e}; spread factor = {spread:.1} \
             (required < 3; the scaled deviation is bounded: it decays ~1/c instead of \
             holding constant, so the literal spread window cannot be met)",
            dev_c[0], dev_c[1], dev_c[2]
        ),
    );
}

#[test]
fn criterion_6_convergence_rate_windows() {
    let start = Instant::now();
    let c_list = [200.0, 400.0, 800.0, 1600.0];
    let mut lines = Vec::new();
    let mut failures = Vec::new();

    for &(y0, w0) in &[(1.0, 0.0), (1.0, 0.5), (2.0, -0.3)] {
        for mode in [InterpolationMode::Jump, InterpolationMode::Smooth] {
            let rep = rate_sweep(1.0, y0, w0, 1.0, &c_list, mode).unwrap();
            let cell = format!("(y0={y0}, w0={w0}, {mode})");
            lines.push(format!(
                "  {cell}: slope_y = {:+.3}, slope_w = {:+.3}, sup_y = {:?}, sup_w = {:?}",
                rep.fitted_rate_y,
                rep.fitted_rate_w,
                rep.sup_errors_y.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
                rep.sup_errors_w.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            ));

            for (label, slope) in [("slope_y", rep.fitted_rate_y), ("slope_w", rep.fitted_rate_w)] {
                if !(-1.2..=-0.8).contains(&slope) {
                    failures.push(format!("{cell} {label} = {slope:+.3} outside [-1.2, -0.8]"));
                }
            }
            for (label, errs) in [("sup_y", &rep.sup_errors_y), ("sup_w", &rep.sup_errors_w)] {
                for pair in errs.windows(2) {
                    let ratio = pair[0] / pair[1];
                    if !(1.6..=2.5).contains(&ratio) {
                        failures.push(format!(
                            "{cell} {label} doubling ratio {ratio:.2} outside [1.6, 2.5]"
                        ));
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 120.0 {
        failures.push(format!("runtime {elapsed:.1} s >= 120 s"));
    }
    for line in &lines {
        println!("{line}");
    }
    report(
        "6 (convergence rate windows)",
        failures.is_empty(),
        &format!(
            "runtime = {elapsed:.1} s; {} window violations{}{}",
            failures.len(),
            if failures.is_empty() { "" } else { ": " },
            failures.join("; ")
        ),
    );
}

#[test]
fn criterion_7_terminal_velocity_consistency() {
    let params = ModelParams::new(1e4, 1.0).unwrap();
    let traj = run(&params, 1.0, 0.0, virtdyn_core::horizon_steps(50.0, 1e4)).unwrap();
    let w_end = traj.last().w;
    let v_inf = terminal_velocity(1.0, 1.0, 0.0);
    let gap = (w_end - v_inf).abs();
    report(
        "7 (terminal velocity)",
        gap < 0.05,
        &format!("w at horizon A=50, c=1e4: {w_end:.6} vs v_inf = {v_inf}; |gap| = {gap:.2e} (< 0.05)"),
    );
}

#[test]
fn criterion_8_oracle_self_check() {
    let tol = 1e-12;
    let sol = solve(1.0, 1.0, 0.0, 100.0, tol).unwrap();
    let mut drift: f64 = 0.0;
    let samples = 20_000;
    for i in 0..=samples {
        let s = 100.0 * i as f64 / samples as f64;
        let p = sol.eval(s).unwrap();
        let (t, u) = energies(p.x, p.v, 1.0, 1.0);
        drift = drift.max((t + u).abs());
    }

    // mutual inversion on the monotone branch, both directions
    let s_to = time_of_flight(1.0, 1.0, 0.0, 1.5, tol).unwrap();
    let x_back = sol.eval(s_to).unwrap().x;
    let inversion_a = (x_back - 1.5).abs();

    let probe = sol.eval(3.0).unwrap();
    let s_back = time_of_flight(1.0, 1.0, 0.0, probe.x, tol).unwrap();
    let inversion_b = (s_back - 3.0).abs();

    report(
        "8 (oracle self-check)",
        drift < 1e-10 && inversion_a < 1e-8 && inversion_b < 1e-8,
        &format!(
            "energy drift over s in [0,100] at tol 1e-12: {drift:.2e} (< 1e-10); \
             flight-time inversions: {inversion_a:.2e}, {inversion_b:.2e} (< 1e-8)"
        ),
    );
}
