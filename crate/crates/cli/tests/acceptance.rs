//! Acceptance suite: one test per advertised guarantee, each printing a
//! PASS/FAIL line with its measured numbers. Run with
//! `cargo test -p liftquad-cli --test acceptance -- --nocapture`.

use liftquad_cli::checks::{
    check_b_equivalence, check_controllability, check_dimension_formula, check_integrator,
    check_lift_consistency, check_monotone_decay, check_observable_bounds,
    check_recovery_optimality, consistency_u_star, reference_run, run_baseline,
    run_error_sweep, run_recovery_consistency,
};
use liftquad_cli::config::ExperimentConfig;
use liftquad::analysis::recover_input;
use liftquad::lift::{assemble_b, b_selector_mask};
use liftquad::{Vec4, VecN};

fn report(criterion: &str, passed: bool, details: &str) {
    println!(
        "criterion {criterion}: {} - {details}",
        if passed { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_01_observable_bound_suite() {
    let outcome = check_observable_bounds(10_000, 30, 101);
    report("1 (observable bounds)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}

#[test]
fn criterion_02_monotone_decay() {
    let outcome = check_monotone_decay(10_000, 30, 202);
    report("2 (monotone decay)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}

#[test]
fn criterion_03_lift_consistency() {
    let (run_a, run_b) = check_lift_consistency(1e-3);
    report(
        "3 (lift consistency, exact chain)",
        run_a.passed,
        &run_a.details,
    );
    report(
        "3 (lift consistency, generic state)",
        run_b.passed,
        &run_b.details,
    );
    assert!(run_a.passed, "{}", run_a.details);
    assert!(run_b.passed, "{}", run_b.details);
}

#[test]
fn criterion_04_b_construction_equivalence() {
    let outcome = check_b_equivalence(500, 404);
    report("4 (B-construction equivalence)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}

#[test]
fn criterion_05_controllability() {
    let outcome = check_controllability();
    report("5 (controllability)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}

#[test]
fn criterion_06_error_vs_dimension_trend() {
    let cfg = ExperimentConfig::built_in_default();
    let (_, points) = run_error_sweep(&cfg, 30.0).expect("sweep");
    assert_eq!(points.len(), 3);
    let at30: Vec<(usize, f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let (pos, vel, ang) = p.errors.at_time(30.0).unwrap();
            (p.n, pos, vel, ang)
        })
        .collect();
    for (n, pos, vel, ang) in &at30 {
        println!("  N1=N2={n:2}: pos {pos:.9e}, vel {vel:.9e}, ang {ang:.9e}");
    }
    let strict = |f: &dyn Fn(&(usize, f64, f64, f64)) -> f64| {
        f(&at30[0]) > f(&at30[1]) && f(&at30[1]) > f(&at30[2])
    };
    let pos_ok = strict(&|r| r.1);
    let vel_ok = strict(&|r| r.2);
    let ang_ok = strict(&|r| r.3);
    let passed = pos_ok && vel_ok && ang_ok;
    report(
        "6 (error-vs-dimension trend)",
        passed,
        &format!(
            "strict decrease over N1=N2 in {{5,15,25}} at t=30 s: position {pos_ok}, \
             velocity {vel_ok}, angles {ang_ok}"
        ),
    );
    if !passed {
        println!(
            "  note: the 15->25 position/velocity gap sits below the model's intrinsic \
             defect floors (the translation-column v'-inconsistency and the per-step \
             B refresh); the truncation separation at these speeds is ~1e-10 relative, \
             so the sub-floor ordering is not controlled by the chain length."
        );
    }
    assert!(
        passed,
        "strict decrease failed: position {pos_ok}, velocity {vel_ok}, angles {ang_ok}"
    );
}

#[test]
fn criterion_07_baseline_comparison() {
    let cfg = ExperimentConfig::built_in_default();
    let data = reference_run(&cfg, 60.0).expect("reference");
    let n25 = liftquad_cli::checks::lifted_sweep_point(&cfg, &data, 25).expect("lifted 25");
    let n15 = liftquad_cli::checks::lifted_sweep_point(&cfg, &data, 15).expect("lifted 15");
    let baseline = run_baseline(&cfg, &data).expect("baseline fit");

    let e25 = n25.errors.at_time(60.0).unwrap();
    let e15 = n15.errors.at_time(60.0).unwrap();
    let eb = baseline.errors.at_time(60.0).unwrap();
    let rows = [
        ("x", e25.0, e15.0, eb.0),
        ("v", e25.1, e15.1, eb.1),
        ("angles", e25.2, e15.2, eb.2),
    ];
    for (label, a, b, c) in &rows {
        println!("  {label:7} N25 {a:.3e}  N15 {b:.3e}  baseline {c:.3e}");
    }
    let n25_beats_all = rows.iter().all(|(_, a, _, c)| a < c);
    let ratio_2x = rows.iter().any(|(_, a, _, c)| c / a >= 2.0);
    let n15_comparable = rows
        .iter()
        .any(|(_, _, b, c)| (b / c).max(c / b) <= 10.0);
    let passed = n25_beats_all && ratio_2x && n15_comparable;
    report(
        "7 (comparison-table ordering)",
        passed,
        &format!(
            "N25 lower on all rows: {n25_beats_all}; >=2x margin on some row: {ratio_2x}; \
             N15 within 10x of baseline on some row: {n15_comparable}"
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_08_input_recovery() {
    let cfg = ExperimentConfig::built_in_default();
    let data = reference_run(&cfg, cfg.recovery.t_run).expect("reference");
    let summaries = run_recovery_consistency(&cfg, &data).expect("recovery");
    assert_eq!(summaries.len(), 2);
    let (n15, n25) = (&summaries[0], &summaries[1]);
    assert_eq!((n15.n, n25.n), (15, 25));
    for s in &summaries {
        println!(
            "  N1=N2={:2}: relative residual mean {:.4e}, max {:.4e}",
            s.n, s.mean_relative, s.max_relative
        );
    }
    let ordered = n25.mean_relative < n15.mean_relative
        && n25
            .samples
            .iter()
            .zip(&n15.samples)
            .all(|(deep, shallow)| deep < shallow);

    // Optimality of the least-squares solution at a few samples.
    let lift_cfg = cfg.lift_config(15, data.max_omega, data.max_v).unwrap();
    let mask = b_selector_mask(&lift_cfg);
    let mut optimal = true;
    let mut rng_seed = 808u64;
    let mut uniform = |lo: f64, hi: f64| {
        rng_seed = rng_seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = rng_seed;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        lo + (hi - lo) * ((z ^ (z >> 31)) as f64 / u64::MAX as f64)
    };
    for idx in [1500usize, 4500, 7500] {
        let state = &data.reference.states[idx];
        let u = data.reference.inputs[idx].0;
        let u_star = consistency_u_star(state, &u, &data.params, &lift_cfg);
        let rec = recover_input(state, &u_star, &data.params, &lift_cfg).unwrap();
        let b = assemble_b(state, &data.params, &lift_cfg);
        let mut target = u_star.clone();
        for (v, keep) in target.iter_mut().zip(&mask) {
            if !keep {
                *v = 0.0;
            }
        }
        let objective = |u: &Vec4| {
            (&b * VecN::from_iterator(4, u.iter().copied()) - &target).norm_squared()
        };
        let best = objective(&rec.u_tilde);
        for _ in 0..100 {
            let delta = Vec4::new(
                uniform(-1e-3, 1e-3),
                uniform(-1e-3, 1e-3),
                uniform(-1e-3, 1e-3),
                uniform(-1e-3, 1e-3),
            );
            if objective(&(rec.u_tilde + delta)) < best - 1e-12 * best.max(1.0) {
                optimal = false;
            }
        }
    }
    let passed = ordered && optimal;
    report(
        "8 (input recovery)",
        passed,
        &format!(
            "relative residual {:.3e} (N=25) < {:.3e} (N=15) on every sample: {ordered}; \
             pseudo-inverse beats 100 perturbations at 3 samples: {optimal}",
            n25.mean_relative, n15.mean_relative
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_09_dimension_formula() {
    let outcome = check_dimension_formula();
    report("9 (dimension formula)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}

#[test]
fn criterion_10_integrator_fidelity() {
    let outcome = check_integrator();
    report("10 (integrator fidelity)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}

#[test]
fn recovery_optimality_spot_check() {
    let outcome = check_recovery_optimality(909);
    report("8b (recovery optimality, random target)", outcome.passed, &outcome.details);
    assert!(outcome.passed, "{}", outcome.details);
}
