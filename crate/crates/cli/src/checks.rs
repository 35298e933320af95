//! Reusable verification routines: each maps a documented property of the
//! lifted model onto a pass/fail outcome with a numeric summary. The
//! `audit` command and the acceptance suite are both built from these.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use liftquad::analysis::{approximation_error, convergence_audit, recover_input};
use liftquad::baseline::{
    fit_edmdc, lift_baseline, predict_baseline, reconstruct_states, FitResult, BASELINE_DIM,
};
use liftquad::dynamics::{
    integrate, integrate_checked, QuadrotorParams, QuadrotorState, ReferenceModel, Trajectory,
};
use liftquad::lift::{
    apply_a, assemble_a, assemble_b, b_selector_mask, f_norm_envelope, g_norm_envelope, lift,
    observable_f, observable_g, propagate_lifted, unlift, BConstruction, LiftConfig, LiftedState,
};
use liftquad::se3::{hat, matrix_power, rotation_exp, vectorize, Pose};
use liftquad::signal::{ConstantSignal, PiecewiseConstantSignal, SampledSignal, ZeroSignal};
use liftquad::{Mat3, MatN, Vec3, Vec4, VecN};
use rayon::prelude::*;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, details: String) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            details,
        }
    }
}

fn splitmix(seed: &mut u64) -> u64 {
    *seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *seed;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(seed: &mut u64, lo: f64, hi: f64) -> f64 {
    let u = splitmix(seed) as f64 / u64::MAX as f64;
    lo + (hi - lo) * u
}

fn random_vec3(seed: &mut u64, scale: f64) -> Vec3 {
    Vec3::new(
        uniform(seed, -scale, scale),
        uniform(seed, -scale, scale),
        uniform(seed, -scale, scale),
    )
}

/// Chain-magnitude bounds: `|w^(xk) v| <= |w|^k |v|` and
/// `|vec(R w^(xk))| <= (sqrt(2)|w|)^k` over random rotations and
/// velocities, `k <= k_max`, zero violations allowed.
pub fn check_observable_bounds(samples: usize, k_max: usize, seed: u64) -> CheckOutcome {
    let mut s = seed;
    let slack = 1.0 + 1e-12;
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..samples {
        let w = random_vec3(&mut s, 2.0);
        let v = random_vec3(&mut s, 2.0);
        let r = rotation_exp(&random_vec3(&mut s, 3.0));
        let wn = w.norm();
        let vn = v.norm();
        let wx = hat(&w);
        let mut f = v;
        let mut wk = Mat3::identity();
        for k in 1..=k_max {
            f = w.cross(&f);
            wk *= wx;
            let f_bound = wn.powi(k as i32) * vn;
            let g_bound = (2.0_f64.sqrt() * wn).powi(k as i32);
            let g_norm = (r * wk).norm();
            if f.norm() > f_bound * slack + 1e-300 {
                violations += 1;
            }
            if g_norm > g_bound * slack + 1e-300 {
                violations += 1;
            }
            if f_bound > 0.0 {
                worst_margin = worst_margin.min(f_bound / f.norm().max(1e-300));
            }
        }
    }
    CheckOutcome::new(
        "observable-bounds",
        violations == 0,
        format!("{samples} samples, k <= {k_max}, {violations} violations"),
    )
}

/// Strict decay of the normalized chains on the guaranteed envelope:
/// `|f_{k+1}| < |f_k|` and `|vec(g_{k+1})| < |vec(g_k)|` for `k <= k_max`.
pub fn check_monotone_decay(samples: usize, k_max: usize, seed: u64) -> CheckOutcome {
    let mut s = seed;
    let omega_bar = 0.6 * std::f64::consts::FRAC_1_SQRT_2;
    let v_bar = 0.9;
    let cfg = LiftConfig::normalized(2, 2, 1.0, 1.0);
    let mut violations = 0usize;
    for _ in 0..samples {
        let mut w = random_vec3(&mut s, 1.0);
        let mut v = random_vec3(&mut s, 1.0);
        if w.norm() == 0.0 || v.norm() == 0.0 {
            continue;
        }
        w = w / w.norm() * uniform(&mut s, 1e-6, omega_bar);
        v = v / v.norm() * uniform(&mut s, 1e-6, v_bar);
        let x = QuadrotorState {
            pose: Pose {
                r: rotation_exp(&random_vec3(&mut s, 3.0)),
                p: random_vec3(&mut s, 3.0),
            },
            omega: w,
            velocity: v,
        };
        let mut prev_f = observable_f(&x.omega, &x.velocity, 0, &cfg).norm();
        let mut prev_g = vectorize(&observable_g(&x, 0, &cfg)).norm();
        for k in 1..=k_max + 1 {
            let fk = observable_f(&x.omega, &x.velocity, k, &cfg).norm();
            let gk = vectorize(&observable_g(&x, k, &cfg)).norm();
            if fk >= prev_f || gk >= prev_g {
                violations += 1;
            }
            prev_f = fk;
            prev_g = gk;
        }
    }
    CheckOutcome::new(
        "monotone-decay",
        violations == 0,
        format!("{samples} samples, k <= {k_max}, {violations} violations"),
    )
}

fn block_residual(fd: &VecN, rhs: &VecN, off: usize, len: usize) -> (f64, f64) {
    let mut diff = 0.0;
    let mut mag = 0.0;
    for i in off..off + len {
        diff += (fd[i] - rhs[i]).powi(2);
        mag += fd[i].powi(2);
    }
    (diff.sqrt(), mag.sqrt())
}

struct ConsistencySetup {
    params: QuadrotorParams,
    x0: QuadrotorState,
    torque_scale: f64,
    label: &'static str,
}

/// The translation-column defect every g-row (k >= 1) carries on
/// non-collinear states: `R w^(x(k-1)) (v' - e3 u4)` with the model's
/// `v' = -w x v`, placed in the block's fourth column.
fn g_column_defect(state: &QuadrotorState, u4: f64, k: usize, cfg: &LiftConfig) -> VecN {
    let v_dot = -state.omega.cross(&state.velocity);
    let mismatch =
        state.pose.r * (matrix_power(&hat(&state.omega), k - 1) * (v_dot - Vec3::z() * u4));
    let scale = if cfg.normalized {
        cfg.s0().powi(k as i32)
    } else {
        1.0
    };
    let mut defect = VecN::zeros(16);
    for i in 0..3 {
        defect[12 + i] = mismatch[i] / scale;
    }
    defect
}

/// Finite-difference consistency of the lifted right-hand side along a
/// simplified-model trajectory. Inputs are held for whole 1 s windows and
/// residuals evaluated strictly inside them, so centered differences see a
/// smooth flow and the tolerance checks the model, not input bookkeeping.
fn consistency_run(
    setup: &ConsistencySetup,
    cfg: &LiftConfig,
    dt: f64,
    gate_g_blocks: bool,
) -> CheckOutcome {
    let hold = (1.0 / dt).round() as usize;
    let signal = PiecewiseConstantSignal {
        amplitude: 0.02 * setup.torque_scale,
        hold_steps: hold,
        seed: 2024,
        channel_scale: Vec4::new(1.0, 1.0, 1.0, 0.0),
    };
    let traj = match integrate(
        &setup.x0,
        &signal,
        &setup.params,
        10.0,
        dt,
        ReferenceModel::Simplified,
    ) {
        Ok(t) => t,
        Err(e) => return CheckOutcome::new(setup.label, false, format!("integration failed: {e}")),
    };
    let lifted: Vec<LiftedState> = traj.states.iter().map(|x| lift(x, cfg)).collect();

    let mut max_gated = 0.0_f64;
    let mut max_measured_g = 0.0_f64;
    let mut max_defect_mismatch = 0.0_f64;
    let mut tail_ok = true;
    let mut checked = 0usize;
    for idx in (5..traj.len() - 5).step_by(197) {
        // Skip indices whose centered difference straddles a hold boundary.
        let pos_in_hold = idx % hold;
        if pos_in_hold < 2 || pos_in_hold > hold - 2 {
            continue;
        }
        checked += 1;
        let fd = (&lifted[idx + 1].0 - &lifted[idx - 1].0) / (2.0 * dt);
        let state = &traj.states[idx];
        // The recorded fourth channel is a per-step average, so the
        // centered difference sees the mean of the two adjacent holds;
        // compare against the same symmetric average (the torque channels
        // are constant inside a hold window, so they are unaffected).
        let u = 0.5 * (traj.inputs[idx - 1].0 + traj.inputs[idx].0);
        let rhs = apply_a(&lifted[idx].0, cfg) + assemble_b(state, &setup.params, cfg) * u;

        let mut gate = |off: usize, len: usize| {
            let (diff, mag) = block_residual(&fd, &rhs, off, len);
            max_gated = max_gated.max(diff / mag.max(1e-9));
        };
        gate(0, 4);
        gate(cfg.g_offset(0), 16);
        if gate_g_blocks {
            for k in 1..cfg.n1 - 1 {
                gate(cfg.g_offset(k), 16);
            }
        } else {
            // Translation-column residual of g-blocks is the model's
            // documented v-dot inconsistency; measure it and verify the
            // analytic form R w^(x(k-1)) (v' - e3 u4).
            for k in 1..cfg.n1 - 1 {
                let off = cfg.g_offset(k);
                let (diff, _) = block_residual(&fd, &rhs, off, 16);
                max_measured_g = max_measured_g.max(diff);
                let analytic = g_column_defect(state, u.w, k, cfg);
                let resid = VecN::from_iterator(16, (off..off + 16).map(|i| fd[i] - rhs[i]));
                max_defect_mismatch = max_defect_mismatch.max((resid - analytic).norm());
            }
        }
        for k in 0..cfg.n2 - 1 {
            gate(cfg.f_offset(k), 3);
        }

        // Tail rows: residual must equal the dropped next observable (plus,
        // on non-collinear states, the same translation-column defect every
        // g-row carries) and sit inside the norm envelope.
        let g_tail = cfg.n1 - 1;
        let off = cfg.g_offset(g_tail);
        let dropped = vectorize(&observable_g(state, cfg.n1, cfg)) * cfg.g_shift_coeff();
        let tail_defect = g_column_defect(state, u.w, g_tail, cfg);
        let resid = VecN::from_iterator(16, (off..off + 16).map(|i| fd[i] - rhs[i]));
        if (&resid - &dropped - &tail_defect).norm() > 1e-4 * (1.0 + dropped.norm()) {
            tail_ok = false;
        }
        let envelope = g_norm_envelope(state.omega.norm(), state.velocity.norm(), cfg.n1, cfg)
            * cfg.g_shift_coeff();
        if resid.norm() > envelope * 1.01 + tail_defect.norm() + 1e-4 {
            tail_ok = false;
        }
        let f_tail = cfg.n2 - 1;
        let off = cfg.f_offset(f_tail);
        let resid = VecN::from_iterator(3, (off..off + 3).map(|i| fd[i] - rhs[i]));
        let envelope = f_norm_envelope(state.omega.norm(), state.velocity.norm(), cfg.n2, cfg)
            * cfg.f_shift_coeff();
        if resid.norm() > envelope * 1.01 + 1e-6 {
            tail_ok = false;
        }
    }

    let passed = max_gated <= 1e-4 && tail_ok && checked > 0 && max_defect_mismatch <= 1e-4;
    let details = if gate_g_blocks {
        format!(
            "{checked} checkpoints, max gated relative residual {max_gated:.3e}, tails bounded: {tail_ok}"
        )
    } else {
        format!(
            "{checked} checkpoints, max gated relative residual {max_gated:.3e}, \
             measured g-column defect {max_measured_g:.3e} (analytic match {max_defect_mismatch:.3e}), tails bounded: {tail_ok}"
        )
    };
    CheckOutcome::new(setup.label, passed, details)
}

/// Lift-consistency runs (finite differences against `A X + B(x) u`).
///
/// Run A starts from zero linear velocity, where every chain identity
/// closes exactly, and gates all blocks. Run B uses a generic state: the
/// head, `g_0`, and every f-block are exact and gated, while the g-block
/// translation columns carry the model's inherent `v' = -w x v`
/// inconsistency, which is measured and matched against its analytic form.
pub fn check_lift_consistency(dt: f64) -> (CheckOutcome, CheckOutcome) {
    let params = QuadrotorParams {
        mass: 1.0,
        inertia: Mat3::from_diagonal(&Vec3::new(0.8, 1.0, 1.25)),
        ..QuadrotorParams::default()
    };
    let run_a = ConsistencySetup {
        params: params.clone(),
        x0: QuadrotorState {
            pose: Pose {
                r: rotation_exp(&Vec3::new(0.3, -0.2, 0.4)),
                p: Vec3::new(1.0, -2.0, 0.5),
            },
            omega: Vec3::new(0.2, -0.35, 0.25),
            velocity: Vec3::zeros(),
        },
        torque_scale: 1.0,
        label: "lift-consistency-exact",
    };
    let run_b = ConsistencySetup {
        params,
        x0: QuadrotorState {
            pose: Pose {
                r: rotation_exp(&Vec3::new(-0.2, 0.5, 0.1)),
                p: Vec3::new(0.5, 1.5, -1.0),
            },
            omega: Vec3::new(0.3, -0.2, 0.4),
            velocity: Vec3::new(0.5, 0.25, -0.4),
        },
        torque_scale: 1.0,
        label: "lift-consistency-generic",
    };
    let cfg = LiftConfig::raw(6, 4);
    (
        consistency_run(&run_a, &cfg, dt, true),
        consistency_run(&run_b, &cfg, dt, false),
    )
}

/// Columnwise vs closed-form input matrices over random states
/// (both chains, both scalings).
pub fn check_b_equivalence(samples: usize, seed: u64) -> CheckOutcome {
    let mut s = seed;
    let params = QuadrotorParams {
        inertia: Mat3::from_diagonal(&Vec3::new(0.7, 1.1, 1.6)),
        ..QuadrotorParams::default()
    };
    let mut worst_f = 0.0_f64;
    let mut worst_g = 0.0_f64;
    for cfg in [
        LiftConfig::raw(7, 7),
        LiftConfig::normalized(6, 8, 0.9, 1.3),
    ] {
        let closed = LiftConfig {
            b_construction: BConstruction::ClosedForm,
            ..cfg.clone()
        };
        for _ in 0..samples {
            let x = QuadrotorState {
                pose: Pose {
                    r: rotation_exp(&random_vec3(&mut s, 2.0)),
                    p: random_vec3(&mut s, 2.0),
                },
                omega: random_vec3(&mut s, 1.0),
                velocity: random_vec3(&mut s, 1.0),
            };
            let b_col = assemble_b(&x, &params, &cfg);
            let b_closed = assemble_b(&x, &params, &closed);
            let scale = b_col.amax().max(1.0);
            for k in 1..cfg.n2 {
                let off = cfg.f_offset(k);
                for i in 0..3 {
                    for j in 0..4 {
                        worst_f =
                            worst_f.max((b_col[(off + i, j)] - b_closed[(off + i, j)]).abs() / scale);
                    }
                }
            }
            for k in 1..cfg.n1 {
                let off = cfg.g_offset(k);
                for i in 0..16 {
                    for j in 0..4 {
                        worst_g =
                            worst_g.max((b_col[(off + i, j)] - b_closed[(off + i, j)]).abs() / scale);
                    }
                }
            }
        }
    }
    CheckOutcome::new(
        "b-construction-equivalence",
        worst_f <= 1e-10 && worst_g <= 1e-10,
        format!("worst f-block gap {worst_f:.3e}, worst g-block gap {worst_g:.3e} (relative)"),
    )
}

/// Controllability-matrix rank equals the lifted dimension for small
/// configurations.
pub fn check_controllability() -> CheckOutcome {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [2usize, 3, 5] {
        match liftquad::analysis::controllability_rank(&LiftConfig::raw(n, n)) {
            Ok(report) => {
                details.push(format!("N1=N2={n}: rank {}/{}", report.rank, report.ambient_dim));
                ok &= report.is_controllable();
            }
            Err(e) => {
                details.push(format!("N1=N2={n}: error {e}"));
                ok = false;
            }
        }
    }
    CheckOutcome::new("controllability", ok, details.join("; "))
}

/// Lifted dimension formula at the tabulated sizes.
pub fn check_dimension_formula() -> CheckOutcome {
    let ok = LiftConfig::raw(15, 15).dim() == 289
        && LiftConfig::raw(25, 25).dim() == 479
        && lift(&QuadrotorState::rest(), &LiftConfig::raw(15, 15)).dim() == 289
        && lift(&QuadrotorState::rest(), &LiftConfig::raw(25, 25)).dim() == 479;
    CheckOutcome::new(
        "dimension-formula",
        ok,
        "N(15,15) = 289, N(25,25) = 479".into(),
    )
}

/// Integrator fidelity: closed-form spin, fourth-order convergence, and
/// long-run orthonormality.
pub fn check_integrator() -> CheckOutcome {
    let unit = QuadrotorParams {
        mass: 1.0,
        inertia: Mat3::identity(),
        thrust_coeff: 1.0,
        moment_coeff: 0.1,
        arm_length: 1.0,
        gravity: 0.0,
    };
    // Closed-form z-spin.
    let x0 = QuadrotorState {
        omega: Vec3::new(0.0, 0.0, 1.0),
        ..QuadrotorState::rest()
    };
    let traj = integrate(&x0, &ZeroSignal, &unit, 2.0, 1e-3, ReferenceModel::Full).unwrap();
    let spin_err = (traj.states.last().unwrap().pose.r - rotation_exp(&Vec3::new(0.0, 0.0, 2.0)))
        .norm();

    // Convergence order under dt halving, against a much finer reference.
    let params = QuadrotorParams {
        mass: 0.8,
        inertia: Mat3::from_diagonal(&Vec3::new(4e-3, 5e-3, 6e-3)),
        ..QuadrotorParams::default()
    };
    let x0 = QuadrotorState {
        pose: Pose {
            r: rotation_exp(&Vec3::new(0.1, -0.2, 0.15)),
            p: Vec3::zeros(),
        },
        omega: Vec3::new(0.3, -0.2, 0.4),
        velocity: Vec3::new(0.2, 0.1, -0.15),
    };
    let u = ConstantSignal(Vec4::new(2e-3, -1e-3, 1.5e-3, 0.03));
    let run = |dt: f64| {
        *integrate(&x0, &u, &params, 1.0, dt, ReferenceModel::Full)
            .unwrap()
            .states
            .last()
            .unwrap()
    };
    let reference = run(2.5e-4);
    let err = |s: &QuadrotorState| {
        (s.pose.r - reference.pose.r).norm()
            + (s.pose.p - reference.pose.p).norm()
            + (s.omega - reference.omega).norm()
            + (s.velocity - reference.velocity).norm()
    };
    let ratio = err(&run(4e-3)) / err(&run(2e-3));

    // Orthogonality drift over 1e5 steps.
    let x0 = QuadrotorState {
        omega: Vec3::new(0.7, -0.4, 0.5),
        velocity: Vec3::new(0.1, 0.2, -0.1),
        ..QuadrotorState::rest()
    };
    let (_, drift) = integrate_checked(
        &x0,
        &ZeroSignal,
        &unit,
        100.0,
        1e-3,
        ReferenceModel::Simplified,
    )
    .unwrap();

    let passed = spin_err <= 1e-6 && (13.0..=19.0).contains(&ratio) && drift <= 1e-9;
    CheckOutcome::new(
        "integrator-fidelity",
        passed,
        format!(
            "spin error {spin_err:.3e} (<=1e-6), halving ratio {ratio:.2} (16 +- 3), \
             orthogonality drift {drift:.3e} over 1e5 steps (<=1e-9)"
        ),
    )
}

/// The audit's own alarm: a sign flip in `A` must trip the consistency
/// detector.
pub fn check_mutation_sensitivity() -> CheckOutcome {
    let params = QuadrotorParams {
        inertia: Mat3::identity(),
        mass: 1.0,
        ..QuadrotorParams::default()
    };
    let cfg = LiftConfig::raw(4, 3);
    let x0 = QuadrotorState {
        omega: Vec3::new(0.25, -0.4, 0.3),
        velocity: Vec3::zeros(),
        ..QuadrotorState::rest()
    };
    let signal = ConstantSignal(Vec4::new(0.02, -0.015, 0.01, 0.0));
    let dt = 1e-3;
    let traj = integrate(&x0, &signal, &params, 0.5, dt, ReferenceModel::Simplified).unwrap();
    let lifted: Vec<LiftedState> = traj.states.iter().map(|x| lift(x, &cfg)).collect();

    let mut tampered = assemble_a(&cfg);
    let row = cfg.g_offset(0);
    let col = cfg.g_offset(1);
    tampered[(row, col)] = -tampered[(row, col)];

    let idx = traj.len() / 2;
    let fd = (&lifted[idx + 1].0 - &lifted[idx - 1].0) / (2.0 * dt);
    let b = assemble_b(&traj.states[idx], &params, &cfg);
    // Compare on the block the tampered entry drives (the deeper rows carry
    // genuine truncation residue either way).
    let healthy_rhs = apply_a(&lifted[idx].0, &cfg) + &b * traj.inputs[idx].0;
    let broken_rhs = &tampered * &lifted[idx].0 + &b * traj.inputs[idx].0;
    let (healthy, _) = block_residual(&fd, &healthy_rhs, row, 16);
    let (broken, _) = block_residual(&fd, &broken_rhs, row, 16);
    let passed = healthy < 1e-4 && broken > 1e3 * healthy.max(1e-12);
    CheckOutcome::new(
        "mutation-sensitivity",
        passed,
        format!("healthy residual {healthy:.3e}, tampered-A residual {broken:.3e}"),
    )
}

/// Exact round trip through the lifted coordinates.
pub fn check_unlift_round_trip(samples: usize, seed: u64) -> CheckOutcome {
    let mut s = seed;
    let cfg = LiftConfig::raw(4, 4);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = QuadrotorState {
            pose: Pose {
                r: rotation_exp(&random_vec3(&mut s, 2.0)),
                p: random_vec3(&mut s, 3.0),
            },
            omega: random_vec3(&mut s, 1.0),
            velocity: random_vec3(&mut s, 1.0),
        };
        match unlift(&lift(&x, &cfg), &cfg) {
            Ok((back, _)) => {
                worst = worst
                    .max((back.pose.r - x.pose.r).norm())
                    .max((back.pose.p - x.pose.p).norm())
                    .max((back.omega - x.omega).norm())
                    .max((back.velocity - x.velocity).norm());
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckOutcome::new(
        "unlift-round-trip",
        worst == 0.0,
        format!("{samples} samples, worst readout deviation {worst:.3e}"),
    )
}

/// Least-squares recovery optimality: the pseudo-inverse solution beats
/// random perturbations and satisfies the normal equations.
pub fn check_recovery_optimality(seed: u64) -> CheckOutcome {
    let mut s = seed;
    let params = QuadrotorParams::default();
    let cfg = LiftConfig::raw(5, 5);
    let x = QuadrotorState {
        pose: Pose {
            r: rotation_exp(&random_vec3(&mut s, 1.0)),
            p: random_vec3(&mut s, 1.0),
        },
        omega: random_vec3(&mut s, 0.5),
        velocity: random_vec3(&mut s, 0.5),
    };
    let u_star = VecN::from_fn(cfg.dim(), |_, _| uniform(&mut s, -30.0, 30.0));
    let result = match recover_input(&x, &u_star, &params, &cfg) {
        Ok(r) => r,
        Err(e) => return CheckOutcome::new("recovery-optimality", false, format!("{e}")),
    };
    let b = assemble_b(&x, &params, &cfg);
    let mask = b_selector_mask(&cfg);
    let mut target = u_star.clone();
    for (v, keep) in target.iter_mut().zip(mask) {
        if !keep {
            *v = 0.0;
        }
    }
    let objective = |u: &Vec4| (&b * VecN::from_iterator(4, u.iter().copied()) - &target).norm_squared();
    let best = objective(&result.u_tilde);
    let mut beaten = 0usize;
    for _ in 0..100 {
        let delta = Vec4::new(
            uniform(&mut s, -1e-2, 1e-2),
            uniform(&mut s, -1e-2, 1e-2),
            uniform(&mut s, -1e-2, 1e-2),
            uniform(&mut s, -1e-2, 1e-2),
        );
        if objective(&(result.u_tilde + delta)) < best - 1e-9 * best.max(1.0) {
            beaten += 1;
        }
    }
    let normal_gap = (b.transpose() * (&b * VecN::from_iterator(4, result.u_tilde.iter().copied()) - &target))
        .norm();
    let passed = beaten == 0 && normal_gap <= 1e-8 * (1.0 + target.norm());
    CheckOutcome::new(
        "recovery-optimality",
        passed,
        format!("perturbations better than pinv: {beaten}/100, normal-equation gap {normal_gap:.3e}"),
    )
}

/// Chain-decay audit on the configured envelope; domain violations are
/// reported, not failed.
pub fn check_convergence_audit(cfg: &ExperimentConfig) -> CheckOutcome {
    let report = convergence_audit(
        cfg.audit.omega_bar,
        cfg.audit.v_bar,
        cfg.audit.samples,
        cfg.audit.k_max,
        cfg.audit.input_bound,
        cfg.sim.seed,
    );
    let mut details = format!(
        "{} checked, {} excluded, violations: f {}, g {}, input-sum {}, monotonicity {}; tails f {:.3e}, g {:.3e}",
        report.samples_checked,
        report.samples_excluded,
        report.f_bound_violations,
        report.g_bound_violations,
        report.input_sum_bound_violations,
        report.monotonicity_violations,
        report.max_f_tail,
        report.max_g_tail
    );
    if report.domain_violation {
        details.push_str("; DOMAIN VIOLATION: ");
        details.push_str(&report.warnings.join("; "));
    }
    CheckOutcome::new("convergence-audit", report.passed(), details)
}

/// One sweep point: lifted propagation against the reference, with errors.
pub struct SweepPoint {
    pub n: usize,
    pub errors: liftquad::analysis::ErrorSeries,
    pub max_rotation_defect: f64,
}

/// Shared context for the experiment commands.
pub struct ExperimentData {
    pub reference: Trajectory,
    pub max_omega: f64,
    pub max_v: f64,
    pub params: QuadrotorParams,
}

/// Integrates the reference trajectory and records the speed envelope.
pub fn reference_run(cfg: &ExperimentConfig, t_final: f64) -> Result<ExperimentData> {
    let params = cfg.params()?;
    let signal = cfg.signal(cfg.sim.seed, cfg.signal.scalar_gamma);
    let reference = integrate(
        &cfg.initial_state(),
        &signal,
        &params,
        t_final,
        cfg.sim.dt,
        cfg.reference_model()?,
    )?;
    let max_omega = reference
        .states
        .iter()
        .map(|s| s.omega.norm())
        .fold(0.0, f64::max);
    let max_v = reference
        .states
        .iter()
        .map(|s| s.velocity.norm())
        .fold(0.0, f64::max);
    Ok(ExperimentData {
        reference,
        max_omega,
        max_v,
        params,
    })
}

/// Propagates the lifted model over the reference's recorded inputs and
/// computes the three error series.
pub fn lifted_sweep_point(
    cfg: &ExperimentConfig,
    data: &ExperimentData,
    n: usize,
) -> Result<SweepPoint> {
    let lift_cfg = cfg.lift_config(n, data.max_omega, data.max_v)?;
    let inputs = data.reference.input_vectors();
    let t_final = *data.reference.times.last().unwrap();
    let lifted = propagate_lifted(
        &lift(&data.reference.states[0], &lift_cfg),
        &SampledSignal(inputs),
        &data.params,
        &lift_cfg,
        t_final,
        cfg.sim.dt,
    )?;
    let states = lifted.unlift_all(&lift_cfg)?;
    let errors = approximation_error(
        &lifted.times,
        &states,
        &data.reference.times,
        &data.reference.states,
    )?;
    Ok(SweepPoint {
        n,
        errors,
        max_rotation_defect: lifted.max_rotation_defect,
    })
}

/// Runs every grid point (in parallel) against one reference trajectory.
pub fn run_error_sweep(cfg: &ExperimentConfig, t_final: f64) -> Result<(ExperimentData, Vec<SweepPoint>)> {
    let data = reference_run(cfg, t_final)?;
    let mut points: Vec<SweepPoint> = cfg
        .lift
        .n_grid
        .par_iter()
        .map(|n| lifted_sweep_point(cfg, &data, *n))
        .collect::<Result<_>>()?;
    points.sort_by_key(|p| p.n);
    Ok((data, points))
}

/// Baseline fit plus its free-run errors on the reference trajectory.
pub struct BaselineOutcome {
    pub fit: FitResult,
    pub errors: liftquad::analysis::ErrorSeries,
}

/// Trains the dictionary baseline on freshly generated trajectories and
/// free-runs it over the reference horizon at the configured stride.
pub fn run_baseline(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<BaselineOutcome> {
    let stride = cfg.baseline.stride;
    let gravity = cfg.quadrotor.gravity;
    let snapshots: Vec<(MatN, MatN, MatN)> = (0..cfg.baseline.trajectories as u64)
        .into_par_iter()
        .map(|k| -> Result<_> {
            let signal = cfg.signal(
                cfg.sim.seed.wrapping_add(1000 + k),
                cfg.baseline.train_scalar_gamma,
            );
            let traj = integrate(
                &cfg.initial_state(),
                &signal,
                &data.params,
                cfg.baseline.t_train,
                cfg.sim.dt,
                cfg.reference_model()?,
            )?;
            Ok(strided_snapshots(&traj, gravity, stride))
        })
        .collect::<Result<_>>()?;

    let m_total: usize = snapshots.iter().map(|(z, _, _)| z.ncols()).sum();
    let mut z = MatN::zeros(BASELINE_DIM, m_total);
    let mut z_next = MatN::zeros(BASELINE_DIM, m_total);
    let mut u = MatN::zeros(4, m_total);
    let mut at = 0;
    for (a, b, c) in &snapshots {
        z.view_mut((0, at), (BASELINE_DIM, a.ncols())).copy_from(a);
        z_next
            .view_mut((0, at), (BASELINE_DIM, b.ncols()))
            .copy_from(b);
        u.view_mut((0, at), (4, c.ncols())).copy_from(c);
        at += a.ncols();
    }
    let fit = fit_edmdc(&z, &z_next, &u, cfg.baseline.ridge).context("baseline fit failed")?;

    // Free-run on the reference horizon.
    let reference = &data.reference;
    let coarse_dt = cfg.sim.dt * stride as f64;
    let coarse_inputs: Vec<Vec4> = (0..reference.len() - 1)
        .step_by(stride)
        .map(|i| reference.inputs[i].0)
        .collect();
    let x0 = &reference.states[0];
    let predicted = predict_baseline(&fit, &lift_baseline(x0, gravity), &coarse_inputs);
    let rec = reconstruct_states(&predicted, coarse_dt, x0.pose.r, x0.pose.p);
    let coarse_times: Vec<f64> = (0..predicted.len()).map(|k| k as f64 * coarse_dt).collect();
    let coarse_ref: Vec<QuadrotorState> = (0..reference.len())
        .step_by(stride)
        .take(predicted.len())
        .map(|i| reference.states[i])
        .collect();
    let errors = approximation_error(
        &coarse_times,
        &rec,
        &coarse_times,
        &coarse_ref,
    )?;
    Ok(BaselineOutcome { fit, errors })
}

/// Snapshot matrices at a coarse stride (fit step = stride * dt).
pub fn strided_snapshots(traj: &Trajectory, gravity: f64, stride: usize) -> (MatN, MatN, MatN) {
    let m = (traj.len() - 1) / stride;
    let mut z = MatN::zeros(BASELINE_DIM, m);
    let mut z_next = MatN::zeros(BASELINE_DIM, m);
    let mut u = MatN::zeros(4, m);
    for k in 0..m {
        let i = k * stride;
        z.set_column(k, &lift_baseline(&traj.states[i], gravity));
        z_next.set_column(k, &lift_baseline(&traj.states[i + stride], gravity));
        for r in 0..4 {
            u[(r, k)] = traj.inputs[i].0[r];
        }
    }
    (z, z_next, u)
}

/// One recovery sample in the consistency mode: the exact lifted forcing
/// realized by the motion at truncation `(n, n)`.
pub fn consistency_u_star(
    state: &QuadrotorState,
    u: &Vec4,
    params: &QuadrotorParams,
    lift_cfg: &LiftConfig,
) -> VecN {
    let b = assemble_b(state, params, lift_cfg);
    let mut u_star = &b * VecN::from_iterator(4, u.iter().copied());
    let g_tail = vectorize(&observable_g(state, lift_cfg.n1, lift_cfg));
    let off = lift_cfg.g_offset(lift_cfg.n1 - 1);
    for i in 0..16 {
        u_star[off + i] += lift_cfg.g_shift_coeff() * g_tail[i];
    }
    let f_tail = observable_f(&state.omega, &state.velocity, lift_cfg.n2, lift_cfg);
    let off = lift_cfg.f_offset(lift_cfg.n2 - 1);
    for i in 0..3 {
        u_star[off + i] -= lift_cfg.f_shift_coeff() * f_tail[i];
    }
    u_star
}

/// Recovery experiment summary for one truncation order.
#[derive(Debug, Clone)]
pub struct RecoverySummary {
    pub n: usize,
    pub mean_relative: f64,
    pub max_relative: f64,
    pub samples: Vec<f64>,
}

/// Consistency-mode recovery along the configured run.
pub fn run_recovery_consistency(
    cfg: &ExperimentConfig,
    data: &ExperimentData,
) -> Result<Vec<RecoverySummary>> {
    let steps = (cfg.recovery.t_run / cfg.sim.dt).round() as usize;
    let take = cfg.recovery.samples.max(1);
    let stride = (steps / (take + 1)).max(1);
    let mut out = Vec::new();
    for n in cfg.recovery.n_pair {
        let lift_cfg = cfg.lift_config(n, data.max_omega, data.max_v)?;
        let mut samples = Vec::new();
        for s in 1..=take {
            let idx = (s * stride).min(data.reference.len() - 1);
            let state = &data.reference.states[idx];
            let u = data.reference.inputs[idx].0;
            let u_star = consistency_u_star(state, &u, &data.params, &lift_cfg);
            let rec = recover_input(state, &u_star, &data.params, &lift_cfg)?;
            samples.push(rec.relative_residual);
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let max = samples.iter().copied().fold(0.0, f64::max);
        out.push(RecoverySummary {
            n,
            mean_relative: mean,
            max_relative: max,
            samples,
        });
    }
    Ok(out)
}

/// Paper-literal recovery: a random constant lifted input drives the
/// linear system for the configured horizon; the realized speed envelope
/// and the end-state recovery residual are reported.
#[derive(Debug, Clone)]
pub struct LiteralRecoveryReport {
    pub n: usize,
    pub relative_residual: f64,
    pub realized_max_omega: f64,
    pub realized_max_v: f64,
}

pub fn run_recovery_paper_literal(
    cfg: &ExperimentConfig,
    data: &ExperimentData,
) -> Result<Vec<LiteralRecoveryReport>> {
    let mut out = Vec::new();
    let mut seed = cfg.sim.seed ^ 0x5151_5151;
    for n in cfg.recovery.n_pair {
        let lift_cfg = cfg.lift_config(n, data.max_omega, data.max_v)?;
        let dim = lift_cfg.dim();
        let u_star = VecN::from_fn(dim, |_, _| {
            uniform(&mut seed, cfg.recovery.u_star_min, cfg.recovery.u_star_max)
        });
        let mask = b_selector_mask(&lift_cfg);
        let mut forcing = u_star.clone();
        for (v, keep) in forcing.iter_mut().zip(&mask) {
            if !keep {
                *v = 0.0;
            }
        }
        // X' = A X + Bt U* with constant forcing, classic RK4.
        let dt = cfg.sim.dt;
        let steps = (cfg.recovery.t_run / dt).round() as usize;
        let mut x = lift(&data.reference.states[0], &lift_cfg).0;
        let mut max_w = 0.0_f64;
        let mut max_v = 0.0_f64;
        let v_scale = if lift_cfg.normalized { lift_cfg.v0 } else { 1.0 };
        for _ in 0..steps {
            let k1 = apply_a(&x, &lift_cfg) + &forcing;
            let k2 = apply_a(&(&x + (dt / 2.0) * &k1), &lift_cfg) + &forcing;
            let k3 = apply_a(&(&x + (dt / 2.0) * &k2), &lift_cfg) + &forcing;
            let k4 = apply_a(&(&x + dt * &k3), &lift_cfg) + &forcing;
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let w = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let f0 = lift_cfg.f_offset(0);
            let v = ((v_scale * x[f0]).powi(2) + (v_scale * x[f0 + 1]).powi(2) + x[3] * x[3]).sqrt();
            max_w = max_w.max(w);
            max_v = max_v.max(v);
        }
        let (state, _) = unlift(&LiftedState(x), &lift_cfg)?;
        let rec = recover_input(&state, &u_star, &data.params, &lift_cfg)?;
        out.push(LiteralRecoveryReport {
            n,
            relative_residual: rec.relative_residual,
            realized_max_omega: max_w,
            realized_max_v: max_v,
        });
    }
    Ok(out)
}
