//! Diagnostics for the lifted model: least-squares input recovery,
//! controllability rank, chain-convergence audits, and approximation-error
//! metrics.

use crate::dynamics::{QuadrotorParams, QuadrotorState};
use crate::error::CoreError;
use crate::lift::{assemble_a, assemble_b, b_selector, b_selector_mask, LiftConfig};
use crate::se3::{euler_zyx, hat, twist, vectorize};
use crate::{Mat4, MatN, Vec3, Vec4, VecN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference norms below this floor make a relative error undefined.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-12;

/// Outcome of recovering the physical input from a lifted input.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub u_tilde: Vec4,
    /// `|B(x) u - Bt U*|` at the minimizer.
    pub residual: f64,
    /// Residual over `|Bt U*|` (zero when the target is zero).
    pub relative_residual: f64,
    pub singular_values: Vec<f64>,
    pub effective_rank: usize,
    pub rank_deficient: bool,
    pub tolerance: f64,
}

/// Least-squares solve `min_u |b u - target|` via SVD, with numeric-rank
/// reporting.
pub fn least_squares_recover(b: &MatN, target: &VecN) -> Result<RecoveryResult, CoreError> {
    if b.nrows() != target.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "matrix has {} rows, target {}",
            b.nrows(),
            target.len()
        )));
    }
    let svd = b.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tolerance = sigma_max * b.nrows().max(b.ncols()) as f64 * f64::EPSILON;
    let effective_rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > tolerance)
        .count();
    let solution = svd
        .solve(target, tolerance)
        .map_err(|e| CoreError::Parse(format!("SVD solve failed: {e}")))?;
    let u_tilde = Vec4::new(solution[0], solution[1], solution[2], solution[3]);
    let residual = (b * &solution - target).norm();
    let target_norm = target.norm();
    let relative_residual = if target_norm > RELATIVE_ERROR_FLOOR {
        residual / target_norm
    } else {
        0.0
    };
    Ok(RecoveryResult {
        u_tilde,
        residual,
        relative_residual,
        singular_values: svd.singular_values.iter().copied().collect(),
        effective_rank,
        rank_deficient: effective_rank < b.ncols().min(b.nrows()),
        tolerance,
    })
}

/// Recovers the transformed input that best realizes a lifted input `U*`:
/// minimizes `|B(x) u - Bt U*|` over `u`.
pub fn recover_input(
    x: &QuadrotorState,
    u_star: &VecN,
    params: &QuadrotorParams,
    cfg: &LiftConfig,
) -> Result<RecoveryResult, CoreError> {
    if u_star.len() != cfg.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "U* has {} entries, lifted dimension is {}",
            u_star.len(),
            cfg.dim()
        )));
    }
    let b = assemble_b(x, params, cfg);
    let mask = b_selector_mask(cfg);
    let mut target = u_star.clone();
    for (value, keep) in target.iter_mut().zip(mask) {
        if !keep {
            *value = 0.0;
        }
    }
    least_squares_recover(&b, &target)
}

/// Numeric rank of a dense matrix with tolerance `sigma_max * dim * eps`.
pub fn numeric_rank(m: &MatN, ambient_dim: usize) -> (usize, Vec<f64>, f64) {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let tol = sigma_max * ambient_dim as f64 * f64::EPSILON;
    let rank = sv.iter().filter(|s| **s > tol).count();
    (rank, sv, tol)
}

/// Controllability-rank report.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub ambient_dim: usize,
    pub rank: usize,
    pub tolerance: f64,
    pub singular_values: Vec<f64>,
    /// Number of powers of `A` that contributed before the nilpotent chain
    /// vanished.
    pub powers_used: usize,
}

impl RankReport {
    pub fn is_controllable(&self) -> bool {
        self.rank == self.ambient_dim
    }
}

/// Dense-solver guard for the controllability test.
pub const CONTROLLABILITY_DIM_GUARD: usize = 1200;

/// Builds `[Bt, A Bt, A^2 Bt, ...]`, stopping as soon as a power of `A`
/// vanishes (the shift structure guarantees this within `max(n1, n2)`
/// powers).
pub fn controllability_blocks(a: &MatN, b: &MatN, max_powers: usize) -> Vec<MatN> {
    let mut blocks = vec![b.clone()];
    let mut current = b.clone();
    for _ in 0..max_powers {
        current = a * &current;
        if current.amax() == 0.0 {
            break;
        }
        blocks.push(current.clone());
    }
    blocks
}

fn hstack(blocks: &[MatN]) -> MatN {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = MatN::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Numeric rank of the controllability matrix of `(A, Bt)` for the given
/// configuration.
pub fn controllability_rank(cfg: &LiftConfig) -> Result<RankReport, CoreError> {
    cfg.validate()?;
    let n = cfg.dim();
    if n > CONTROLLABILITY_DIM_GUARD {
        return Err(CoreError::SizeGuard {
            size: n,
            limit: CONTROLLABILITY_DIM_GUARD,
        });
    }
    let a = assemble_a(cfg);
    let bt = b_selector(cfg);
    controllability_rank_with(&a, &bt, n, cfg.n1.max(cfg.n2))
}

/// Rank computation on explicit `(A, Bt)`; exposed for mutation checks.
pub fn controllability_rank_with(
    a: &MatN,
    bt: &MatN,
    ambient_dim: usize,
    max_powers: usize,
) -> Result<RankReport, CoreError> {
    if ambient_dim > CONTROLLABILITY_DIM_GUARD {
        return Err(CoreError::SizeGuard {
            size: ambient_dim,
            limit: CONTROLLABILITY_DIM_GUARD,
        });
    }
    let blocks = controllability_blocks(a, bt, max_powers);
    let c = hstack(&blocks);
    let (rank, singular_values, tolerance) = numeric_rank(&c, ambient_dim);
    Ok(RankReport {
        ambient_dim,
        rank,
        tolerance,
        singular_values,
        powers_used: blocks.len() - 1,
    })
}

/// Convergence/decay audit over random samples of the normalized velocity
/// envelope.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub samples_checked: usize,
    /// Samples outside the guaranteed domain, skipped with a warning.
    pub samples_excluded: usize,
    pub f_bound_violations: usize,
    pub g_bound_violations: usize,
    pub input_sum_bound_violations: usize,
    pub monotonicity_violations: usize,
    /// Largest `|f_k|` and `|vec(g_k)|` observed at the truncation depth.
    pub max_f_tail: f64,
    pub max_g_tail: f64,
    pub domain_violation: bool,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.f_bound_violations == 0
            && self.g_bound_violations == 0
            && self.input_sum_bound_violations == 0
            && self.monotonicity_violations == 0
    }
}

/// Checks the chain decay bounds over `n_samples` random normalized states
/// with `|w| <= omega_bar`, `|v| <= v_bar`, chains evaluated to `k_max`.
///
/// `input_bound` bounds the inertia-coupled torque magnitude; the audited
/// sum-term bound is `k |w|^(k-1) c |v|`. Samples outside the guaranteed
/// domain (`|w| >= 1/sqrt(2)` or `|v| >= 1`) are excluded and counted, not
/// failed.
pub fn convergence_audit(
    omega_bar: f64,
    v_bar: f64,
    n_samples: usize,
    k_max: usize,
    input_bound: f64,
    seed: u64,
) -> ConvergenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConvergenceReport {
        samples_checked: 0,
        samples_excluded: 0,
        f_bound_violations: 0,
        g_bound_violations: 0,
        input_sum_bound_violations: 0,
        monotonicity_violations: 0,
        max_f_tail: 0.0,
        max_g_tail: 0.0,
        domain_violation: false,
        warnings: Vec::new(),
    };
    if omega_bar >= std::f64::consts::FRAC_1_SQRT_2 || v_bar >= 1.0 {
        report.domain_violation = true;
        report.warnings.push(format!(
            "requested envelope (omega_bar {omega_bar}, v_bar {v_bar}) exceeds the guaranteed \
             domain (1/sqrt(2), 1); out-of-domain samples are excluded"
        ));
    }
    let slack = 1.0 + 1e-12;

    for _ in 0..n_samples {
        let w = random_ball(&mut rng, omega_bar);
        let v = random_ball(&mut rng, v_bar);
        if w.norm() >= std::f64::consts::FRAC_1_SQRT_2
            || v.norm() >= 1.0
            || w.norm() == 0.0
            || v.norm() == 0.0
        {
            report.samples_excluded += 1;
            continue;
        }
        report.samples_checked += 1;

        let torque = random_ball(&mut rng, input_bound);
        let wn = w.norm();
        let vn = v.norm();
        let wx = hat(&w);

        let mut w_pows = vec![crate::Mat3::identity()];
        for _ in 0..k_max {
            let next = w_pows.last().unwrap() * wx;
            w_pows.push(next);
        }

        let mut f = v;
        let mut prev_f = f.norm();
        let mut prev_g = g_chain_norm(&w, &v, 0);
        for k in 1..=k_max {
            f = w.cross(&f);
            let fk = f.norm();
            if fk > wn.powi(k as i32) * vn * slack {
                report.f_bound_violations += 1;
            }
            let gk = g_chain_norm(&w, &v, k);
            let g_bound =
                ((2.0 * wn.powi(2 * k as i32)) + (wn.powi(k as i32 - 1) * vn).powi(2)).sqrt();
            if gk > g_bound * slack {
                report.g_bound_violations += 1;
            }
            // Input-sum term of the f-chain derivative against its bound.
            let mut sum = Vec3::zeros();
            for i in 1..=k {
                sum += w_pows[i - 1] * torque.cross(&(w_pows[k - i] * v));
            }
            let sum_bound = k as f64 * wn.powi(k as i32 - 1) * input_bound * vn;
            if sum.norm() > sum_bound * slack + 1e-300 {
                report.input_sum_bound_violations += 1;
            }
            if fk >= prev_f || gk >= prev_g {
                report.monotonicity_violations += 1;
            }
            prev_f = fk;
            prev_g = gk;
            if k == k_max {
                report.max_f_tail = report.max_f_tail.max(fk);
                report.max_g_tail = report.max_g_tail.max(gk);
            }
        }
    }
    report
}

fn random_ball(rng: &mut impl Rng, radius: f64) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n <= 1.0 && n > 0.0 {
            return v * radius;
        }
    }
}

/// `|vec(g_k)|` for a unit-pose state with the given velocities.
fn g_chain_norm(w: &Vec3, v: &Vec3, k: usize) -> f64 {
    let s = twist(w, v);
    let h = Mat4::identity();
    vectorize(&(h * crate::se3::matrix_power(&s, k))).norm()
}

/// Per-time relative errors between two state sequences on the same grid.
#[derive(Debug, Clone)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    /// Relative position error; NaN where the reference norm is under the
    /// floor.
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub angles: Vec<f64>,
}

impl ErrorSeries {
    /// Errors at the sample closest to `t`.
    pub fn at_time(&self, t: f64) -> Option<(f64, f64, f64)> {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - t).abs().partial_cmp(&(*b - t).abs()).unwrap())?
            .0;
        Some((self.position[idx], self.velocity[idx], self.angles[idx]))
    }
}

fn relative_error(diff: f64, reference: f64) -> f64 {
    if reference > RELATIVE_ERROR_FLOOR {
        diff / reference
    } else {
        f64::NAN
    }
}

/// Relative approximation error `|a - b| / |b|` per sample for position,
/// velocity, and ZYX Euler angles; `a` is the candidate, `b` the reference.
pub fn approximation_error(
    times: &[f64],
    candidate: &[QuadrotorState],
    reference_times: &[f64],
    reference: &[QuadrotorState],
) -> Result<ErrorSeries, CoreError> {
    if times.len() != candidate.len()
        || reference_times.len() != reference.len()
        || times.len() != reference_times.len()
    {
        return Err(CoreError::DimensionMismatch(
            "error series needs equally long trajectories".into(),
        ));
    }
    if times
        .iter()
        .zip(reference_times)
        .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(CoreError::DimensionMismatch(
            "trajectories are not on the same time grid".into(),
        ));
    }
    let mut position = Vec::with_capacity(times.len());
    let mut velocity = Vec::with_capacity(times.len());
    let mut angles = Vec::with_capacity(times.len());
    for (a, b) in candidate.iter().zip(reference) {
        position.push(relative_error(
            (a.pose.p - b.pose.p).norm(),
            b.pose.p.norm(),
        ));
        velocity.push(relative_error(
            (a.velocity - b.velocity).norm(),
            b.velocity.norm(),
        ));
        let ea = euler_zyx(&a.pose.r).as_vector();
        let eb = euler_zyx(&b.pose.r).as_vector();
        angles.push(relative_error((ea - eb).norm(), eb.norm()));
    }
    Ok(ErrorSeries {
        times: times.to_vec(),
        position,
        velocity,
        angles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{observable_f, observable_g, BConstruction};
    use crate::se3::{rotation_exp, Pose};
    use approx::assert_relative_eq;

    fn sample_state(seed: u64) -> QuadrotorState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        QuadrotorState {
            pose: Pose {
                r: rotation_exp(&Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )),
                p: Vec3::new(1.0, -0.5, 2.0),
            },
            omega: Vec3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ),
            velocity: Vec3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            ),
        }
    }

    #[test]
    fn recovery_reproduces_consistent_targets() {
        let params = QuadrotorParams::default();
        let cfg = LiftConfig::raw(5, 5);
        let x = sample_state(1);
        let b = assemble_b(&x, &params, &cfg);
        let u0 = Vec4::new(0.3, -0.2, 0.15, 0.4);
        let u_star = &b * VecN::from_iterator(4, u0.iter().copied());
        let result = recover_input(&x, &u_star, &params, &cfg).unwrap();
        assert!(result.residual < 1e-10);
        assert!((result.u_tilde - u0).norm() < 1e-9);
        assert!(!result.rank_deficient);
    }

    #[test]
    fn recovery_of_zero_is_zero() {
        let params = QuadrotorParams::default();
        let cfg = LiftConfig::raw(3, 3);
        let x = sample_state(2);
        let result = recover_input(&x, &VecN::zeros(cfg.dim()), &params, &cfg).unwrap();
        assert_eq!(result.u_tilde, Vec4::zeros());
        assert_eq!(result.residual, 0.0);
        assert_eq!(result.relative_residual, 0.0);
    }

    #[test]
    fn recovery_is_a_least_squares_minimum() {
        let params = QuadrotorParams::default();
        let cfg = LiftConfig::raw(4, 4);
        let x = sample_state(3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let u_star = VecN::from_fn(cfg.dim(), |_, _| rng.random_range(-30.0..30.0));
        let result = recover_input(&x, &u_star, &params, &cfg).unwrap();

        let b = assemble_b(&x, &params, &cfg);
        let mask = b_selector_mask(&cfg);
        let mut target = u_star.clone();
        for (v, keep) in target.iter_mut().zip(mask) {
            if !keep {
                *v = 0.0;
            }
        }
        let objective = |u: &Vec4| {
            let prod = &b * VecN::from_iterator(4, u.iter().copied());
            (prod - &target).norm_squared()
        };
        let best = objective(&result.u_tilde);
        for _ in 0..100 {
            let delta = Vec4::new(
                rng.random_range(-1e-3..1e-3),
                rng.random_range(-1e-3..1e-3),
                rng.random_range(-1e-3..1e-3),
                rng.random_range(-1e-3..1e-3),
            );
            assert!(objective(&(result.u_tilde + delta)) >= best - 1e-9 * best.max(1.0));
        }
        // Normal-equations cross-check.
        let bt_b = b.transpose() * &b;
        let rhs = b.transpose() * &target;
        let u_vec = VecN::from_iterator(4, result.u_tilde.iter().copied());
        assert!((bt_b * u_vec - rhs).norm() < 1e-8 * (1.0 + target.norm()));
    }

    #[test]
    fn pseudo_inverse_satisfies_moore_penrose() {
        let params = QuadrotorParams::default();
        let cfg = LiftConfig {
            b_construction: BConstruction::ClosedForm,
            ..LiftConfig::raw(4, 3)
        };
        let x = sample_state(4);
        let b = assemble_b(&x, &params, &cfg);
        let pinv = b
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .expect("pinv");
        assert!(((&b * &pinv) * &b - &b).norm() < 1e-8);
    }

    #[test]
    fn flags_rank_deficiency() {
        // Two identical columns.
        let mut b = MatN::zeros(6, 4);
        for r in 0..6 {
            b[(r, 0)] = r as f64 + 1.0;
            b[(r, 1)] = r as f64 + 1.0;
            b[(r, 2)] = (r as f64).sin();
            b[(r, 3)] = (r as f64).cos();
        }
        let target = VecN::from_element(6, 1.0);
        let result = least_squares_recover(&b, &target).unwrap();
        assert!(result.rank_deficient);
        assert_eq!(result.effective_rank, 3);
    }

    #[test]
    fn controllability_is_full_rank_for_small_configs() {
        for (n1, n2, expected) in [(2usize, 2usize, 42usize), (3, 3, 61), (5, 5, 99)] {
            let report = controllability_rank(&LiftConfig::raw(n1, n2)).unwrap();
            assert_eq!(report.ambient_dim, expected);
            assert_eq!(report.rank, expected, "rank deficient at ({n1},{n2})");
            assert!(report.is_controllable());
            // The nilpotent chain dies quickly.
            assert!(report.powers_used <= n1.max(n2));
        }
        let normalized = LiftConfig::normalized(3, 3, 0.22, 0.27);
        assert!(controllability_rank(&normalized).unwrap().is_controllable());
    }

    #[test]
    fn zero_selector_has_rank_zero() {
        let cfg = LiftConfig::raw(2, 2);
        let a = assemble_a(&cfg);
        let zero = MatN::zeros(cfg.dim(), cfg.dim());
        let report = controllability_rank_with(&a, &zero, cfg.dim(), 2).unwrap();
        assert_eq!(report.rank, 0);
    }

    #[test]
    fn rank_grows_monotonically_with_powers() {
        let cfg = LiftConfig::raw(3, 4);
        let a = assemble_a(&cfg);
        let bt = b_selector(&cfg);
        let blocks = controllability_blocks(&a, &bt, 10);
        let mut prev = 0;
        for take in 1..=blocks.len() {
            let c = super::hstack(&blocks[..take]);
            let (rank, _, _) = numeric_rank(&c, cfg.dim());
            assert!(rank >= prev);
            prev = rank;
        }
        assert_eq!(prev, cfg.dim());
    }

    #[test]
    fn size_guard_rejects_huge_problems() {
        let cfg = LiftConfig::raw(80, 80); // dim 1524
        assert!(matches!(
            controllability_rank(&cfg),
            Err(CoreError::SizeGuard { .. })
        ));
    }

    #[test]
    fn audit_passes_on_the_guaranteed_domain() {
        let report = convergence_audit(0.6 / 2.0_f64.sqrt(), 0.9, 1000, 30, 2.0, 7);
        assert!(report.passed(), "{report:?}");
        assert!(!report.domain_violation);
        assert_eq!(report.samples_excluded, 0);
        assert!(report.max_f_tail < 1e-3);
        assert!(report.max_g_tail < 1e-3);
    }

    #[test]
    fn audit_reports_domain_violation_without_failing() {
        let report = convergence_audit(0.8, 0.9, 200, 10, 1.0, 11);
        assert!(report.domain_violation);
        assert!(!report.warnings.is_empty());
        assert!(report.samples_excluded > 0);
        assert!(report.passed(), "in-domain samples must still pass");
    }

    #[test]
    fn orthogonal_saturation_is_exact() {
        let cfg = LiftConfig::raw(2, 2);
        let w = Vec3::new(0.0, 0.0, 0.5);
        let v = Vec3::new(1.0, 0.0, 0.0);
        for k in 0..=10 {
            assert_relative_eq!(
                observable_f(&w, &v, k, &cfg).norm(),
                0.5_f64.powi(k as i32),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn identical_trajectories_have_zero_error() {
        let times: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let states: Vec<QuadrotorState> = (0..10).map(|i| sample_state(i as u64)).collect();
        let es = approximation_error(&times, &states, &times, &states).unwrap();
        assert!(es.position.iter().all(|e| *e == 0.0));
        assert!(es.velocity.iter().all(|e| *e == 0.0));
        assert!(es.angles.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn uniform_perturbation_gives_matching_relative_error() {
        let times = vec![0.0, 1.0];
        let base = QuadrotorState {
            pose: Pose {
                r: rotation_exp(&Vec3::new(0.1, 0.2, 0.3)),
                p: Vec3::new(1.0, 2.0, 2.0),
            },
            omega: Vec3::new(0.1, 0.0, 0.0),
            velocity: Vec3::new(0.3, 0.4, 0.0),
        };
        let mut perturbed = base;
        perturbed.pose.p *= 1.01;
        perturbed.velocity *= 1.01;
        let es =
            approximation_error(&times, &[perturbed, perturbed], &times, &[base, base]).unwrap();
        assert_relative_eq!(es.position[0], 0.01, max_relative = 1e-10);
        assert_relative_eq!(es.velocity[0], 0.01, max_relative = 1e-10);
    }

    #[test]
    fn undefined_errors_are_nan() {
        let times = vec![0.0];
        let a = QuadrotorState {
            velocity: Vec3::new(0.1, 0.0, 0.0),
            ..QuadrotorState::rest()
        };
        let b = QuadrotorState::rest(); // zero position, velocity, angles
        let es = approximation_error(&times, &[a], &times, &[b]).unwrap();
        assert!(es.position[0].is_nan());
        assert!(es.velocity[0].is_nan());
        assert!(es.angles[0].is_nan());
    }

    #[test]
    fn position_error_is_frame_invariant() {
        let times = vec![0.0];
        let q = rotation_exp(&Vec3::new(0.3, -0.5, 0.8));
        let mut a = sample_state(31);
        let mut b = sample_state(32);
        let es1 = approximation_error(&times, &[a], &times, &[b]).unwrap();
        a.pose.p = q * a.pose.p;
        b.pose.p = q * b.pose.p;
        a.pose.r = q * a.pose.r;
        b.pose.r = q * b.pose.r;
        let es2 = approximation_error(&times, &[a], &times, &[b]).unwrap();
        assert_relative_eq!(es1.position[0], es2.position[0], max_relative = 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = vec![QuadrotorState::rest()];
        assert!(approximation_error(&[0.0], &a, &[0.5], &a).is_err());
    }

    #[test]
    fn audit_g_chain_norm_matches_public_observable() {
        let cfg = LiftConfig::raw(4, 4);
        let w = Vec3::new(0.2, -0.3, 0.4);
        let v = Vec3::new(0.5, 0.1, -0.2);
        let x = QuadrotorState {
            pose: Pose::identity(),
            omega: w,
            velocity: v,
        };
        for k in 0..6 {
            let via_audit = g_chain_norm(&w, &v, k);
            let via_obs = vectorize(&observable_g(&x, k, &cfg)).norm();
            assert_relative_eq!(via_audit, via_obs, max_relative = 1e-13);
        }
    }
}
