//! Data-driven comparison model: an 18-observable dictionary with a
//! discrete-time linear fit (extended DMD with control).
//!
//! The dictionary stacks a constant gravity vector, the body velocities,
//! and nine quadratic velocity products. Both transition matrices are fit
//! by least squares from snapshot data; prediction free-runs the fitted
//! system and reconstructs attitude and position by integrating the
//! predicted velocities.

use crate::dynamics::{QuadrotorState, Trajectory};
use crate::error::CoreError;
use crate::se3::{rotation_exp, Pose};
use crate::{Mat3, MatN, Vec3, Vec4, VecN};

/// Dictionary length.
pub const BASELINE_DIM: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factor {
    /// Velocity component (0-based).
    V(usize),
    /// Angular-velocity component (0-based).
    W(usize),
}

/// The ninth quadratic slot: the printed dictionary lists eight products
/// for a nine-entry block, so the last one is chosen to complete the
/// `v_i w_j` pattern.
const NINTH_PRODUCT: (Factor, Factor) = (Factor::V(0), Factor::W(1));

/// Quadratic products of the dictionary, in storage order.
const QUADRATIC_PRODUCTS: [(Factor, Factor); 9] = [
    (Factor::V(2), Factor::W(2)),
    (Factor::V(1), Factor::W(2)),
    (Factor::V(2), Factor::W(0)),
    (Factor::V(0), Factor::W(2)),
    (Factor::V(1), Factor::W(0)),
    (Factor::W(1), Factor::W(2)),
    (Factor::W(0), Factor::W(2)),
    (Factor::W(0), Factor::W(1)),
    NINTH_PRODUCT,
];

fn factor_value(f: Factor, x: &QuadrotorState) -> f64 {
    match f {
        Factor::V(i) => x.velocity[i],
        Factor::W(i) => x.omega[i],
    }
}

/// Evaluates the dictionary `[a_g, w, v, quadratics]` at a state. `gravity`
/// sets the constant vector `a_g = (0, 0, -g)`.
pub fn lift_baseline(x: &QuadrotorState, gravity: f64) -> VecN {
    let mut z = VecN::zeros(BASELINE_DIM);
    z[2] = -gravity;
    for i in 0..3 {
        z[3 + i] = x.omega[i];
        z[6 + i] = x.velocity[i];
    }
    for (slot, (a, b)) in QUADRATIC_PRODUCTS.iter().enumerate() {
        z[9 + slot] = factor_value(*a, x) * factor_value(*b, x);
    }
    z
}

/// Discrete-time fit `z' = A_d z + B_d u` with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub a_d: MatN,
    pub b_d: MatN,
    /// `||Z' - A_d Z - B_d U||_F` over the training snapshots.
    pub residual: f64,
    /// Condition number of the stacked regressor.
    pub condition: f64,
    pub regressor_rank: usize,
}

/// Snapshot matrices `(Z, Z', U)` from a trajectory: columns are
/// consecutive dictionary evaluations and the inputs held between them.
pub fn snapshots_from_trajectory(traj: &Trajectory, gravity: f64) -> (MatN, MatN, MatN) {
    let m = traj.len().saturating_sub(1);
    let mut z = MatN::zeros(BASELINE_DIM, m);
    let mut z_next = MatN::zeros(BASELINE_DIM, m);
    let mut u = MatN::zeros(4, m);
    for k in 0..m {
        z.set_column(k, &lift_baseline(&traj.states[k], gravity));
        z_next.set_column(k, &lift_baseline(&traj.states[k + 1], gravity));
        for r in 0..4 {
            u[(r, k)] = traj.inputs[k].0[r];
        }
    }
    (z, z_next, u)
}

/// Least-squares fit of `[A_d, B_d] = Z' [Z; U]^+`, optionally ridge
/// regularized. Needs at least as many snapshot pairs as unknowns per row.
///
/// With `ridge == 0` a rank-deficient regressor is an error; a positive
/// ridge makes the problem well-posed (the dictionary's constant block
/// yields structurally zero rows on real data), and the regressor rank and
/// condition stay visible in the result.
pub fn fit_edmdc(
    z: &MatN,
    z_next: &MatN,
    u: &MatN,
    ridge: f64,
) -> Result<FitResult, CoreError> {
    let m = z.ncols();
    let rows = z.nrows() + u.nrows();
    if z_next.ncols() != m || u.ncols() != m || z_next.nrows() != z.nrows() {
        return Err(CoreError::DimensionMismatch(
            "snapshot matrices must have matching shapes".into(),
        ));
    }
    if m < rows {
        return Err(CoreError::NotEnoughSnapshots { got: m, need: rows });
    }
    let mut g = MatN::zeros(rows, m);
    g.view_mut((0, 0), (z.nrows(), m)).copy_from(z);
    g.view_mut((z.nrows(), 0), (u.nrows(), m)).copy_from(u);

    let svd = g.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let sigma_min = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let tol = sigma_max * m.max(rows) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let condition = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    if rank < rows && ridge == 0.0 {
        return Err(CoreError::RankDeficient {
            rank,
            expected: rows,
            condition,
        });
    }

    // [A B] = Z' G^T (G G^T + ridge I)^-1; ridge 0 reduces to the
    // pseudo-inverse solution on a full-rank regressor.
    let ggt = &g * g.transpose() + MatN::identity(rows, rows) * ridge;
    let zgt = z_next * g.transpose();
    let ggt_inv = ggt
        .try_inverse()
        .ok_or_else(|| CoreError::Parse("normal matrix inversion failed".into()))?;
    let ab = zgt * ggt_inv;
    let a_d = ab.view((0, 0), (z.nrows(), z.nrows())).into_owned();
    let b_d = ab.view((0, z.nrows()), (z.nrows(), u.nrows())).into_owned();
    let residual = (z_next - &a_d * z - &b_d * u).norm();
    Ok(FitResult {
        a_d,
        b_d,
        residual,
        condition,
        regressor_rank: rank,
    })
}

/// Free-runs the fitted system from `z0` under the given input sequence;
/// returns one dictionary state per step, including the start.
pub fn predict_baseline(fit: &FitResult, z0: &VecN, inputs: &[Vec4]) -> Vec<VecN> {
    let mut out = Vec::with_capacity(inputs.len() + 1);
    let mut z = z0.clone();
    out.push(z.clone());
    for u in inputs {
        let u_vec = VecN::from_iterator(4, u.iter().copied());
        z = &fit.a_d * &z + &fit.b_d * u_vec;
        out.push(z.clone());
    }
    out
}

/// Physical-state reconstruction from predicted dictionary states: `w` and
/// `v` are read out directly, attitude integrates the predicted angular
/// velocity through the exponential map (midpoint rule), and position
/// integrates the predicted velocity through the reconstructed attitude
/// (trapezoid).
pub fn reconstruct_states(
    predicted: &[VecN],
    dt: f64,
    r0: Mat3,
    p0: Vec3,
) -> Vec<QuadrotorState> {
    let read = |z: &VecN| {
        (
            Vec3::new(z[3], z[4], z[5]),
            Vec3::new(z[6], z[7], z[8]),
        )
    };
    let mut out = Vec::with_capacity(predicted.len());
    let (w0, v0) = read(&predicted[0]);
    out.push(QuadrotorState {
        pose: Pose { r: r0, p: p0 },
        omega: w0,
        velocity: v0,
    });
    for k in 1..predicted.len() {
        let (w_prev, v_prev) = read(&predicted[k - 1]);
        let (w_k, v_k) = read(&predicted[k]);
        let prev = &out[k - 1];
        let r = prev.pose.r * rotation_exp(&(0.5 * dt * (w_prev + w_k)));
        let p = prev.pose.p + 0.5 * dt * (prev.pose.r * v_prev + r * v_k);
        out.push(QuadrotorState {
            pose: Pose { r, p },
            omega: w_k,
            velocity: v_k,
        });
    }
    out
}
