//! The lifted linear model built from analytically derived observable chains.
//!
//! Observables: matrix chain `g_k = h S^k` (pose times twist powers) and
//! vector chain `f_k = w^(xk) v` (iterated cross products). Stacked as
//!
//! ```text
//! X = [w, (v)_3, vec(g_0), ..., vec(g_{N1-1}), f_0, ..., f_{N2-1}]
//! ```
//!
//! the state obeys `X' = A X + B(x) u` with a constant block-shift `A`
//! (nilpotent) and a state-dependent input matrix `B`. The normalized
//! variant rescales the chains by constants chosen from the operating
//! envelope so the chain magnitudes decay even for speeds above the
//! unnormalized convergence region.
//!
//! `B` can be assembled two independent ways: `Columnwise` evaluates the
//! defining block expressions on basis inputs (the authoritative route),
//! `ClosedForm` uses the factored state-dependent expression (faster, and a
//! fidelity cross-check of the underlying product identities).

use crate::dynamics::{QuadrotorParams, QuadrotorState};
use crate::error::CoreError;
use crate::se3::{hat, matrix_power, orthogonality_defect, polar_rotation, twist, Pose};
use crate::signal::InputSignal;
use crate::{Mat3, Mat4, MatN, Vec3, Vec4, VecN};

/// How the state-dependent input matrix is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BConstruction {
    /// Evaluate each block's defining expression at unit inputs.
    Columnwise,
    /// Factored closed form (binomial cross-product expansion plus a
    /// Kronecker identity for the matrix blocks).
    ClosedForm,
}

/// How the commanded torque couples into the chain blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputCoupling {
    /// `w' = J^-1 ub`, consistent with the head dynamics (default).
    InertiaInverse,
    /// Literal `J ub` coupling, kept for comparison runs.
    InertiaLiteral,
}

/// Truncation orders, normalization constants, and assembly options.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftConfig {
    /// Number of retained matrix observables (g-chain length), at least 1.
    pub n1: usize,
    /// Number of retained vector observables (f-chain length), at least 1.
    pub n2: usize,
    /// Use the normalized chains.
    pub normalized: bool,
    /// Angular-rate normalization constant; must exceed `sqrt(2) max|w|`
    /// over the intended envelope when `normalized` is set.
    pub omega0: f64,
    /// Velocity normalization constant; must exceed `max|v|` likewise.
    pub v0: f64,
    pub b_construction: BConstruction,
    /// Swap the normalized chain-shift coefficients (comparison only; the
    /// derived pairing scales the g-chain by `s0` and the f-chain by
    /// `omega0`).
    pub paper_literal_scaling: bool,
    pub input_coupling: InputCoupling,
}

impl LiftConfig {
    /// Unnormalized chains of the given lengths.
    pub fn raw(n1: usize, n2: usize) -> Self {
        LiftConfig {
            n1,
            n2,
            normalized: false,
            omega0: 1.0,
            v0: 1.0,
            b_construction: BConstruction::Columnwise,
            paper_literal_scaling: false,
            input_coupling: InputCoupling::InertiaInverse,
        }
    }

    /// Normalized chains with explicit constants.
    pub fn normalized(n1: usize, n2: usize, omega0: f64, v0: f64) -> Self {
        LiftConfig {
            normalized: true,
            omega0,
            v0,
            ..LiftConfig::raw(n1, n2)
        }
    }

    /// Normalized chains with constants chosen 25% above the strict bounds
    /// for the given envelope of angular and linear speed.
    pub fn normalized_for_envelope(n1: usize, n2: usize, max_omega: f64, max_v: f64) -> Self {
        LiftConfig::normalized(n1, n2, 1.25 * 2.0_f64.sqrt() * max_omega, 1.25 * max_v)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n1 < 1 || self.n2 < 1 {
            return Err(CoreError::InvalidParameter(
                "chain lengths n1, n2 must be at least 1".into(),
            ));
        }
        if self.normalized && !(self.omega0 > 0.0 && self.v0 > 0.0 && self.omega0.is_finite() && self.v0.is_finite()) {
            return Err(CoreError::InvalidParameter(
                "normalization constants must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Twist normalization constant `s0 = max(omega0, v0)`.
    pub fn s0(&self) -> f64 {
        self.omega0.max(self.v0)
    }

    /// Lifted dimension `16 n1 + 3 n2 + 4`.
    pub fn dim(&self) -> usize {
        16 * self.n1 + 3 * self.n2 + 4
    }

    /// Offset of `vec(g_k)` in the lifted state.
    pub fn g_offset(&self, k: usize) -> usize {
        debug_assert!(k < self.n1);
        4 + 16 * k
    }

    /// Offset of `f_k` in the lifted state.
    pub fn f_offset(&self, k: usize) -> usize {
        debug_assert!(k < self.n2);
        4 + 16 * self.n1 + 3 * k
    }

    /// Coefficient coupling `vec(g_k)' -> vec(g_{k+1})`.
    pub fn g_shift_coeff(&self) -> f64 {
        if !self.normalized {
            1.0
        } else if self.paper_literal_scaling {
            self.omega0
        } else {
            self.s0()
        }
    }

    /// Magnitude of the coefficient coupling `f_k' -> -f_{k+1}`.
    pub fn f_shift_coeff(&self) -> f64 {
        if !self.normalized {
            1.0
        } else if self.paper_literal_scaling {
            self.s0()
        } else {
            self.omega0
        }
    }

    /// Scale dividing the raw `g_k` observable.
    fn g_scale(&self, k: usize) -> f64 {
        if self.normalized {
            self.s0().powi(k as i32)
        } else {
            1.0
        }
    }

    /// Scale dividing the raw `f_k` observable.
    fn f_scale(&self, k: usize) -> f64 {
        if self.normalized {
            self.omega0.powi(k as i32) * self.v0
        } else {
            1.0
        }
    }
}

/// Velocity envelope on which the chain-decay guarantees hold:
/// `|w| <= omega_bar < 1/sqrt(2)` and `|v| <= v_bar < 1` (normalized
/// coordinates when the configuration is normalized).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    omega_bar: f64,
    v_bar: f64,
}

impl DomainBounds {
    pub fn new(omega_bar: f64, v_bar: f64) -> Result<Self, CoreError> {
        if !(omega_bar > 0.0 && omega_bar < std::f64::consts::FRAC_1_SQRT_2) {
            return Err(CoreError::InvalidParameter(format!(
                "omega_bar must lie in (0, 1/sqrt(2)), got {omega_bar}"
            )));
        }
        if !(v_bar > 0.0 && v_bar < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "v_bar must lie in (0, 1), got {v_bar}"
            )));
        }
        Ok(DomainBounds { omega_bar, v_bar })
    }

    /// The envelope exercised by the decay checks: `0.6/sqrt(2)` and `0.9`.
    pub fn decay_test_default() -> Self {
        DomainBounds {
            omega_bar: 0.6 * std::f64::consts::FRAC_1_SQRT_2,
            v_bar: 0.9,
        }
    }

    pub fn omega_bar(&self) -> f64 {
        self.omega_bar
    }

    pub fn v_bar(&self) -> f64 {
        self.v_bar
    }

    pub fn contains(&self, omega_hat: &Vec3, v_hat: &Vec3) -> bool {
        omega_hat.norm() <= self.omega_bar && v_hat.norm() <= self.v_bar
    }
}

/// Matrix observable `g_k = h S^k` (normalized: `h (S/s0)^k`), computed by
/// repeated multiplication.
pub fn observable_g(x: &QuadrotorState, k: usize, cfg: &LiftConfig) -> Mat4 {
    let h = x.pose.homogeneous();
    let mut s = twist(&x.omega, &x.velocity);
    if cfg.normalized {
        s /= cfg.s0();
    }
    h * matrix_power(&s, k)
}

/// Vector observable `f_k = w^(xk) v` (normalized: built from `w/omega0`
/// and `v/v0`).
pub fn observable_f(omega: &Vec3, velocity: &Vec3, k: usize, cfg: &LiftConfig) -> Vec3 {
    let (w, mut f) = if cfg.normalized {
        (omega / cfg.omega0, velocity / cfg.v0)
    } else {
        (*omega, *velocity)
    };
    for _ in 0..k {
        f = w.cross(&f);
    }
    f
}

/// A point in the lifted space.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState(pub VecN);

impl LiftedState {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn omega(&self) -> Vec3 {
        Vec3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn v3(&self) -> f64 {
        self.0[3]
    }

    /// The `g_k` block reshaped to its 4x4 matrix form (column-major).
    pub fn g_block(&self, k: usize, cfg: &LiftConfig) -> Mat4 {
        let off = cfg.g_offset(k);
        Mat4::from_column_slice(self.0.as_slice().get(off..off + 16).expect("block in range"))
    }

    pub fn f_block(&self, k: usize, cfg: &LiftConfig) -> Vec3 {
        let off = cfg.f_offset(k);
        Vec3::new(self.0[off], self.0[off + 1], self.0[off + 2])
    }
}

/// Writes a 4x4 block column-major into `dst`.
fn write_mat4(dst: &mut [f64], m: &Mat4) {
    for (slot, value) in dst.iter_mut().zip(m.iter()) {
        *slot = *value;
    }
}

/// Lifts a state into the observable coordinates.
pub fn lift(x: &QuadrotorState, cfg: &LiftConfig) -> LiftedState {
    let mut out = VecN::zeros(cfg.dim());
    out[0] = x.omega.x;
    out[1] = x.omega.y;
    out[2] = x.omega.z;
    out[3] = x.velocity.z;

    // g-chain by running product; equals h*(S/s)^k without re-powering.
    let h = x.pose.homogeneous();
    let mut s = twist(&x.omega, &x.velocity);
    if cfg.normalized {
        s /= cfg.s0();
    }
    let mut g = h;
    for k in 0..cfg.n1 {
        let off = cfg.g_offset(k);
        write_mat4(&mut out.as_mut_slice()[off..off + 16], &g);
        if k + 1 < cfg.n1 {
            g *= s;
        }
    }

    let (w, mut f) = if cfg.normalized {
        (x.omega / cfg.omega0, x.velocity / cfg.v0)
    } else {
        (x.omega, x.velocity)
    };
    for k in 0..cfg.n2 {
        let off = cfg.f_offset(k);
        out[off] = f.x;
        out[off + 1] = f.y;
        out[off + 2] = f.z;
        if k + 1 < cfg.n2 {
            f = w.cross(&f);
        }
    }
    LiftedState(out)
}

/// Diagnostics from reading a physical state back out of a lifted vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnliftReport {
    /// `||R^T R - I||_F` of the raw pose block before any projection.
    pub rotation_defect: f64,
    /// Whether the rotation was replaced by its nearest orthonormal factor.
    pub projected: bool,
    /// Deviation of the pose block's last row from `(0, 0, 0, 1)`.
    pub bottom_row_defect: f64,
}

/// Reads the physical state out of a lifted vector: angular velocity and
/// vertical speed from the head, pose from the `g_0` block, lateral
/// velocity from the `f_0` block.
///
/// A pose block that drifted off the orthonormal manifold is projected back
/// (nearest rotation) and the defect reported; a degenerate block is an
/// error.
pub fn unlift(
    lifted: &LiftedState,
    cfg: &LiftConfig,
) -> Result<(QuadrotorState, UnliftReport), CoreError> {
    if lifted.dim() != cfg.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "lifted state has {} entries, config expects {}",
            lifted.dim(),
            cfg.dim()
        )));
    }
    let g0 = lifted.g_block(0, cfg);
    let r_raw: Mat3 = g0.fixed_view::<3, 3>(0, 0).into_owned();
    let bottom = Vec4::new(g0[(3, 0)], g0[(3, 1)], g0[(3, 2)], g0[(3, 3)] - 1.0);
    let rotation_defect = orthogonality_defect(&r_raw);
    let (r, projected) = if rotation_defect <= 1e-12 {
        (r_raw, false)
    } else {
        let (r, _) = polar_rotation(&r_raw)?;
        (r, true)
    };
    let p = Vec3::new(g0[(0, 3)], g0[(1, 3)], g0[(2, 3)]);
    let f0 = lifted.f_block(0, cfg);
    let v_scale = if cfg.normalized { cfg.v0 } else { 1.0 };
    let state = QuadrotorState {
        pose: Pose { r, p },
        omega: lifted.omega(),
        velocity: Vec3::new(v_scale * f0.x, v_scale * f0.y, lifted.v3()),
    };
    Ok((
        state,
        UnliftReport {
            rotation_defect,
            projected,
            bottom_row_defect: bottom.norm(),
        },
    ))
}

/// [`unlift`] that refuses pose blocks with orthonormality defect beyond
/// `tol` (use where the lifted vector is expected to be an exact lift).
pub fn unlift_strict(
    lifted: &LiftedState,
    cfg: &LiftConfig,
    tol: f64,
) -> Result<(QuadrotorState, UnliftReport), CoreError> {
    let (state, report) = unlift(lifted, cfg)?;
    if report.rotation_defect > tol {
        return Err(CoreError::DegeneratePose(format!(
            "pose-block orthonormality defect {:.3e} exceeds {:.1e}",
            report.rotation_defect, tol
        )));
    }
    Ok((state, report))
}

/// Constant dynamics matrix: block-diagonal with shift structure on both
/// chains (nilpotent; the head block is zero since the head is input-driven
/// only).
pub fn assemble_a(cfg: &LiftConfig) -> MatN {
    let n = cfg.dim();
    let mut a = MatN::zeros(n, n);
    let cg = cfg.g_shift_coeff();
    for k in 0..cfg.n1.saturating_sub(1) {
        let row = cfg.g_offset(k);
        let col = cfg.g_offset(k + 1);
        for i in 0..16 {
            a[(row + i, col + i)] = cg;
        }
    }
    let cf = cfg.f_shift_coeff();
    for k in 0..cfg.n2.saturating_sub(1) {
        let row = cfg.f_offset(k);
        let col = cfg.f_offset(k + 1);
        for i in 0..3 {
            a[(row + i, col + i)] = -cf;
        }
    }
    a
}

/// `A X` using the shift structure directly (no dense product).
pub fn apply_a(x: &VecN, cfg: &LiftConfig) -> VecN {
    let mut out = VecN::zeros(cfg.dim());
    let cg = cfg.g_shift_coeff();
    for k in 0..cfg.n1.saturating_sub(1) {
        let row = cfg.g_offset(k);
        let col = cfg.g_offset(k + 1);
        for i in 0..16 {
            out[row + i] = cg * x[col + i];
        }
    }
    let cf = cfg.f_shift_coeff();
    for k in 0..cfg.n2.saturating_sub(1) {
        let row = cfg.f_offset(k);
        let col = cfg.f_offset(k + 1);
        for i in 0..3 {
            out[row + i] = -cf * x[col + i];
        }
    }
    out
}

/// Input selector for the transformed lifted input: identity on the head
/// and on every chain block that receives input, zero on `g_0` and `f_0`.
pub fn b_selector(cfg: &LiftConfig) -> MatN {
    let n = cfg.dim();
    let mut b = MatN::zeros(n, n);
    for (i, on) in b_selector_mask(cfg).into_iter().enumerate() {
        if on {
            b[(i, i)] = 1.0;
        }
    }
    b
}

/// Diagonal of [`b_selector`] as a mask.
pub fn b_selector_mask(cfg: &LiftConfig) -> Vec<bool> {
    let mut mask = vec![false; cfg.dim()];
    mask[..4].fill(true);
    for k in 1..cfg.n1 {
        let off = cfg.g_offset(k);
        mask[off..off + 16].fill(true);
    }
    for k in 1..cfg.n2 {
        let off = cfg.f_offset(k);
        mask[off..off + 3].fill(true);
    }
    mask
}

/// The torque-coupling matrix selected by the configuration.
fn coupling_matrix(params: &QuadrotorParams, cfg: &LiftConfig) -> Mat3 {
    match cfg.input_coupling {
        InputCoupling::InertiaInverse => params.inertia_inv(),
        InputCoupling::InertiaLiteral => params.inertia,
    }
}

/// Head block of `B`: `bdiag(J^-1, 1)` routing the transformed input into
/// the head derivatives.
fn write_head_block(b: &mut MatN, params: &QuadrotorParams) {
    let jinv = params.inertia_inv();
    for r in 0..3 {
        for c in 0..3 {
            b[(r, c)] = jinv[(r, c)];
        }
    }
    b[(3, 3)] = 1.0;
}

/// State-dependent input matrix `B(x)` (N x 4), built per the configured
/// construction mode.
pub fn assemble_b(x: &QuadrotorState, params: &QuadrotorParams, cfg: &LiftConfig) -> MatN {
    match cfg.b_construction {
        BConstruction::Columnwise => assemble_b_columnwise(x, params, cfg),
        BConstruction::ClosedForm => assemble_b_closed_form(x, params, cfg),
    }
}

/// Authoritative route: each column is the defining block expression
/// evaluated at a unit input, with the twist rate built from
/// `w' = E e_j` and `(v')_3 = (e_j)_4`.
pub fn assemble_b_columnwise(
    x: &QuadrotorState,
    params: &QuadrotorParams,
    cfg: &LiftConfig,
) -> MatN {
    let n = cfg.dim();
    let mut b = MatN::zeros(n, 4);
    write_head_block(&mut b, params);

    let coupling = coupling_matrix(params, cfg);
    let h = x.pose.homogeneous();
    let s = twist(&x.omega, &x.velocity);
    let mut s_pows: Vec<Mat4> = Vec::with_capacity(cfg.n1);
    s_pows.push(Mat4::identity());
    for _ in 1..cfg.n1 {
        let next = s_pows.last().unwrap() * s;
        s_pows.push(next);
    }

    let wx = hat(&x.omega);
    let mut w_pows: Vec<Mat3> = Vec::with_capacity(cfg.n2);
    w_pows.push(Mat3::identity());
    for _ in 1..cfg.n2 {
        let next = w_pows.last().unwrap() * wx;
        w_pows.push(next);
    }

    for j in 0..4 {
        let (w_dot, v_dot) = if j < 3 {
            (Vec3::from(coupling.column(j)), Vec3::zeros())
        } else {
            (Vec3::zeros(), Vec3::z())
        };
        let s_dot = twist(&w_dot, &v_dot);

        for k in 1..cfg.n1 {
            let mut sum = Mat4::zeros();
            for i in 1..=k {
                sum += s_pows[i - 1] * s_dot * s_pows[k - i];
            }
            let block = (h * sum) / cfg.g_scale(k);
            let off = cfg.g_offset(k);
            for (idx, value) in block.iter().enumerate() {
                b[(off + idx, j)] = *value;
            }
        }

        if j < 3 {
            for k in 1..cfg.n2 {
                let mut sum = Vec3::zeros();
                for i in 1..=k {
                    let tail = w_pows[k - i] * x.velocity;
                    sum += w_pows[i - 1] * w_dot.cross(&tail);
                }
                let off = cfg.f_offset(k);
                let scaled = sum / cfg.f_scale(k);
                b[(off, j)] = scaled.x;
                b[(off + 1, j)] = scaled.y;
                b[(off + 2, j)] = scaled.z;
            }
        }
    }
    b
}

/// Constant 9x4 matrix with `vec(hat(ub)) = C3 u` (the fourth input channel
/// does not enter the hat map).
pub fn c3_matrix() -> nalgebra::SMatrix<f64, 9, 4> {
    let mut c3 = nalgebra::SMatrix::<f64, 9, 4>::zeros();
    for j in 0..3 {
        let m = hat(&Vec3::ith(j, 1.0));
        for (idx, value) in m.iter().enumerate() {
            c3[(idx, j)] = *value;
        }
    }
    c3
}

/// Exact binomial coefficient as f64 (small arguments only).
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Matrix `M` with `M a = sum_{i=1..m} w^(x(i-1)) hat(a) w^(x(m-i)) v`,
/// expanded through the binomial identity for `(w^(xm) v)^x`.
fn cross_chain_matrix(w_pows: &[Mat3], v: &Vec3, m: usize) -> Mat3 {
    let vx = hat(v);
    let mut out = Mat3::zeros();
    for alpha in 0..m {
        let sign = if (m - alpha).is_multiple_of(2) { 1.0 } else { -1.0 };
        out += sign * binomial(m, alpha) * w_pows[alpha] * vx * w_pows[m - 1 - alpha];
    }
    out
}

/// Closed-form route: Kronecker-factored rotation blocks and the binomial
/// cross-product expansion for the velocity-coupled parts.
pub fn assemble_b_closed_form(
    x: &QuadrotorState,
    params: &QuadrotorParams,
    cfg: &LiftConfig,
) -> MatN {
    let n = cfg.dim();
    let mut b = MatN::zeros(n, 4);
    write_head_block(&mut b, params);

    let coupling = coupling_matrix(params, cfg);
    let r = x.pose.r;
    let wx = hat(&x.omega);
    let max_pow = cfg.n1.max(cfg.n2);
    let mut w_pows: Vec<Mat3> = Vec::with_capacity(max_pow);
    w_pows.push(Mat3::identity());
    for _ in 1..max_pow {
        let next = w_pows.last().unwrap() * wx;
        w_pows.push(next);
    }
    // vec(hat(E ub)) = C3' ub, the hat map composed with the coupling.
    let mut c3_coupled = nalgebra::SMatrix::<f64, 9, 3>::zeros();
    for j in 0..3 {
        let m = hat(&Vec3::from(coupling.column(j)));
        for (idx, value) in m.iter().enumerate() {
            c3_coupled[(idx, j)] = *value;
        }
    }

    for k in 1..cfg.n1 {
        // Rotation part: vec(R w^(x(i-1)) hat(.) w^(x(k-i))) via
        // kron(transpose of the right factor, left factor).
        let mut kron_sum = nalgebra::SMatrix::<f64, 9, 9>::zeros();
        for i in 1..=k {
            let left: Mat3 = r * w_pows[i - 1];
            let right_t: Mat3 = w_pows[k - i].transpose();
            kron_sum += right_t.kronecker(&left);
        }
        let ul = kron_sum * c3_coupled; // 9 x 3, torque channels only
        let scale = cfg.g_scale(k);
        let off = cfg.g_offset(k);
        for j in 0..3 {
            for c in 0..3 {
                for rr in 0..3 {
                    b[(off + c * 4 + rr, j)] = ul[(c * 3 + rr, j)] / scale;
                }
            }
        }
        // Translation column of the block: the cross-chain matrix catches
        // the torque channels, the twist-rate's velocity slot the fourth.
        let lc_torque: Mat3 = r * cross_chain_matrix(&w_pows, &x.velocity, k - 1) * coupling;
        for j in 0..3 {
            for rr in 0..3 {
                b[(off + 12 + rr, j)] = lc_torque[(rr, j)] / scale;
            }
        }
        let lc_accel: Vec3 = r * (w_pows[k - 1] * Vec3::z());
        for rr in 0..3 {
            b[(off + 12 + rr, 3)] = lc_accel[rr] / scale;
        }
    }

    for k in 1..cfg.n2 {
        let block: Mat3 = cross_chain_matrix(&w_pows, &x.velocity, k) * coupling;
        let off = cfg.f_offset(k);
        let scale = cfg.f_scale(k);
        for j in 0..3 {
            for rr in 0..3 {
                b[(off + rr, j)] = block[(rr, j)] / scale;
            }
        }
    }
    b
}

/// Constant and selector matrices of the lifted model, bundled with the
/// configuration that assembles the state-dependent input matrix.
#[derive(Debug, Clone)]
pub struct LiftedModel {
    pub cfg: LiftConfig,
    pub a: MatN,
    pub b_tilde: MatN,
}

impl LiftedModel {
    pub fn new(cfg: LiftConfig) -> Result<Self, CoreError> {
        cfg.validate()?;
        let a = assemble_a(&cfg);
        let b_tilde = b_selector(&cfg);
        Ok(LiftedModel { cfg, a, b_tilde })
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim()
    }

    /// `B(x)` for this model's configuration.
    pub fn input_matrix(&self, x: &QuadrotorState, params: &QuadrotorParams) -> MatN {
        assemble_b(x, params, &self.cfg)
    }
}

/// Right-hand side `A X + B(x) u` of the lifted dynamics.
pub fn lifted_rhs(
    lifted: &LiftedState,
    u: &Vec4,
    cfg: &LiftConfig,
    x_for_b: &QuadrotorState,
    params: &QuadrotorParams,
) -> VecN {
    apply_a(&lifted.0, cfg) + assemble_b(x_for_b, params, cfg) * u
}

/// A propagated lifted trajectory with pose-block diagnostics.
#[derive(Debug, Clone)]
pub struct LiftedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<LiftedState>,
    pub inputs: Vec<Vec4>,
    /// Worst pose-block orthonormality defect seen while rebuilding `B`.
    pub max_rotation_defect: f64,
}

impl LiftedTrajectory {
    /// Physical states read out of every lifted sample.
    pub fn unlift_all(&self, cfg: &LiftConfig) -> Result<Vec<QuadrotorState>, CoreError> {
        self.states
            .iter()
            .map(|x| unlift(x, cfg).map(|(s, _)| s))
            .collect()
    }
}

/// Integrates the lifted dynamics with classic RK4, refreshing `B` from the
/// unlifted state once per step (sample-and-hold input).
pub fn propagate_lifted(
    x0: &LiftedState,
    signal: &dyn InputSignal,
    params: &QuadrotorParams,
    cfg: &LiftConfig,
    t_final: f64,
    dt: f64,
) -> Result<LiftedTrajectory, CoreError> {
    cfg.validate()?;
    if !(dt.is_finite() && dt > 0.0 && t_final.is_finite() && t_final > 0.0) {
        return Err(CoreError::InvalidParameter(
            "dt and t_final must be positive".into(),
        ));
    }
    let steps = (t_final / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut max_defect = 0.0_f64;

    let mut x = x0.clone();
    for step in 0..steps {
        let t = step as f64 * dt;
        let u = signal.sample(step, t);
        let (phys, report) = unlift(&x, cfg)?;
        max_defect = max_defect.max(report.rotation_defect);
        let b = assemble_b(&phys, params, cfg);
        let bu = &b * u;

        times.push(t);
        states.push(x.clone());
        inputs.push(u);

        let k1 = apply_a(&x.0, cfg) + &bu;
        let k2 = apply_a(&(&x.0 + (dt / 2.0) * &k1), cfg) + &bu;
        let k3 = apply_a(&(&x.0 + (dt / 2.0) * &k2), cfg) + &bu;
        let k4 = apply_a(&(&x.0 + dt * &k3), cfg) + &bu;
        x = LiftedState(&x.0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));

        if !x.0.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFiniteState {
                time: t + dt,
                detail: "lifted propagation diverged".into(),
            });
        }
    }
    let t_end = steps as f64 * dt;
    inputs.push(signal.sample(steps, t_end));
    times.push(t_end);
    states.push(x);

    Ok(LiftedTrajectory {
        times,
        states,
        inputs,
        max_rotation_defect: max_defect,
    })
}

/// Upper envelope for `|vec(g_k)|` from the speed magnitudes (the
/// `sqrt(2)^k |w|^k` rotation bound plus the chain bound on the translation
/// column), in the configuration's scaling. Valid for `k >= 1`.
pub fn g_norm_envelope(omega_norm: f64, v_norm: f64, k: usize, cfg: &LiftConfig) -> f64 {
    debug_assert!(k >= 1);
    let rot = 2.0 * omega_norm.powi(2 * k as i32);
    let trans = omega_norm.powi(k as i32 - 1) * v_norm;
    (rot + trans * trans).sqrt() / cfg.g_scale(k)
}

/// Upper envelope `|w|^k |v|` for `|f_k|`, in the configuration's scaling.
pub fn f_norm_envelope(omega_norm: f64, v_norm: f64, k: usize, cfg: &LiftConfig) -> f64 {
    omega_norm.powi(k as i32) * v_norm / cfg.f_scale(k)
}
