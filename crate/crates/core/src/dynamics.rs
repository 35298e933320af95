//! Ground-truth nonlinear quadrotor model on SE(3).
//!
//! Two reference models are provided. `Full` integrates the complete rigid
//! body dynamics, with thrust realized so that the commanded vertical
//! acceleration is met exactly. `Simplified` drops the thrust/gravity terms
//! from the translational dynamics (`v' = -w x v`), which is the world in
//! which the observable chains of [`crate::lift`] close exactly; its fourth
//! input channel is therefore not free but recorded from the realized
//! vertical acceleration.

use crate::error::CoreError;
use crate::se3::{orthogonality_defect, rotation_exp, Pose};
use crate::signal::InputSignal;
use crate::{Mat3, Vec3, Vec4};

/// Physical quadrotor parameters.
///
/// The defaults are representative small-quadrotor values; every experiment
/// reads its parameters from configuration so the choice stays auditable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrotorParams {
    /// Mass (kg).
    pub mass: f64,
    /// Inertia matrix (kg m^2), symmetric positive definite.
    pub inertia: Mat3,
    /// Thrust coefficient mapping squared motor speed to force.
    pub thrust_coeff: f64,
    /// Moment coefficient mapping squared motor speed to yaw torque.
    pub moment_coeff: f64,
    /// Arm length (m).
    pub arm_length: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        QuadrotorParams {
            mass: 0.5,
            inertia: Mat3::from_diagonal(&Vec3::new(2.32e-3, 2.32e-3, 4.0e-3)),
            thrust_coeff: 1e-5,
            moment_coeff: 1e-7,
            arm_length: 0.175,
            gravity: 9.81,
        }
    }
}

impl QuadrotorParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !self.mass.is_finite() || self.mass <= 0.0 {
            return Err(CoreError::InvalidParameter("mass must be positive".into()));
        }
        if (self.inertia - self.inertia.transpose()).norm() > 1e-12 {
            return Err(CoreError::InvalidParameter("inertia must be symmetric".into()));
        }
        let eig = self.inertia.symmetric_eigenvalues();
        if eig.min() <= 0.0 {
            return Err(CoreError::InvalidParameter(
                "inertia must be positive definite".into(),
            ));
        }
        for (name, v) in [
            ("thrust_coeff", self.thrust_coeff),
            ("moment_coeff", self.moment_coeff),
            ("arm_length", self.arm_length),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(CoreError::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.gravity < 0.0 {
            return Err(CoreError::InvalidParameter("gravity must be nonnegative".into()));
        }
        Ok(())
    }

    /// Inverse of the inertia matrix.
    pub fn inertia_inv(&self) -> Mat3 {
        self.inertia
            .try_inverse()
            .expect("validated inertia is invertible")
    }

    /// Gyroscopic torque `(J w) x w`.
    pub fn gyroscopic(&self, omega: &Vec3) -> Vec3 {
        (self.inertia * omega).cross(omega)
    }
}

/// Full quadrotor state: pose on SE(3) plus body-frame velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorState {
    pub pose: Pose,
    /// Body angular velocity (rad/s).
    pub omega: Vec3,
    /// Body linear velocity (m/s).
    pub velocity: Vec3,
}

impl QuadrotorState {
    pub fn new(pose: Pose, omega: Vec3, velocity: Vec3) -> Self {
        QuadrotorState { pose, omega, velocity }
    }

    /// State at rest at the identity pose.
    pub fn rest() -> Self {
        QuadrotorState {
            pose: Pose::identity(),
            omega: Vec3::zeros(),
            velocity: Vec3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.r.iter().all(|x| x.is_finite())
            && self.pose.p.iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
            && self.velocity.iter().all(|x| x.is_finite())
    }
}

/// Squared motor speeds, all nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorInput(pub Vec4);

impl RotorInput {
    pub fn new(u: Vec4) -> Result<Self, CoreError> {
        if u.iter().any(|&x| x < 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "rotor inputs must be nonnegative, got {:?}",
                [u.x, u.y, u.z, u.w]
            )));
        }
        Ok(RotorInput(u))
    }

    pub fn zero() -> Self {
        RotorInput(Vec4::zeros())
    }
}

/// Transformed input: the first three channels are the inertia-coupled
/// torque `M + (J w) x w`, the fourth is the commanded vertical body
/// acceleration `(v')_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedInput(pub Vec4);

impl TransformedInput {
    pub fn zero() -> Self {
        TransformedInput(Vec4::zeros())
    }

    /// Torque-like part (first three channels).
    pub fn moment_part(&self) -> Vec3 {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    /// Commanded vertical body acceleration (fourth channel).
    pub fn accel_part(&self) -> f64 {
        self.0.w
    }
}

/// Which translational dynamics the reference integrator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceModel {
    /// Complete rigid-body model with thrust and gravity.
    Full,
    /// `v' = -w x v`; the world in which the observable chains close.
    Simplified,
}

/// Time-stamped states with the piecewise-constant inputs that produced them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuadrotorState>,
    pub inputs: Vec<TransformedInput>,
}

impl Trajectory {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.times.len() != self.states.len() || self.times.len() != self.inputs.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "trajectory lengths differ: {} times, {} states, {} inputs",
                self.times.len(),
                self.states.len(),
                self.inputs.len()
            )));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CoreError::InvalidParameter(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Inputs as plain 4-vectors, e.g. for driving the lifted model.
    pub fn input_vectors(&self) -> Vec<Vec4> {
        self.inputs.iter().map(|u| u.0).collect()
    }
}

/// Total thrust and body torque generated by the rotors.
pub fn wrench_from_rotors(u: &RotorInput, params: &QuadrotorParams) -> (f64, Vec3) {
    let q = &u.0;
    let kt = params.thrust_coeff;
    let km = params.moment_coeff;
    let l = params.arm_length;
    let force = kt * (q.x + q.y + q.z + q.w);
    let moment = Vec3::new(
        kt * l * (q.y - q.w),
        kt * l * (q.z - q.x),
        km * (q.x - q.y + q.z - q.w),
    );
    (force, moment)
}

/// Time derivative of the quadrotor state. The rotation rate is implied:
/// `R' = R hat(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub p_dot: Vec3,
    pub omega_dot: Vec3,
    pub v_dot: Vec3,
}

/// Full nonlinear dynamics driven by rotor speeds.
pub fn nonlinear_rhs(
    x: &QuadrotorState,
    u: &RotorInput,
    params: &QuadrotorParams,
) -> StateDerivative {
    let (force, moment) = wrench_from_rotors(u, params);
    let e3 = Vec3::z();
    StateDerivative {
        p_dot: x.pose.r * x.velocity,
        omega_dot: params.inertia_inv() * (moment + params.gyroscopic(&x.omega)),
        v_dot: (force / params.mass) * e3
            - x.omega.cross(&x.velocity)
            - params.gravity * (x.pose.r.transpose() * e3),
    }
}

/// Maps rotor speeds to the transformed input at the given state.
pub fn transform_input(
    x: &QuadrotorState,
    u: &RotorInput,
    params: &QuadrotorParams,
) -> TransformedInput {
    let (force, moment) = wrench_from_rotors(u, params);
    let torque_like = moment + params.gyroscopic(&x.omega);
    let e3 = Vec3::z();
    let accel = (force / params.mass)
        - x.omega.cross(&x.velocity).z
        - params.gravity * (x.pose.r.transpose() * e3).z;
    TransformedInput(Vec4::new(torque_like.x, torque_like.y, torque_like.z, accel))
}

/// The 4x4 map from squared motor speeds to `[F, M]`.
fn mixing_matrix(params: &QuadrotorParams) -> crate::Mat4 {
    let kt = params.thrust_coeff;
    let km = params.moment_coeff;
    let ktl = kt * params.arm_length;
    crate::Mat4::new(
        kt, kt, kt, kt, //
        0.0, ktl, 0.0, -ktl, //
        -ktl, 0.0, ktl, 0.0, //
        km, -km, km, -km,
    )
}

/// Inverts [`transform_input`] through the rotor mixing map.
///
/// Infeasible commands (requiring negative squared motor speeds) are
/// reported, not clamped.
pub fn inverse_transform_input(
    x: &QuadrotorState,
    u_tilde: &TransformedInput,
    params: &QuadrotorParams,
) -> Result<RotorInput, CoreError> {
    let moment = u_tilde.moment_part() - params.gyroscopic(&x.omega);
    let e3 = Vec3::z();
    let force = params.mass
        * (u_tilde.accel_part()
            + x.omega.cross(&x.velocity).z
            + params.gravity * (x.pose.r.transpose() * e3).z);
    let wrench = Vec4::new(force, moment.x, moment.y, moment.z);
    let mix = mixing_matrix(params);
    let u = mix
        .try_inverse()
        .ok_or_else(|| CoreError::InvalidParameter("rotor mixing matrix is singular".into()))?
        * wrench;
    if u.iter().any(|&c| c < 0.0) {
        return Err(CoreError::InfeasibleInput {
            commands: [u.x, u.y, u.z, u.w],
        });
    }
    Ok(RotorInput(u))
}

/// Derivative of `(p, w, v)` under the given reference model and held input.
fn model_rhs(
    x: &QuadrotorState,
    u_tilde: &Vec4,
    params: &QuadrotorParams,
    model: ReferenceModel,
) -> StateDerivative {
    let inertia_inv = params.inertia_inv();
    let torque_like = u_tilde.fixed_rows::<3>(0).into_owned();
    let omega_dot = inertia_inv * torque_like;
    let p_dot = x.pose.r * x.velocity;
    let coriolis = x.omega.cross(&x.velocity);
    let v_dot = match model {
        ReferenceModel::Simplified => -coriolis,
        ReferenceModel::Full => {
            let grav = params.gravity * (x.pose.r.transpose() * Vec3::z());
            Vec3::new(-coriolis.x - grav.x, -coriolis.y - grav.y, u_tilde.w)
        }
    };
    StateDerivative { p_dot, omega_dot, v_dot }
}

/// The input realized over a step. For the full model the commanded value
/// is met exactly; for the simplified model the fourth channel is not free,
/// so the recorded value is the vertical acceleration the model actually
/// produced over the step (the exact step average when the end state is
/// known, the instantaneous value otherwise).
fn realized_input(
    x: &QuadrotorState,
    x_next: Option<&QuadrotorState>,
    u_tilde: &Vec4,
    model: ReferenceModel,
    dt: f64,
) -> TransformedInput {
    match model {
        ReferenceModel::Full => TransformedInput(*u_tilde),
        ReferenceModel::Simplified => {
            let mut u = *u_tilde;
            u.w = match x_next {
                Some(next) => (next.velocity.z - x.velocity.z) / dt,
                None => -x.omega.cross(&x.velocity).z,
            };
            TransformedInput(u)
        }
    }
}

/// Truncated inverse-dexp for the body-frame rotation increment.
fn dexpinv_body(theta: &Vec3, omega: &Vec3) -> Vec3 {
    omega + 0.5 * theta.cross(omega) + theta.cross(&theta.cross(omega)) / 12.0
}

/// One fourth-order step (Munthe-Kaas style): the rotation advances through
/// the exponential map of an so(3) increment, the vector part through
/// classic RK4 stages evaluated at consistent rotations.
fn rkmk4_step(
    x: &QuadrotorState,
    u_tilde: &Vec4,
    params: &QuadrotorParams,
    model: ReferenceModel,
    dt: f64,
) -> QuadrotorState {
    let stage = |theta: &Vec3, p: Vec3, omega: Vec3, v: Vec3| -> (StateDerivative, Vec3) {
        let xs = QuadrotorState {
            pose: Pose {
                r: x.pose.r * rotation_exp(theta),
                p,
            },
            omega,
            velocity: v,
        };
        let d = model_rhs(&xs, u_tilde, params, model);
        (d, dexpinv_body(theta, &omega))
    };

    let (d1, k1) = stage(&Vec3::zeros(), x.pose.p, x.omega, x.velocity);
    let th2 = 0.5 * dt * k1;
    let (d2, k2) = stage(
        &th2,
        x.pose.p + 0.5 * dt * d1.p_dot,
        x.omega + 0.5 * dt * d1.omega_dot,
        x.velocity + 0.5 * dt * d1.v_dot,
    );
    let th3 = 0.5 * dt * k2;
    let (d3, k3) = stage(
        &th3,
        x.pose.p + 0.5 * dt * d2.p_dot,
        x.omega + 0.5 * dt * d2.omega_dot,
        x.velocity + 0.5 * dt * d2.v_dot,
    );
    let th4 = dt * k3;
    let (d4, k4) = stage(
        &th4,
        x.pose.p + dt * d3.p_dot,
        x.omega + dt * d3.omega_dot,
        x.velocity + dt * d3.v_dot,
    );

    let theta = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    QuadrotorState {
        pose: Pose {
            r: x.pose.r * rotation_exp(&theta),
            p: x.pose.p + (dt / 6.0) * (d1.p_dot + 2.0 * d2.p_dot + 2.0 * d3.p_dot + d4.p_dot),
        },
        omega: x.omega
            + (dt / 6.0) * (d1.omega_dot + 2.0 * d2.omega_dot + 2.0 * d3.omega_dot + d4.omega_dot),
        velocity: x.velocity
            + (dt / 6.0) * (d1.v_dot + 2.0 * d2.v_dot + 2.0 * d3.v_dot + d4.v_dot),
    }
}

/// Fixed-step integration with sample-and-hold inputs.
///
/// The rotation is updated multiplicatively each step, so orthonormality is
/// preserved to rounding over long horizons. Aborts with a diagnostic when
/// the state stops being finite.
pub fn integrate(
    x0: &QuadrotorState,
    signal: &dyn InputSignal,
    params: &QuadrotorParams,
    t_final: f64,
    dt: f64,
    model: ReferenceModel,
) -> Result<Trajectory, CoreError> {
    if !(dt.is_finite() && dt > 0.0 && t_final.is_finite() && t_final > 0.0) {
        return Err(CoreError::InvalidParameter(
            "dt and t_final must be positive".into(),
        ));
    }
    params.validate()?;
    let steps = (t_final / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);

    let mut x = *x0;
    for step in 0..steps {
        let t = step as f64 * dt;
        let u = signal.sample(step, t);
        let x_next = rkmk4_step(&x, &u, params, model, dt);
        if !x_next.is_finite() {
            return Err(CoreError::NonFiniteState {
                time: t + dt,
                detail: "integration diverged".into(),
            });
        }
        times.push(t);
        states.push(x);
        inputs.push(realized_input(&x, Some(&x_next), &u, model, dt));
        x = x_next;
    }
    let t_end = steps as f64 * dt;
    let u_end = signal.sample(steps, t_end);
    times.push(t_end);
    states.push(x);
    inputs.push(realized_input(&x, None, &u_end, model, dt));

    Ok(Trajectory { times, states, inputs })
}

/// Like [`integrate`], but confirms the orthonormality invariant along the
/// way and returns the worst defect seen.
pub fn integrate_checked(
    x0: &QuadrotorState,
    signal: &dyn InputSignal,
    params: &QuadrotorParams,
    t_final: f64,
    dt: f64,
    model: ReferenceModel,
) -> Result<(Trajectory, f64), CoreError> {
    let traj = integrate(x0, signal, params, t_final, dt, model)?;
    let worst = traj
        .states
        .iter()
        .map(|s| orthogonality_defect(&s.pose.r))
        .fold(0.0, f64::max);
    Ok((traj, worst))
}
