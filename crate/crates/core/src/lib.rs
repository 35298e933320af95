//! Lifted linear modeling of quadrotor rigid-body dynamics on SE(3).
//!
//! The crate builds a finite linear state-space model for the nonlinear
//! quadrotor dynamics by stacking two analytically constructed chains of
//! observable functions: matrix observables `g_k = h S^k` derived from the
//! pose `h` and twist `S`, and vector observables `f_k = w^(xk) v` derived
//! from the body velocities. The chains obey shift dynamics with a
//! state-dependent input matrix, so the lifted state evolves as
//! `X' = A X + B(x) u` with a constant, nilpotent `A`.
//!
//! Modules:
//! - [`se3`]: hat/vee maps, vectorization, matrix powers, rotation utilities
//! - [`dynamics`]: the nonlinear quadrotor model, input transforms, and a
//!   fourth-order Lie-group integrator
//! - [`signal`]: deterministic, seedable input signals for experiments
//! - [`lift`]: observable chains, lifted-state index map, `A`/`B` assembly,
//!   lifted propagation
//! - [`analysis`]: least-squares input recovery, controllability rank,
//!   convergence audits, approximation-error metrics
//! - [`baseline`]: an 18-observable dictionary with a data-driven (EDMDc)
//!   fit, used for head-to-head error comparisons
//! - [`io`]: CSV import/export for trajectories, matrices, and reports

pub mod analysis;
pub mod baseline;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod lift;
pub mod se3;
pub mod signal;

pub use error::CoreError;

/// 3-vector of f64, the working scalar type throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 4-vector of f64.
pub type Vec4 = nalgebra::Vector4<f64>;
/// Dynamically sized vector of f64.
pub type VecN = nalgebra::DVector<f64>;
/// 3x3 matrix of f64.
pub type Mat3 = nalgebra::Matrix3<f64>;
/// 4x4 matrix of f64.
pub type Mat4 = nalgebra::Matrix4<f64>;
/// Dynamically sized matrix of f64.
pub type MatN = nalgebra::DMatrix<f64>;
