//! Shared fixtures for the benchmark targets.

use liftquad::dynamics::{QuadrotorParams, QuadrotorState};
use liftquad::se3::{rotation_exp, Pose};
use liftquad::{Mat3, Vec3};

/// A representative non-degenerate state.
pub fn bench_state() -> QuadrotorState {
    QuadrotorState {
        pose: Pose {
            r: rotation_exp(&Vec3::new(0.3, -0.2, 0.5)),
            p: Vec3::new(1.0, -2.0, 0.5),
        },
        omega: Vec3::new(0.21, -0.34, 0.27),
        velocity: Vec3::new(0.4, 0.1, -0.3),
    }
}

/// Order-one inertia parameters used by the model benchmarks.
pub fn bench_params() -> QuadrotorParams {
    QuadrotorParams {
        mass: 1.0,
        inertia: Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.5)),
        ..QuadrotorParams::default()
    }
}
