//! Matrix and vector utilities for rigid-body work on SE(3).
//!
//! Conventions used by every other module:
//! - vectorization is column-major (`vectorize`), so `|vec(M)|` equals the
//!   Frobenius norm of `M`;
//! - matrix powers are computed by repeated multiplication, never through a
//!   spectral decomposition, so nilpotent twists stay exactly nilpotent;
//! - Euler angles are ZYX (yaw-pitch-roll): `R = Rz(yaw) Ry(pitch) Rx(roll)`.

use crate::error::CoreError;
use crate::{Mat3, Mat4, Vec3, VecN};
use nalgebra::Rotation3;

/// Orthonormality tolerance for a matrix to count as a rotation.
pub const ROTATION_TOL: f64 = 1e-9;
/// Skew-symmetry tolerance accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-9;

/// Hat map: the skew-symmetric matrix with `hat(a) * b == a x b`.
pub fn hat(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part exceeds [`SKEW_TOL`].
pub fn vee(m: &Mat3) -> Result<Vec3, CoreError> {
    let sym = 0.5 * (m + m.transpose());
    let residual = sym.norm();
    if residual > SKEW_TOL {
        return Err(CoreError::NotSkewSymmetric { residual });
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Column-major stacking of a matrix into a vector.
pub fn vectorize<R, C, S>(m: &nalgebra::Matrix<f64, R, C, S>) -> VecN
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::storage::Storage<f64, R, C>,
{
    VecN::from_iterator(m.nrows() * m.ncols(), m.iter().copied())
}

/// `m^k` by repeated multiplication; `m^0` is the identity.
pub fn matrix_power<D, S>(
    m: &nalgebra::SquareMatrix<f64, D, S>,
    k: usize,
) -> nalgebra::OMatrix<f64, D, D>
where
    D: nalgebra::DimName,
    S: nalgebra::storage::Storage<f64, D, D>,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<D, D>,
{
    let mut out = nalgebra::OMatrix::<f64, D, D>::identity();
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Rotation matrix `exp(hat(w))`.
pub fn rotation_exp(w: &Vec3) -> Mat3 {
    Rotation3::from_scaled_axis(*w).into_inner()
}

/// `|| R^T R - I ||_F`, the orthonormality defect of a candidate rotation.
pub fn orthogonality_defect(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

/// Checks the rotation-matrix invariants: orthonormal within `tol` and
/// determinant within `tol` of one.
pub fn is_rotation(r: &Mat3, tol: f64) -> bool {
    orthogonality_defect(r) <= tol && (r.determinant() - 1.0).abs() <= tol
}

/// Nearest rotation to `m` in the Frobenius sense (polar factor via SVD),
/// together with `||m - r||_F`.
///
/// Fails when `m` is numerically singular or non-finite, in which case no
/// meaningful pose can be read from it.
pub fn polar_rotation(m: &Mat3) -> Result<(Mat3, f64), CoreError> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(CoreError::DegeneratePose("non-finite entries".into()));
    }
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| CoreError::DegeneratePose("SVD failed".into()))?;
    let v_t = svd.v_t.ok_or_else(|| CoreError::DegeneratePose("SVD failed".into()))?;
    let sigma_max = svd.singular_values[0];
    let sigma_min = svd.singular_values[2];
    if sigma_max <= 0.0 || sigma_min <= 1e-9 * sigma_max {
        return Err(CoreError::DegeneratePose(format!(
            "singular values {:.3e} .. {:.3e}",
            sigma_max, sigma_min
        )));
    }
    // Flip the smallest-sigma axis if the orientation came out improper.
    let det = (u * v_t).determinant();
    let mut d = Mat3::identity();
    d[(2, 2)] = det.signum();
    let r = u * d * v_t;
    Ok((r, (m - r).norm()))
}

/// ZYX Euler angles extracted from a rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZyx {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Set when the pitch is within 1e-6 of +-pi/2; yaw is reported as zero
    /// there and only the roll/yaw combination is meaningful.
    pub gimbal_lock: bool,
}

impl EulerZyx {
    /// Angles as a 3-vector `[roll, pitch, yaw]`.
    pub fn as_vector(&self) -> Vec3 {
        Vec3::new(self.roll, self.pitch, self.yaw)
    }
}

/// Extracts ZYX (yaw-pitch-roll) angles: `R = Rz(yaw) Ry(pitch) Rx(roll)`.
pub fn euler_zyx(r: &Mat3) -> EulerZyx {
    let s_pitch = (-r[(2, 0)]).clamp(-1.0, 1.0);
    let pitch = s_pitch.asin();
    if std::f64::consts::FRAC_PI_2 - pitch.abs() < 1e-6 {
        let sign = pitch.signum();
        let roll = (sign * r[(0, 1)]).atan2(r[(1, 1)]);
        return EulerZyx {
            roll,
            pitch,
            yaw: 0.0,
            gimbal_lock: true,
        };
    }
    EulerZyx {
        roll: r[(2, 1)].atan2(r[(2, 2)]),
        pitch,
        yaw: r[(1, 0)].atan2(r[(0, 0)]),
        gimbal_lock: false,
    }
}

/// Builds `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn rotation_from_euler_zyx(roll: f64, pitch: f64, yaw: f64) -> Mat3 {
    rotation_exp(&Vec3::new(0.0, 0.0, yaw))
        * rotation_exp(&Vec3::new(0.0, pitch, 0.0))
        * rotation_exp(&Vec3::new(roll, 0.0, 0.0))
}

/// Rigid-body pose: rotation plus inertial-frame position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub r: Mat3,
    pub p: Vec3,
}

impl Pose {
    /// Identity pose at the origin.
    pub fn identity() -> Self {
        Pose {
            r: Mat3::identity(),
            p: Vec3::zeros(),
        }
    }

    pub fn new(r: Mat3, p: Vec3) -> Result<Self, CoreError> {
        if !is_rotation(&r, ROTATION_TOL) {
            return Err(CoreError::InvalidParameter(format!(
                "rotation defect {:.3e} exceeds {:.1e}",
                orthogonality_defect(&r),
                ROTATION_TOL
            )));
        }
        Ok(Pose { r, p })
    }

    /// Homogeneous 4x4 form `[[R, p], [0, 1]]`.
    pub fn homogeneous(&self) -> Mat4 {
        let mut h = Mat4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.r);
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.p);
        h
    }
}

/// Twist matrix `[[hat(w), v], [0, 0]]`; left-multiplying the pose by it
/// gives the pose derivative.
pub fn twist(w: &Vec3, v: &Vec3) -> Mat4 {
    let mut s = Mat4::zeros();
    s.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(w));
    s.fixed_view_mut::<3, 1>(0, 3).copy_from(v);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec3(rng: &mut impl Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    /// Rodrigues formula, kept independent of `rotation_exp`.
    fn rodrigues(w: &Vec3) -> Mat3 {
        let theta = w.norm();
        let k = hat(w);
        if theta < 1e-12 {
            return Mat3::identity() + k;
        }
        Mat3::identity() + (theta.sin() / theta) * k
            + ((1.0 - theta.cos()) / (theta * theta)) * k * k
    }

    #[test]
    fn hat_zero_is_zero() {
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn hat_of_e1_matches_definition() {
        let expected = Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(hat(&Vec3::new(1.0, 0.0, 0.0)), expected);
    }

    #[test]
    fn hat_applies_cross_product() {
        let out = hat(&Vec3::new(1.0, 2.0, 3.0)) * Vec3::new(4.0, 5.0, 6.0);
        assert_eq!(out, Vec3::new(-3.0, 6.0, -3.0));
    }

    #[test]
    fn vee_inverts_hat() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(vee(&hat(&a)).unwrap(), a);
        assert_eq!(vee(&Mat3::zeros()).unwrap(), Vec3::zeros());
    }

    #[test]
    fn vee_rejects_non_skew() {
        let mut m = hat(&Vec3::new(1.0, 2.0, 3.0));
        m[(0, 0)] = 1e-6;
        assert!(matches!(
            vee(&m),
            Err(CoreError::NotSkewSymmetric { .. })
        ));
    }

    #[test]
    fn vectorize_is_column_major() {
        let m = nalgebra::Matrix2::new(1.0, 3.0, 2.0, 4.0);
        assert_eq!(vectorize(&m).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        let id = nalgebra::Matrix2::identity();
        assert_eq!(vectorize(&id).as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn vectorize_norm_of_unit_hat() {
        let n = vectorize(&hat(&Vec3::new(1.0, 0.0, 0.0))).norm();
        assert_relative_eq!(n, 2.0_f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn twist_is_nilpotent_without_rotation() {
        let s = twist(&Vec3::zeros(), &Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(matrix_power(&s, 2), Mat4::zeros());
    }

    #[test]
    fn zeroth_power_is_identity() {
        let m = Mat3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0);
        assert_eq!(matrix_power(&m, 0), Mat3::identity());
    }

    #[test]
    fn squared_hat_of_e3() {
        // Hand multiplication of [[0,-1,0],[1,0,0],[0,0,0]] with itself.
        let sq = matrix_power(&hat(&Vec3::new(0.0, 0.0, 1.0)), 2);
        let expected = Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 0.0));
        assert_relative_eq!(sq, expected, epsilon = 1e-15);
    }

    #[test]
    fn hat_power_frobenius_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = rand_vec3(&mut rng, 1.5);
            let wx = hat(&w);
            let budget = 2.0_f64.sqrt() * w.norm();
            for k in 1..=30 {
                let norm = matrix_power(&wx, k).norm();
                assert!(
                    norm <= budget.powi(k as i32) * (1.0 + 1e-12) + 1e-300,
                    "k={k}, norm={norm}, bound={}",
                    budget.powi(k as i32)
                );
            }
        }
    }

    #[test]
    fn rotation_exp_identity_and_quarter_turn() {
        assert_eq!(rotation_exp(&Vec3::zeros()), Mat3::identity());
        let r = rotation_exp(&Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        assert_relative_eq!(
            r * Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rotation_exp_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let w = rand_vec3(&mut rng, 3.0);
            let prod = rotation_exp(&w) * rotation_exp(&(-w));
            assert!((prod - Mat3::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_exp_matches_rodrigues_and_stays_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            let w = rand_vec3(&mut rng, 4.0);
            let r = rotation_exp(&w);
            assert!((r - rodrigues(&w)).norm() < 1e-12);
            assert!(is_rotation(&r, 1e-12));
        }
    }

    #[test]
    fn euler_identity_and_pure_yaw() {
        let e = euler_zyx(&Mat3::identity());
        assert_eq!((e.roll, e.pitch, e.yaw), (0.0, 0.0, 0.0));
        let e = euler_zyx(&rotation_exp(&Vec3::new(0.0, 0.0, 0.3)));
        assert_relative_eq!(e.yaw, 0.3, epsilon = 1e-12);
        assert_relative_eq!(e.roll, 0.0, epsilon = 1e-12);
        assert!(!e.gimbal_lock);
    }

    #[test]
    fn euler_round_trip_away_from_lock() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let roll = rng.random_range(-3.0..3.0);
            let pitch = rng.random_range(-1.4..1.4);
            let yaw = rng.random_range(-3.0..3.0);
            let e = euler_zyx(&rotation_from_euler_zyx(roll, pitch, yaw));
            assert_relative_eq!(e.roll, roll, epsilon = 1e-9);
            assert_relative_eq!(e.pitch, pitch, epsilon = 1e-9);
            assert_relative_eq!(e.yaw, yaw, epsilon = 1e-9);
        }
    }

    #[test]
    fn euler_flags_gimbal_lock() {
        let r = rotation_from_euler_zyx(0.4, std::f64::consts::FRAC_PI_2, 0.0);
        let e = euler_zyx(&r);
        assert!(e.gimbal_lock);
        assert_eq!(e.yaw, 0.0);
        assert_relative_eq!(e.roll, 0.4, epsilon = 1e-9);
    }

    #[test]
    fn polar_rotation_projects_and_flags_degenerate() {
        let r0 = rotation_exp(&Vec3::new(0.3, -0.2, 0.9));
        let noisy = r0 + Mat3::new(1e-4, 0.0, 0.0, 0.0, -2e-4, 0.0, 0.0, 0.0, 1e-4);
        let (r, residual) = polar_rotation(&noisy).unwrap();
        assert!(is_rotation(&r, 1e-12));
        assert!(residual < 1e-3);
        assert!(polar_rotation(&Mat3::zeros()).is_err());
    }

    proptest! {
        #[test]
        fn hat_is_antisymmetric_in_its_arguments(
            a in prop::array::uniform3(-10.0..10.0f64),
            b in prop::array::uniform3(-10.0..10.0f64),
        ) {
            let (a, b) = (Vec3::from(a), Vec3::from(b));
            let lhs = hat(&a) * b;
            prop_assert!((lhs - a.cross(&b)).norm() < 1e-12);
            prop_assert!((lhs + hat(&b) * a).norm() < 1e-12);
        }

        #[test]
        fn vectorize_preserves_frobenius_norm(
            entries in prop::collection::vec(-100.0..100.0f64, 12),
        ) {
            let m = nalgebra::DMatrix::from_vec(3, 4, entries);
            prop_assert!((vectorize(&m).norm() - m.norm()).abs() < 1e-12);
        }

        #[test]
        fn hat_norm_is_sqrt2_times_euclidean(
            a in prop::array::uniform3(-10.0..10.0f64),
        ) {
            let a = Vec3::from(a);
            prop_assert!((hat(&a).norm() - 2.0_f64.sqrt() * a.norm()).abs() < 1e-12);
        }
    }
}
