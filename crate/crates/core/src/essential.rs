//! Row-pair essential matrices of the constant-velocity stereo rig.
//!
//! For a temporal match between row `u_a` of the first frame and row `u_b`
//! of the second frame on the same camera, with `k_a = h u_a`,
//! `k_b = 1 + h u_b` and `a = k_b - k_a`:
//!
//! ```text
//! R_ab = I + a [w]x
//! T_ab = d(u_b) - R_ab d(u_a)
//! E    = [T_ab]x R_ab
//! ```
//!
//! Three independent routes compute `E`: [`essential_exact`] straight from
//! the poses, [`essential_expanded`] from the six-term regrouping, and
//! [`symbolic_essential`] from a symbolic expansion that also drives the
//! design-matrix columns of the linear solver.

use std::sync::OnceLock;

use crate::geom::{self, skew, small_rotation, Frame, FrameId, Mat3, MotionVelocity, Side, StereoRigConfig, Vec3};
use crate::poly::{self, Poly, PolyMat3};
use crate::Result;

/// Timing scalars of a row pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowPairCoefficients {
    pub k_a: f64,
    pub k_b: f64,
    pub a: f64,
}

impl RowPairCoefficients {
    /// `u_a` is a row of the first frame, `u_b` a row of the second frame.
    /// Rows need not be integral and are not range-checked.
    pub fn new(rig: &StereoRigConfig, u_a: f64, u_b: f64) -> Self {
        let k_a = rig.timing(Frame::First, u_a);
        let k_b = rig.timing(Frame::Second, u_b);
        RowPairCoefficients { k_a, k_b, a: k_b - k_a }
    }
}

/// Essential matrix of one row pair on one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrixRS {
    pub matrix: Mat3,
    pub side: Side,
    pub u_a: f64,
    pub u_b: f64,
}

/// `E = [T_ab]x (I + a[w]x)` from the row poses.
pub fn essential_exact(rig: &StereoRigConfig, motion: &MotionVelocity, side: Side, u_a: f64, u_b: f64) -> Result<EssentialMatrixRS> {
    let pose_a = geom::row_pose(rig, FrameId::new(Frame::First, side), u_a, motion)?;
    let pose_b = geom::row_pose(rig, FrameId::new(Frame::Second, side), u_b, motion)?;
    let c = RowPairCoefficients::new(rig, u_a, u_b);
    let r_ab = small_rotation(&(c.a * motion.w));
    let t_ab = pose_b.d - r_ab * pose_a.d;
    Ok(EssentialMatrixRS { matrix: skew(&t_ab) * r_ab, side, u_a, u_b })
}

/// Term-by-term regrouping of [`essential_exact`]:
///
/// ```text
/// E = a[d]x - a[[w]x b]x + a^2 [d]x[w]x - a k_a [[w]x d]x
///     - a^2 [[w]x b]x [w]x - a^2 k_a [[w]x d]x [w]x
/// ```
///
/// with `b` the signed half-baseline vector of `side`. The last term is the
/// only one cubic in the unknowns; `include_cubic = false` drops it, giving
/// the truncated matrix the linear solver is built on.
pub fn essential_expanded(
    rig: &StereoRigConfig,
    motion: &MotionVelocity,
    side: Side,
    u_a: f64,
    u_b: f64,
    include_cubic: bool,
) -> Result<EssentialMatrixRS> {
    // Range validation shared with the exact route.
    geom::row_pose(rig, FrameId::new(Frame::First, side), u_a, motion)?;
    geom::row_pose(rig, FrameId::new(Frame::Second, side), u_b, motion)?;
    let c = RowPairCoefficients::new(rig, u_a, u_b);
    let matrix = expanded_matrix(&c, &rig.baseline_vector(side), &motion.w, &motion.d, include_cubic);
    Ok(EssentialMatrixRS { matrix, side, u_a, u_b })
}

fn expanded_matrix(c: &RowPairCoefficients, b: &Vec3, w: &Vec3, d: &Vec3, include_cubic: bool) -> Mat3 {
    let (a, k) = (c.a, c.k_a);
    let sw = skew(w);
    let sd = skew(d);
    let swb = skew(&(sw * b));
    let swd = skew(&(sw * d));
    let mut e = a * sd - a * swb + a * a * sd * sw - a * k * swd - a * a * swb * sw;
    if include_cubic {
        e -= a * a * k * swd * sw;
    }
    e
}

/// Algebraic epipolar residual `x_b^T E x_a` for normalized homogeneous points.
pub fn epipolar_residual(e: &Mat3, x_a: &Vec3, x_b: &Vec3) -> f64 {
    x_b.dot(&(e * x_a))
}

/// First-order geometric (Sampson) residual in squared normalized units.
/// Returns `+inf` when the epipolar gradient vanishes.
pub fn sampson_distance(e: &Mat3, x_a: &Vec3, x_b: &Vec3) -> f64 {
    let ex = e * x_a;
    let etx = e.transpose() * x_b;
    let denom = ex[0] * ex[0] + ex[1] * ex[1] + etx[0] * etx[0] + etx[1] * etx[1];
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    let r = x_b.dot(&ex);
    r * r / denom
}

/// Symbolic row-pair essential matrix over the unknowns `d`, `w` and the
/// knowns `a`, `k` (= `k_a`) and `b` (signed half baseline, along the second
/// axis). Built once from the pose model, not from the regrouped form.
pub fn symbolic_essential() -> &'static PolyMat3 {
    static E: OnceLock<PolyMat3> = OnceLock::new();
    E.get_or_init(|| {
        let d = poly::vec3(poly::D1, poly::D2, poly::D3);
        let w = poly::vec3(poly::W1, poly::W2, poly::W3);
        let beta = [Poly::zero(), Poly::var(poly::B), Poly::zero()];
        let a = Poly::var(poly::A);
        let k = Poly::var(poly::K);
        // T = a d - a k (w x d) - a (w x b)
        let t = poly::sub_vec(
            &poly::sub_vec(&poly::scale_vec(&a, &d), &poly::scale_vec(&(&a * &k), &poly::cross(&w, &d))),
            &poly::scale_vec(&a, &poly::cross(&w, &beta)),
        );
        let r = poly::add_mat(&poly::identity(), &poly::scale_mat(&a, &poly::skew(&w)));
        poly::mul_mat(&poly::skew(&t), &r)
    })
}

/// Numeric evaluation of [`symbolic_essential`].
pub fn evaluate_symbolic(c: &RowPairCoefficients, side_sign: f64, half_baseline: f64, motion: &MotionVelocity) -> Mat3 {
    let e = symbolic_essential();
    let mut x = [0.0; poly::N_VARS];
    x[..3].copy_from_slice(motion.d.as_slice());
    x[3..6].copy_from_slice(motion.w.as_slice());
    x[poly::A] = c.a;
    x[poly::K] = c.k_a;
    x[poly::B] = side_sign * half_baseline;
    Mat3::from_fn(|i, j| e[i][j].eval(&x))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geom::{CameraIntrinsics, RotationModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn random_motion(rng: &mut ChaCha8Rng) -> MotionVelocity {
        MotionVelocity::new(random_unit(rng) * rng.random_range(0.0..0.05), random_unit(rng) * rng.random_range(0.0..1.0))
    }

    fn side_of(i: usize) -> Side {
        if i.is_multiple_of(2) {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Matches generated directly in the row-pair model: a point expressed
    /// in camera `a` is mapped with `R_ab = I + a[w]x` and `T_ab`, and `u_b`
    /// solved by fixed-point iteration.
    pub(crate) fn pair_consistent_match(
        k: &CameraIntrinsics,
        rig: &StereoRigConfig,
        motion: &MotionVelocity,
        side: Side,
        u_a: f64,
        v_a: f64,
        depth: f64,
    ) -> (Vec3, Vec3, f64) {
        let x_a = k.normalize(geom::PixelPoint::new(u_a, v_a));
        let pa = geom::row_pose(rig, FrameId::new(Frame::First, side), u_a, motion).unwrap();
        let mut u_b = u_a;
        let mut x_b = x_a;
        for _ in 0..100 {
            let c = RowPairCoefficients::new(rig, u_a, u_b);
            let pb = geom::row_pose_unchecked(rig, FrameId::new(Frame::Second, side), u_b, motion);
            let r = small_rotation(&(c.a * motion.w));
            let t = pb.d - r * pa.d;
            let xb_cam = r * (depth * x_a) + t;
            let p = k.to_pixel(&xb_cam);
            x_b = xb_cam / xb_cam[2];
            if (p.u - u_b).abs() < 1e-12 {
                break;
            }
            u_b = p.u;
        }
        (x_a, x_b, u_b)
    }

    #[test]
    fn zero_motion_gives_zero_matrix() {
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        for side in [Side::Left, Side::Right] {
            let e = essential_exact(&rig, &MotionVelocity::zero(), side, 100.0, 300.0).unwrap();
            assert_eq!(e.matrix, Mat3::zeros());
        }
    }

    #[test]
    fn pure_translation_is_scaled_skew() {
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let d = Vec3::new(0.1, -0.3, 0.2);
        let m = MotionVelocity::new(Vec3::zeros(), d);
        for side in [Side::Left, Side::Right] {
            let c = RowPairCoefficients::new(&rig, 120.0, 400.0);
            let expected = c.a * skew(&d);
            let exact = essential_exact(&rig, &m, side, 120.0, 400.0).unwrap().matrix;
            assert!((exact - expected).norm() < 1e-15);
            for flag in [true, false] {
                let ex = essential_expanded(&rig, &m, side, 120.0, 400.0, flag).unwrap().matrix;
                assert!((ex - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn expansion_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..1000 {
            let rig = StereoRigConfig::new(rng.random_range(0.05..1.0), rng.random_range(0.1..=1.0), 900).unwrap();
            let m = random_motion(&mut rng);
            let (u_a, u_b) = (rng.random_range(0.0..900.0), rng.random_range(0.0..900.0));
            let side = side_of(i);
            let exact = essential_exact(&rig, &m, side, u_a, u_b).unwrap().matrix;
            let expanded = essential_expanded(&rig, &m, side, u_a, u_b, true).unwrap().matrix;
            let symbolic = evaluate_symbolic(&RowPairCoefficients::new(&rig, u_a, u_b), side.sign(), rig.half_baseline(), &m);
            assert!((exact - expanded).norm() <= 1e-12);
            assert!((exact - symbolic).norm() <= 1e-12);
        }
    }

    #[test]
    fn left_right_differ_only_by_baseline_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let m = random_motion(&mut rng);
            let rig = StereoRigConfig::new(0.4, 0.7, 900).unwrap();
            let c = RowPairCoefficients::new(&rig, 50.0, 700.0);
            let left = evaluate_symbolic(&c, 1.0, 0.4, &m);
            let right = evaluate_symbolic(&c, -1.0, 0.4, &m);
            let right_expanded = essential_expanded(&rig, &m, Side::Right, 50.0, 700.0, true).unwrap().matrix;
            let left_flipped = expanded_matrix(&c, &Vec3::new(0.0, -0.4, 0.0), &m.w, &m.d, true);
            assert!((right - right_expanded).norm() < 1e-12);
            assert!((left_flipped - right_expanded).norm() < 1e-12);
            // b -> 0: both sides coincide.
            let l0 = evaluate_symbolic(&c, 1.0, 0.0, &m);
            let r0 = evaluate_symbolic(&c, -1.0, 0.0, &m);
            assert!((l0 - r0).norm() < 1e-15);
            assert!((left - right).norm() > 0.0 || m.w.norm() == 0.0);
        }
    }

    #[test]
    fn translation_scaling_is_homogeneous_without_rotation() {
        let rig = StereoRigConfig::new(0.4, 0.7, 900).unwrap();
        let m = MotionVelocity::new(Vec3::zeros(), Vec3::new(0.2, 0.1, -0.4));
        let m3 = MotionVelocity::new(Vec3::zeros(), 3.0 * m.d);
        let e1 = essential_exact(&rig, &m, Side::Left, 10.0, 20.0).unwrap().matrix;
        let e3 = essential_exact(&rig, &m3, Side::Left, 10.0, 20.0).unwrap().matrix;
        assert!((3.0 * e1 - e3).norm() < 1e-15);
    }

    #[test]
    fn model_matches_have_zero_residual() {
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for i in 0..200 {
            let m = MotionVelocity::new(random_unit(&mut rng) * 0.01, random_unit(&mut rng) * 0.3);
            let side = side_of(i);
            let (u_a, v_a) = (rng.random_range(100.0..800.0), rng.random_range(100.0..800.0));
            let (x_a, x_b, u_b) = pair_consistent_match(&k, &rig, &m, side, u_a, v_a, rng.random_range(4.0..12.0));
            let e = essential_exact(&rig, &m, side, u_a, u_b).unwrap();
            assert!(epipolar_residual(&e.matrix, &x_a, &x_b).abs() <= 1e-10);
            assert!(sampson_distance(&e.matrix, &x_a, &x_b) <= 1e-20);
        }
    }

    #[test]
    fn rs_projected_matches_have_small_residual() {
        // Per-row rotations I + k[w]x compose to I + a[w]x only to first order,
        // so matches from the rolling-shutter projector leave an O(k_a k_b |w|^2)
        // residual.
        let k = CameraIntrinsics::centered(810.0, 900, 900).unwrap();
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let w_mag = 0.4f64.to_radians();
        let mut n = 0;
        while n < 100 {
            let m = MotionVelocity::new(random_unit(&mut rng) * w_mag, random_unit(&mut rng) * 0.3);
            let x = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(5.0..10.0));
            let side = side_of(n);
            let (pa, _) = geom::project_rs(&k, &rig, FrameId::new(Frame::First, side), &m, &x, RotationModel::Linearized).unwrap();
            let (pb, _) = geom::project_rs(&k, &rig, FrameId::new(Frame::Second, side), &m, &x, RotationModel::Linearized).unwrap();
            if !(k.contains(pa) && k.contains(pb)) {
                continue;
            }
            let e = essential_exact(&rig, &m, side, pa.u, pb.u).unwrap();
            let r = epipolar_residual(&e.matrix, &k.normalize(pa), &k.normalize(pb));
            assert!(r.abs() <= 4.0 * w_mag * w_mag * 0.3, "residual {r}");
            n += 1;
        }
    }

    #[test]
    fn residual_is_bilinear() {
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let m = MotionVelocity::new(Vec3::new(0.01, -0.02, 0.005), Vec3::new(0.2, 0.1, 0.05));
        let e = essential_exact(&rig, &m, Side::Left, 200.0, 300.0).unwrap().matrix;
        assert_eq!(epipolar_residual(&Mat3::zeros(), &Vec3::new(0.1, 0.2, 1.0), &Vec3::new(0.3, 0.1, 1.0)), 0.0);
        let x_a = Vec3::new(0.1, 0.2, 1.0);
        let x_b = Vec3::new(-0.2, 0.15, 1.0);
        let delta = 1e-3;
        let r0 = epipolar_residual(&e, &x_a, &x_b);
        let r1 = epipolar_residual(&e, &x_a, &(x_b + Vec3::new(delta, 0.0, 0.0)));
        assert!((r1 - r0 - (e * x_a)[0] * delta).abs() < 1e-15);
        let r2 = epipolar_residual(&e, &(x_a + Vec3::new(0.0, delta, 0.0)), &x_b);
        assert!((r2 - r0 - (e.transpose() * x_b)[1] * delta).abs() < 1e-15);
    }

    #[test]
    fn sampson_degenerate_and_consistency() {
        let e = skew(&Vec3::z());
        let p = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(sampson_distance(&e, &p, &p), f64::INFINITY);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        for _ in 0..200 {
            let m = random_motion(&mut rng);
            let e = essential_exact(&rig, &m, Side::Right, 300.0, 310.0).unwrap().matrix;
            let x_a = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 1.0);
            let x_b = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 1.0);
            let s = sampson_distance(&e, &x_a, &x_b);
            let r = epipolar_residual(&e, &x_a, &x_b);
            if s.is_finite() {
                assert!(s >= 0.0);
                assert_eq!(s == 0.0, r == 0.0);
            }
        }
    }

    #[test]
    fn truncation_drops_only_cubic_term() {
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let m = MotionVelocity::new(Vec3::new(0.01, -0.02, 0.005), Vec3::new(0.2, 0.1, 0.05));
        let full = essential_expanded(&rig, &m, Side::Left, 200.0, 300.0, true).unwrap().matrix;
        let trunc = essential_expanded(&rig, &m, Side::Left, 200.0, 300.0, false).unwrap().matrix;
        let c = RowPairCoefficients::new(&rig, 200.0, 300.0);
        let sw = skew(&m.w);
        let cubic = -c.a * c.a * c.k_a * skew(&(sw * m.d)) * sw;
        assert!((full - trunc - cubic).norm() < 1e-16);
    }
}
