//! Camera models, rotations and per-row rolling-shutter poses.
//!
//! Camera coordinates are `X_cam = R(u) X + T(u)`, where `X` is expressed in
//! the frame of the baseline center at the start of the first frame. The
//! first camera axis maps to image rows and the second to columns, so the
//! stereo baseline lies along the second axis.

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Convergence tolerance of the rolling-shutter fixed point, in rows.
pub const RS_TOLERANCE: f64 = 1e-6;
/// Iteration cap of the rolling-shutter fixed point.
pub const RS_MAX_ITER: usize = 50;

/// Pinhole intrinsics. `fx`/`cu` act on rows, `fy`/`cv` on columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cu: f64,
    pub cv: f64,
    pub width: usize,
    pub n_rows: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cu: f64, cv: f64, width: usize, n_rows: usize) -> Result<Self> {
        let k = CameraIntrinsics { fx, fy, cu, cv, width, n_rows };
        k.validate()?;
        Ok(k)
    }

    /// Square-pixel camera with the principal point at the image center.
    pub fn centered(focal: f64, width: usize, n_rows: usize) -> Result<Self> {
        Self::new(focal, focal, n_rows as f64 / 2.0, width as f64 / 2.0, width, n_rows)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidParameter(format!("focal lengths must be positive (fx={}, fy={})", self.fx, self.fy)));
        }
        if self.n_rows < 2 || self.width < 2 {
            return Err(Error::InvalidParameter(format!("image must be at least 2x2 (got {} rows x {} columns)", self.n_rows, self.width)));
        }
        if !(0.0..self.n_rows as f64).contains(&self.cu) || !(0.0..self.width as f64).contains(&self.cv) {
            return Err(Error::InvalidParameter(format!("principal point ({}, {}) outside the image", self.cu, self.cv)));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::new(self.fx, 0.0, self.cu, 0.0, self.fy, self.cv, 0.0, 0.0, 1.0)
    }

    /// `K^-1 [u, v, 1]`.
    pub fn normalize(&self, p: PixelPoint) -> Vec3 {
        Vec3::new((p.u - self.cu) / self.fx, (p.v - self.cv) / self.fy, 1.0)
    }

    /// Dehomogenizes `K x`.
    pub fn to_pixel(&self, x: &Vec3) -> PixelPoint {
        PixelPoint::new(self.fx * x[0] / x[2] + self.cu, self.fy * x[1] / x[2] + self.cv)
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.u >= 0.0 && p.u < self.n_rows as f64 && p.v >= 0.0 && p.v < self.width as f64
    }
}

/// Fixed geometry and timing of the stereo rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StereoRigConfig {
    half_baseline: f64,
    readout_ratio: f64,
    n_rows: usize,
}

impl StereoRigConfig {
    pub fn new(half_baseline: f64, readout_ratio: f64, n_rows: usize) -> Result<Self> {
        if !(half_baseline > 0.0 && half_baseline.is_finite()) {
            return Err(Error::InvalidParameter(format!("half baseline must be positive, got {half_baseline}")));
        }
        if !(readout_ratio > 0.0 && readout_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!("readout ratio must lie in (0, 1], got {readout_ratio}")));
        }
        if n_rows < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 rows, got {n_rows}")));
        }
        Ok(StereoRigConfig { half_baseline, readout_ratio, n_rows })
    }

    pub fn half_baseline(&self) -> f64 {
        self.half_baseline
    }

    pub fn readout_ratio(&self) -> f64 {
        self.readout_ratio
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Time step per row as a fraction of the frame interval, `h = phi / N`.
    pub fn row_rate(&self) -> f64 {
        self.readout_ratio / self.n_rows as f64
    }

    /// Signed half-baseline vector of a camera: `(0, b, 0)` for the left
    /// camera and `(0, -b, 0)` for the right one.
    pub fn baseline_vector(&self, side: Side) -> Vec3 {
        Vec3::new(0.0, side.sign() * self.half_baseline, 0.0)
    }

    /// The timing scalar `k = (frame offset) + h u` of a row.
    pub fn timing(&self, frame: Frame, u: f64) -> f64 {
        frame.offset() + self.row_rate() * u
    }

    pub fn with_half_baseline(&self, half_baseline: f64) -> Result<Self> {
        Self::new(half_baseline, self.readout_ratio, self.n_rows)
    }

    pub fn with_readout_ratio(&self, readout_ratio: f64) -> Result<Self> {
        Self::new(self.half_baseline, readout_ratio, self.n_rows)
    }
}

/// Constant rig velocity over one frame interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionVelocity {
    /// Rotation vector, radians per frame interval.
    pub w: Vec3,
    /// Translation, scene units per frame interval.
    pub d: Vec3,
}

impl MotionVelocity {
    pub fn new(w: Vec3, d: Vec3) -> Self {
        MotionVelocity { w, d }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(self.d.iter()).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    First,
    Second,
}

impl Frame {
    fn offset(self) -> f64 {
        match self {
            Frame::First => 0.0,
            Frame::Second => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// One of the four images: I1 = first/left, I2 = first/right,
/// I3 = second/left, I4 = second/right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameId {
    pub frame: Frame,
    pub side: Side,
}

impl FrameId {
    pub const I1: FrameId = FrameId { frame: Frame::First, side: Side::Left };
    pub const I2: FrameId = FrameId { frame: Frame::First, side: Side::Right };
    pub const I3: FrameId = FrameId { frame: Frame::Second, side: Side::Left };
    pub const I4: FrameId = FrameId { frame: Frame::Second, side: Side::Right };
    pub const ALL: [FrameId; 4] = [Self::I1, Self::I2, Self::I3, Self::I4];

    pub fn new(frame: Frame, side: Side) -> Self {
        FrameId { frame, side }
    }

    /// Conventional image index 1..=4.
    pub fn index(self) -> usize {
        match (self.frame, self.side) {
            (Frame::First, Side::Left) => 1,
            (Frame::First, Side::Right) => 2,
            (Frame::Second, Side::Left) => 3,
            (Frame::Second, Side::Right) => 4,
        }
    }
}

/// Which rotation map turns a rotation vector into a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationModel {
    /// `I + [w]x`, the first-order map the solver is built on.
    Linearized,
    /// Rodrigues' formula.
    #[default]
    Exact,
}

impl RotationModel {
    pub fn matrix(self, w: &Vec3) -> Mat3 {
        match self {
            RotationModel::Linearized => small_rotation(w),
            RotationModel::Exact => rodrigues(w),
        }
    }
}

/// Pose of a single scanline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowPose {
    pub w: Vec3,
    pub d: Vec3,
}

impl RowPose {
    pub fn rotation(&self, model: RotationModel) -> Mat3 {
        model.matrix(&self.w)
    }

    /// Maps a scene point into this row's camera frame.
    pub fn transform(&self, x: &Vec3, model: RotationModel) -> Vec3 {
        self.rotation(model) * x + self.d
    }

    /// Inverse of [`RowPose::transform`].
    pub fn inverse_transform(&self, x_cam: &Vec3, model: RotationModel) -> Vec3 {
        let r = self.rotation(model);
        let rhs = x_cam - self.d;
        match model {
            RotationModel::Exact => r.transpose() * rhs,
            // I + [w]x is invertible for any finite w (its eigenvalues are 1 and 1 +- i|w|).
            RotationModel::Linearized => r.try_inverse().expect("I + [w]x is invertible") * rhs,
        }
    }
}

/// A pixel in row-first order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PixelPoint {
    /// Row (scanline) coordinate.
    pub u: f64,
    /// Column coordinate.
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        PixelPoint { u, v }
    }

    pub fn homogeneous(&self) -> Vec3 {
        Vec3::new(self.u, self.v, 1.0)
    }
}

/// The cross-product matrix: `skew(v) * x == v.cross(x)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// First-order rotation `I + [w]x`. Not orthonormal.
pub fn small_rotation(w: &Vec3) -> Mat3 {
    Mat3::identity() + skew(w)
}

/// Exact rotation matrix of a rotation vector.
pub fn rodrigues(w: &Vec3) -> Mat3 {
    let theta = w.norm();
    let k = skew(w);
    if theta < 1e-8 {
        // Second-order Taylor expansion; exact to machine precision here.
        return Mat3::identity() + k + 0.5 * k * k;
    }
    Mat3::identity() + (theta.sin() / theta) * k + ((1.0 - theta.cos()) / (theta * theta)) * k * k
}

/// Row pose without the range check; used internally where rows outside the
/// image are legitimate intermediate values (fixed-point iterates).
pub(crate) fn row_pose_unchecked(rig: &StereoRigConfig, id: FrameId, u: f64, motion: &MotionVelocity) -> RowPose {
    let k = rig.timing(id.frame, u);
    RowPose { w: k * motion.w, d: k * motion.d + rig.baseline_vector(id.side) }
}

/// Pose of row `u` of image `id` under constant velocity `motion`.
pub fn row_pose(rig: &StereoRigConfig, id: FrameId, u: f64, motion: &MotionVelocity) -> Result<RowPose> {
    if !(u >= 0.0 && u < rig.n_rows() as f64) {
        return Err(Error::RowOutOfRange { row: u, n_rows: rig.n_rows() });
    }
    Ok(row_pose_unchecked(rig, id, u, motion))
}

/// Global-shutter projection of `x` with a single pose. Returns the pixel and
/// the camera-frame depth.
pub fn project_gs(k: &CameraIntrinsics, pose: &RowPose, x: &Vec3, model: RotationModel) -> Result<(PixelPoint, f64)> {
    let xc = pose.transform(x, model);
    if !(xc[2] > 0.0) {
        return Err(Error::BehindCamera { depth: xc[2] });
    }
    Ok((k.to_pixel(&xc), xc[2]))
}

/// Rolling-shutter projection: finds the row `u*` whose pose projects `x`
/// onto row `u*` itself, by fixed-point iteration seeded with the projection
/// at the first-row pose.
///
/// The returned pixel may lie outside the image; visibility is left to the
/// caller.
pub fn project_rs(
    k: &CameraIntrinsics,
    rig: &StereoRigConfig,
    id: FrameId,
    motion: &MotionVelocity,
    x: &Vec3,
    model: RotationModel,
) -> Result<(PixelPoint, f64)> {
    let mut u = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..RS_MAX_ITER {
        let pose = row_pose_unchecked(rig, id, u, motion);
        let (p, depth) = project_gs(k, &pose, x, model)?;
        residual = (p.u - u).abs();
        if residual <= RS_TOLERANCE {
            return Ok((p, depth));
        }
        if !p.u.is_finite() {
            break;
        }
        u = p.u;
    }
    Err(Error::NoConvergence { iterations: RS_MAX_ITER, residual })
}
