//! Linear relative-pose solver for the stereo rolling-shutter rig.
//!
//! Each temporal match (first frame to second frame, same camera) gives one
//! linear equation in the 19 lifted unknowns. At least nine matches per
//! camera are required; the stacked system `A X = 0` is solved by taking the
//! right singular vector of the smallest singular value.

mod gs;
pub mod lifted;
mod ransac;

use nalgebra::{DMatrix, DVector};

use crate::geom::{rodrigues, skew, CameraIntrinsics, MotionVelocity, PixelPoint, Side, StereoRigConfig, Vec3};
use crate::{Error, Result};

pub use gs::{solve_gs_8pt, GsEstimate};
pub use lifted::{LiftedVector, LIFTED_DIM};
pub use ransac::{ransac_solve, RansacOptions, RansacResult};

use lifted::{design_row, row_pair_data, RowPairData, COLUMN_MONOMIALS};

/// Minimum number of matches per camera.
pub const MIN_PER_SIDE: usize = 9;

/// A temporal match on one camera: `a` in the first frame, `b` in the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub side: Side,
    pub a: PixelPoint,
    pub b: PixelPoint,
}

impl Correspondence {
    pub fn new(side: Side, a: PixelPoint, b: PixelPoint) -> Self {
        Correspondence { side, a, b }
    }
}

/// A correspondence mapped through `K^-1`, keeping the raw rows for timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedCorrespondence {
    pub side: Side,
    pub x_a: Vec3,
    pub x_b: Vec3,
    pub u_a: f64,
    pub u_b: f64,
}

impl NormalizedCorrespondence {
    pub(crate) fn row_pair(&self, rig: &StereoRigConfig) -> RowPairData {
        row_pair_data(rig, self.side.sign(), self.x_a, self.x_b, self.u_a, self.u_b)
    }
}

pub fn normalize_correspondence(k: &CameraIntrinsics, c: &Correspondence) -> Result<NormalizedCorrespondence> {
    if !(k.fx != 0.0 && k.fy != 0.0 && k.fx.is_finite() && k.fy.is_finite()) {
        return Err(Error::SingularIntrinsics);
    }
    Ok(NormalizedCorrespondence { side: c.side, x_a: k.normalize(c.a), x_b: k.normalize(c.b), u_a: c.a.u, u_b: c.b.u })
}

/// One design-matrix row for a normalized match.
pub fn build_design_row(c: &NormalizedCorrespondence, rig: &StereoRigConfig) -> nalgebra::SVector<f64, LIFTED_DIM> {
    design_row(&c.row_pair(rig))
}

/// The stacked system `[A_left; A_right]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub matrix: DMatrix<f64>,
    pub n_left: usize,
    pub n_right: usize,
}

pub fn assemble_design_matrix(
    left: &[Correspondence],
    right: &[Correspondence],
    rig: &StereoRigConfig,
    k: &CameraIntrinsics,
) -> Result<DesignMatrix> {
    let l = normalize_all(k, left)?;
    let r = normalize_all(k, right)?;
    assemble_normalized(&l, &r, rig)
}

fn normalize_all(k: &CameraIntrinsics, corrs: &[Correspondence]) -> Result<Vec<NormalizedCorrespondence>> {
    corrs.iter().map(|c| normalize_correspondence(k, c)).collect()
}

pub(crate) fn assemble_normalized(
    left: &[NormalizedCorrespondence],
    right: &[NormalizedCorrespondence],
    rig: &StereoRigConfig,
) -> Result<DesignMatrix> {
    if left.len() < MIN_PER_SIDE || right.len() < MIN_PER_SIDE {
        return Err(Error::InsufficientData { needed: MIN_PER_SIDE, left: left.len(), right: right.len() });
    }
    let rows = left.len() + right.len();
    let mut matrix = DMatrix::zeros(rows, LIFTED_DIM);
    for (i, c) in left.iter().chain(right).enumerate() {
        matrix.set_row(i, &build_design_row(c, rig).transpose());
    }
    Ok(DesignMatrix { matrix, n_left: left.len(), n_right: right.len() })
}

/// Singular-value diagnostics of a null-space solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDiagnostics {
    pub sigma_smallest: f64,
    pub sigma_second: f64,
}

impl SolveDiagnostics {
    /// `sigma_second / sigma_smallest`; large means a well-defined null space.
    pub fn ratio(&self) -> f64 {
        if !(self.sigma_second > 0.0) {
            1.0
        } else if self.sigma_smallest == 0.0 {
            f64::INFINITY
        } else {
            self.sigma_second / self.sigma_smallest
        }
    }
}

/// Singular values of interest from a null-space solve.
pub(crate) struct NullSpace {
    pub v: DVector<f64>,
    pub smallest: f64,
    pub second: f64,
    pub largest: f64,
}

/// Right singular vector of the smallest singular value. Pads with zero rows
/// so the full right basis is always available.
pub(crate) fn null_vector(a: &DMatrix<f64>) -> NullSpace {
    let n = a.ncols();
    let padded;
    let a = if a.nrows() < n {
        padded = a.clone().resize_vertically(n, 0.0);
        &padded
    } else {
        a
    };
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    NullSpace { v: v_t.row(order[0]).transpose(), smallest: sv[order[0]], second: sv[order[1]], largest: sv[order[n - 1]] }
}

/// Relative size below which a singular value counts as zero.
const RANK_TOLERANCE: f64 = 1e-12;

/// Degeneracy threshold on `sigma_18 / sigma_19`.
pub const DEFAULT_DEGENERACY_RATIO: f64 = 10.0;

/// Null vector of the design matrix, sign-normalized so that the
/// largest-magnitude translation entry is positive.
pub fn solve_linear(a: &DesignMatrix, degeneracy_ratio: f64) -> Result<(LiftedVector, SolveDiagnostics)> {
    if a.matrix.nrows() < 2 * MIN_PER_SIDE {
        return Err(Error::InsufficientData { needed: MIN_PER_SIDE, left: a.n_left, right: a.n_right });
    }
    let ns = null_vector(&a.matrix);
    let diag = SolveDiagnostics { sigma_smallest: ns.smallest, sigma_second: ns.second };
    if ns.second <= RANK_TOLERANCE * ns.largest || diag.ratio() < degeneracy_ratio {
        return Err(Error::Degenerate { ratio: diag.ratio(), threshold: degeneracy_ratio });
    }
    let mut x = LiftedVector(nalgebra::SVector::from_iterator(ns.v.iter().copied()));
    let d = x.d_block();
    let imax = d.iamax();
    if d[imax] < 0.0 {
        x = x.scaled(-1.0);
    }
    Ok((x, diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleStatus {
    /// The lifted vector fixed the global scale; `d_metric` is meaningful.
    Metric,
    DirectionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionEstimate {
    pub w: Vec3,
    /// Unit translation direction.
    pub d_direction: Vec3,
    /// Translation in scene units when `scale_status` is `Metric`.
    pub d_metric: Option<Vec3>,
    pub scale_status: ScaleStatus,
    /// False when the quadratic block disagrees with the linear one after
    /// scaling (e.g. a clearly negative `w1w1`).
    pub consistent: bool,
    pub diagnostics: Option<SolveDiagnostics>,
}

impl MotionEstimate {
    /// Best available translation: metric if known, else the unit direction.
    pub fn translation(&self) -> Vec3 {
        self.d_metric.unwrap_or(self.d_direction)
    }

    pub fn motion(&self) -> MotionVelocity {
        MotionVelocity::new(self.w, self.translation())
    }
}

/// Relative tolerance on the scale fit above which the scale is reported as
/// unreliable.
const SCALE_FIT_TOLERANCE: f64 = 0.25;

/// Recovers `(w, d)` from a lifted vector known up to a nonzero scale.
///
/// The `E_ij = d_i w_j` block is only trusted through its symmetric part:
/// an antisymmetric block `[v]x` enters every row-pair matrix almost exactly
/// like a translation, so noise leaks into it freely. `w` solves
/// `sym(X_d w^T) = sym(X_E)` in least squares, which is independent of the
/// scale and sign of `X`. The scale `s` then follows from `X[w1], X[w3]` and
/// the quadratic `w` entries, and `d = X[d] / s`.
pub fn extract_motion(x: &LiftedVector) -> Result<MotionEstimate> {
    let xd = x.d_block();
    let total = x.0.norm();
    if !(total > 0.0) || xd.norm() <= 1e-12 * total {
        return Err(Error::DirectionUndefined);
    }
    let mut m = nalgebra::SMatrix::<f64, 6, 3>::zeros();
    let mut rhs = nalgebra::SVector::<f64, 6>::zeros();
    let mut r = 0;
    for i in 0..3 {
        for j in i..3 {
            m[(r, j)] += xd[i] / 2.0;
            m[(r, i)] += xd[j] / 2.0;
            rhs[r] = (x.0[lifted::COL_E11 + 3 * i + j] + x.0[lifted::COL_E11 + 3 * j + i]) / 2.0;
            r += 1;
        }
    }
    let mtm = m.transpose() * m;
    let w = mtm.lu().solve(&(m.transpose() * rhs)).ok_or(Error::DirectionUndefined)?;

    // Scale from the entries that are pure functions of w.
    let motion_w = MotionVelocity::new(w, Vec3::zeros());
    let (mut num, mut den) = (0.0, 0.0);
    let mut predicted = Vec::new();
    for (c, mono) in COLUMN_MONOMIALS.iter().enumerate() {
        if mono[..3].iter().all(|&p| p == 0) {
            let f = lifted::monomial_value(mono, &motion_w);
            num += x.0[c] * f;
            den += f * f;
            predicted.push((c, f));
        }
    }
    let scale = if den > 0.0 { num / den } else { 0.0 };
    let fit_ok = scale != 0.0 && scale.is_finite() && {
        let resid: f64 = predicted.iter().map(|&(c, f)| (x.0[c] - scale * f).powi(2)).sum::<f64>().sqrt();
        let signal = scale.abs() * den.sqrt();
        resid <= SCALE_FIT_TOLERANCE * signal
    };
    let consistent = fit_ok && {
        let w1w1 = x.0[lifted::COL_W1W1] / scale;
        let w3w3 = x.0[lifted::COL_W3W3] / scale;
        let tol = SCALE_FIT_TOLERANCE * w.norm_squared();
        w1w1 >= -tol && w3w3 >= -tol
    };
    let (d_direction, d_metric, scale_status) = if fit_ok {
        let d = xd / scale;
        (d.normalize(), Some(d), ScaleStatus::Metric)
    } else {
        let imax = xd.iamax();
        let dir = if xd[imax] < 0.0 { -xd } else { xd };
        (dir.normalize(), None, ScaleStatus::DirectionOnly)
    };
    Ok(MotionEstimate { w, d_direction, d_metric, scale_status, consistent, diagnostics: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub degeneracy_ratio: f64,
    /// Choose the sign of `d` by counting triangulated points in front of
    /// both cameras.
    pub cheirality: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { degeneracy_ratio: DEFAULT_DEGENERACY_RATIO, cheirality: true }
    }
}

/// Depths `(lambda_a, lambda_b)` with `lambda_b x_b = lambda_a R x_a + t` in
/// least squares.
pub(crate) fn triangulate_depths(r: &crate::geom::Mat3, t: &Vec3, x_a: &Vec3, x_b: &Vec3) -> Option<(f64, f64)> {
    let p = r * x_a;
    // Columns [p, -x_b], normal equations of a 3x2 system.
    let (a11, a12, a22) = (p.dot(&p), -p.dot(x_b), x_b.dot(x_b));
    let (r1, r2) = (-p.dot(t), x_b.dot(t));
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= 1e-14 * a11 * a22 {
        return None;
    }
    Some(((a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det))
}

fn cheirality_count(corrs: &[NormalizedCorrespondence], rig: &StereoRigConfig, w: &Vec3, d: &Vec3) -> usize {
    corrs
        .iter()
        .filter(|c| {
            let rp = c.row_pair(rig);
            let (a, k) = (rp.coeffs.a, rp.coeffs.k_a);
            let beta = rig.baseline_vector(c.side);
            let sw = skew(w);
            let t = a * d - a * k * sw * d - a * sw * beta;
            let r = rodrigues(&(a * w));
            matches!(triangulate_depths(&r, &t, &c.x_a, &c.x_b), Some((la, lb)) if la > 0.0 && lb > 0.0)
        })
        .count()
}

pub(crate) fn solve_normalized(
    left: &[NormalizedCorrespondence],
    right: &[NormalizedCorrespondence],
    rig: &StereoRigConfig,
    opts: &SolverOptions,
) -> Result<MotionEstimate> {
    let a = assemble_normalized(left, right, rig)?;
    let (x, diag) = solve_linear(&a, opts.degeneracy_ratio)?;
    let mut est = extract_motion(&x)?;
    est.diagnostics = Some(diag);
    if opts.cheirality {
        let magnitude = est.d_metric.map(|d| d.norm()).unwrap_or(1.0);
        let d = est.d_direction * magnitude;
        let all: Vec<_> = left.iter().chain(right).copied().collect();
        let forward = cheirality_count(&all, rig, &est.w, &d);
        let backward = cheirality_count(&all, rig, &est.w, &-d);
        if backward > forward {
            est.d_direction = -est.d_direction;
            // The scale fit picked the other sign; its magnitude is suspect too.
            est.d_metric = None;
            est.scale_status = ScaleStatus::DirectionOnly;
        }
    }
    Ok(est)
}

/// Normalize, assemble, solve and extract.
pub fn solve_relative_pose(
    left: &[Correspondence],
    right: &[Correspondence],
    rig: &StereoRigConfig,
    k: &CameraIntrinsics,
) -> Result<MotionEstimate> {
    solve_relative_pose_with(left, right, rig, k, &SolverOptions::default())
}

pub fn solve_relative_pose_with(
    left: &[Correspondence],
    right: &[Correspondence],
    rig: &StereoRigConfig,
    k: &CameraIntrinsics,
    opts: &SolverOptions,
) -> Result<MotionEstimate> {
    let l = normalize_all(k, left)?;
    let r = normalize_all(k, right)?;
    solve_normalized(&l, &r, rig, opts)
}
