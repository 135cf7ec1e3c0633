use nalgebra::{DMatrix, Matrix3};

use super::{normalize_correspondence, null_vector, triangulate_depths, Correspondence};
use crate::geom::{CameraIntrinsics, Mat3, Vec3};
use crate::{Error, Result};

/// Result of the global-shutter 8-point baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsEstimate {
    /// Rotation taking first-frame camera coordinates to second-frame ones.
    pub rotation: Mat3,
    /// Unit translation, same convention: `X_b = R X_a + t`.
    pub translation: Vec3,
    /// `sigma_8 / sigma_9` of the (normalized) design matrix.
    pub sigma_ratio: f64,
    /// Number of matches triangulating in front of both cameras.
    pub cheirality_votes: usize,
}

/// Similarity transform moving the centroid to the origin and the mean
/// distance to sqrt(2).
fn hartley_transform(points: &[Vec3]) -> Mat3 {
    let n = points.len() as f64;
    let (cx, cy) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    let (cx, cy) = (cx / n, cy / n);
    let mean_dist = points.iter().map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()).sum::<f64>() / n;
    let s = if mean_dist > 0.0 { std::f64::consts::SQRT_2 / mean_dist } else { 1.0 };
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

/// Normalized 8-point essential-matrix estimate for one camera's temporal
/// matches, decomposed into `(R, t)` by cheirality vote.
pub fn solve_gs_8pt(corrs: &[Correspondence], k: &CameraIntrinsics) -> Result<GsEstimate> {
    if corrs.len() < 8 {
        return Err(Error::InsufficientData { needed: 8, left: corrs.len(), right: 0 });
    }
    let norm: Vec<_> = corrs.iter().map(|c| normalize_correspondence(k, c)).collect::<Result<_>>()?;
    let xa: Vec<Vec3> = norm.iter().map(|c| c.x_a).collect();
    let xb: Vec<Vec3> = norm.iter().map(|c| c.x_b).collect();
    let ta = hartley_transform(&xa);
    let tb = hartley_transform(&xb);

    let mut a = DMatrix::zeros(corrs.len(), 9);
    for (r, (pa, pb)) in xa.iter().zip(&xb).enumerate() {
        let (pa, pb) = (ta * pa, tb * pb);
        for i in 0..3 {
            for j in 0..3 {
                a[(r, 3 * i + j)] = pb[i] * pa[j];
            }
        }
    }
    let ns = null_vector(&a);
    let sigma_ratio = if ns.smallest == 0.0 { f64::INFINITY } else { ns.second / ns.smallest };
    let e_norm = Mat3::from_row_slice(ns.v.as_slice());
    let e = tb.transpose() * e_norm * ta;

    let svd = e.svd(true, true);
    let (mut u, mut v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    // Singular values come sorted in decreasing order for 3x3 matrices.
    if u.determinant() < 0.0 {
        u = -u;
    }
    if v_t.determinant() < 0.0 {
        v_t = -v_t;
    }
    let w = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let t = u.column(2).into_owned();
    let r1 = u * w * v_t;
    let r2 = u * w.transpose() * v_t;

    let mut best: Option<(usize, Mat3, Vec3)> = None;
    for (r, t) in [(r1, t), (r1, -t), (r2, t), (r2, -t)] {
        let votes = xa
            .iter()
            .zip(&xb)
            .filter(|(pa, pb)| matches!(triangulate_depths(&r, &t, pa, pb), Some((l1, l2)) if l1 > 0.0 && l2 > 0.0))
            .count();
        if best.as_ref().is_none_or(|(b, _, _)| votes > *b) {
            best = Some((votes, r, t));
        }
    }
    let (votes, rotation, translation) = best.unwrap();
    if votes == 0 {
        return Err(Error::Cheirality);
    }
    Ok(GsEstimate { rotation, translation: translation.normalize(), sigma_ratio, cheirality_votes: votes })
}
