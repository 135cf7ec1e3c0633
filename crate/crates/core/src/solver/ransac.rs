use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lifted::{design_row, essential_from_lifted, LiftedVector};
use super::{
    assemble_normalized, normalize_all, null_vector, solve_normalized, Correspondence, MotionEstimate, NormalizedCorrespondence,
    SolverOptions, MIN_PER_SIDE,
};
use crate::essential::sampson_distance;
use crate::geom::{CameraIntrinsics, StereoRigConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacOptions {
    /// Inlier threshold on the square root of the Sampson distance, in
    /// normalized image units.
    pub threshold: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for RansacOptions {
    fn default() -> Self {
        RansacOptions { threshold: 2e-3, max_iters: 4000, seed: 0, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub estimate: MotionEstimate,
    pub inliers_left: Vec<bool>,
    pub inliers_right: Vec<bool>,
    /// Iteration that produced the winning hypothesis.
    pub best_iteration: usize,
}

fn inlier_mask(x: &LiftedVector, corrs: &[NormalizedCorrespondence], rig: &StereoRigConfig, thr_sq: f64) -> Vec<bool> {
    corrs
        .iter()
        .map(|c| {
            let rp = c.row_pair(rig);
            let e = essential_from_lifted(x, &rp.coeffs, rp.signed_baseline);
            sampson_distance(&e, &c.x_a, &c.x_b) <= thr_sq
        })
        .collect()
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&m| m).count()
}

/// Hypothesis of one iteration; `None` for degenerate minimal samples.
fn hypothesis(
    iter: usize,
    left: &[NormalizedCorrespondence],
    right: &[NormalizedCorrespondence],
    rig: &StereoRigConfig,
    opts: &RansacOptions,
) -> Option<Hypothesis> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(iter as u64);
    let li = sample(&mut rng, left.len(), MIN_PER_SIDE);
    let ri = sample(&mut rng, right.len(), MIN_PER_SIDE);
    let mut a = nalgebra::DMatrix::zeros(2 * MIN_PER_SIDE, super::LIFTED_DIM);
    for (r, c) in li.iter().map(|i| &left[i]).chain(ri.iter().map(|i| &right[i])).enumerate() {
        a.set_row(r, &design_row(&c.row_pair(rig)).transpose());
    }
    let ns = null_vector(&a);
    if ns.second <= opts.solver.degeneracy_ratio * ns.smallest {
        return None;
    }
    let x = LiftedVector(nalgebra::SVector::from_iterator(ns.v.iter().copied()));
    let thr_sq = opts.threshold * opts.threshold;
    let ml = inlier_mask(&x, left, rig, thr_sq);
    let mr = inlier_mask(&x, right, rig, thr_sq);
    Some((count(&ml) + count(&mr), ml, mr))
}

/// Inlier count and per-side masks.
type Hypothesis = (usize, Vec<bool>, Vec<bool>);

fn run_iterations(
    left: &[NormalizedCorrespondence],
    right: &[NormalizedCorrespondence],
    rig: &StereoRigConfig,
    opts: &RansacOptions,
) -> Vec<Option<Hypothesis>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..opts.max_iters).into_par_iter().map(|i| hypothesis(i, left, right, rig, opts)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..opts.max_iters).map(|i| hypothesis(i, left, right, rig, opts)).collect()
    }
}

fn select<T: Copy>(corrs: &[T], mask: &[bool]) -> Vec<T> {
    corrs.iter().zip(mask).filter(|(_, &m)| m).map(|(c, _)| *c).collect()
}

/// RANSAC over minimal 9+9 samples scored by per-side Sampson distance,
/// followed by a re-solve on all inliers.
///
/// Every iteration draws from its own ChaCha stream of the master seed, and
/// the winner is the highest inlier count with ties going to the lowest
/// iteration index, so the result does not depend on evaluation order.
pub fn ransac_solve(
    left: &[Correspondence],
    right: &[Correspondence],
    rig: &StereoRigConfig,
    k: &CameraIntrinsics,
    opts: &RansacOptions,
) -> Result<RansacResult> {
    if !(opts.threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("RANSAC threshold must be positive, got {}", opts.threshold)));
    }
    let l = normalize_all(k, left)?;
    let r = normalize_all(k, right)?;
    if l.len() < MIN_PER_SIDE || r.len() < MIN_PER_SIDE {
        return Err(Error::InsufficientData { needed: MIN_PER_SIDE, left: l.len(), right: r.len() });
    }

    let mut best: Option<(usize, usize, Vec<bool>, Vec<bool>)> = None;
    for (i, h) in run_iterations(&l, &r, rig, opts).into_iter().enumerate() {
        if let Some((score, ml, mr)) = h {
            if count(&ml) >= MIN_PER_SIDE && count(&mr) >= MIN_PER_SIDE && best.as_ref().is_none_or(|(s, _, _, _)| score > *s) {
                best = Some((score, i, ml, mr));
            }
        }
    }
    let Some((_, best_iteration, mut ml, mut mr)) = best else {
        return Err(Error::RansacFailed { left: 0, right: 0 });
    };

    // Re-solve on the inliers, then re-score once with the refined model.
    let thr_sq = opts.threshold * opts.threshold;
    for _ in 0..2 {
        let a = assemble_normalized(&select(&l, &ml), &select(&r, &mr), rig)?;
        let v = null_vector(&a.matrix).v;
        let x = LiftedVector(nalgebra::SVector::from_iterator(v.iter().copied()));
        let (nl, nr) = (inlier_mask(&x, &l, rig, thr_sq), inlier_mask(&x, &r, rig, thr_sq));
        if count(&nl) < MIN_PER_SIDE || count(&nr) < MIN_PER_SIDE || (nl == ml && nr == mr) {
            break;
        }
        ml = nl;
        mr = nr;
    }
    let estimate = solve_normalized(&select(&l, &ml), &select(&r, &mr), rig, &opts.solver)?;
    Ok(RansacResult { estimate, inliers_left: ml, inliers_right: mr, best_iteration })
}
