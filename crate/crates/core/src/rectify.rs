//! Textured-plane rendering, rolling-shutter synthesis from per-row renders,
//! and depth-based correction of rolling-shutter frames to the pose of their
//! first row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{
    project_rs, row_pose, row_pose_unchecked, CameraIntrinsics, FrameId, MotionVelocity, PixelPoint, RotationModel, RowPose, Side,
    StereoRigConfig, Vec3,
};
use crate::image::{to_u8, FloatImage, GrayImage, Image, Mask, RgbImage, INVALID};
use crate::solver::{Correspondence, MIN_PER_SIDE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    /// Squares of side `size` scene units alternating between two levels.
    Checker { size: f64, dark: u8, light: u8 },
    /// Multi-octave value noise on a lattice of spacing `cell` scene units,
    /// bilinearly interpolated, mapped to `[lo, hi]`.
    Noise { seed: u64, cell: f64, octaves: u32, lo: u8, hi: u8 },
}

fn lattice(seed: u64, octave: u32, i: i64, j: i64) -> f64 {
    let mut x = seed ^ (octave as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for k in [i as u64, j as u64] {
        x = x.wrapping_add(k).wrapping_add(0x9e37_79b9_7f4a_7c15);
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 31;
    }
    (x >> 11) as f64 / (1u64 << 53) as f64
}

impl Texture {
    /// Intensity at local surface coordinates `(s, t)` in scene units.
    pub fn sample(&self, s: f64, t: f64) -> f64 {
        match *self {
            Texture::Checker { size, dark, light } => {
                let parity = ((s / size).floor() as i64 + (t / size).floor() as i64).rem_euclid(2);
                if parity == 0 {
                    dark as f64
                } else {
                    light as f64
                }
            }
            Texture::Noise { seed, cell, octaves, lo, hi } => {
                let (mut sum, mut amp, mut norm, mut scale) = (0.0, 1.0, 0.0, 1.0 / cell);
                for o in 0..octaves.max(1) {
                    let (x, y) = (s * scale, t * scale);
                    let (i, j) = (x.floor(), y.floor());
                    let (fx, fy) = (x - i, y - j);
                    let (i, j) = (i as i64, j as i64);
                    let v = (1.0 - fx) * ((1.0 - fy) * lattice(seed, o, i, j) + fy * lattice(seed, o, i, j + 1))
                        + fx * ((1.0 - fy) * lattice(seed, o, i + 1, j) + fy * lattice(seed, o, i + 1, j + 1));
                    sum += amp * v;
                    norm += amp;
                    amp *= 0.5;
                    scale *= 2.0;
                }
                lo as f64 + (hi as f64 - lo as f64) * sum / norm
            }
        }
    }
}

/// Parallelogram `origin + s * edge_s + t * edge_t`, `s, t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub origin: Vec3,
    pub edge_s: Vec3,
    pub edge_t: Vec3,
    pub texture: Texture,
}

impl Quad {
    /// Ray parameter and local texture coordinates of the hit, if any.
    fn intersect(&self, center: &Vec3, dir: &Vec3) -> Option<(f64, f64, f64)> {
        let n = self.edge_s.cross(&self.edge_t);
        let denom = n.dot(dir);
        if denom.abs() < 1e-12 {
            return None;
        }
        let lambda = n.dot(&(self.origin - center)) / denom;
        if !(lambda > 0.0) {
            return None;
        }
        let rel = center + lambda * dir - self.origin;
        let (ss, st, tt) = (self.edge_s.dot(&self.edge_s), self.edge_s.dot(&self.edge_t), self.edge_t.dot(&self.edge_t));
        let (rs, rt) = (rel.dot(&self.edge_s), rel.dot(&self.edge_t));
        let det = ss * tt - st * st;
        let a = (rs * tt - rt * st) / det;
        let b = (rt * ss - rs * st) / det;
        if !((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)) {
            return None;
        }
        Some((lambda, a * ss.sqrt(), b * tt.sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneScene {
    pub quads: Vec<Quad>,
    pub background: u8,
}

impl PlaneScene {
    /// Layered test scene: a noise-textured back wall, a slanted noise panel,
    /// a checkerboard and a near noise panel.
    pub fn layered(seed: u64) -> Self {
        let q = |o: [f64; 3], s: [f64; 3], t: [f64; 3], texture| Quad {
            origin: Vec3::from(o),
            edge_s: Vec3::from(s),
            edge_t: Vec3::from(t),
            texture,
        };
        let noise = |k: u64, cell: f64| Texture::Noise { seed: seed.wrapping_add(k), cell, octaves: 3, lo: 20, hi: 235 };
        PlaneScene {
            quads: vec![
                q([-8.0, -8.0, 14.0], [16.0, 0.0, 0.0], [0.0, 16.0, 0.0], noise(1, 0.08)),
                q([-4.0, -6.0, 12.0], [0.0, 0.0, -5.0], [0.0, 5.0, 0.0], noise(2, 0.04)),
                q([0.2, -2.2, 8.0], [1.8, 0.0, 0.3], [0.0, 2.4, 0.0], Texture::Checker { size: 0.2, dark: 40, light: 210 }),
                q([-1.6, 0.4, 5.2], [1.2, 0.0, -0.2], [0.0, 1.2, 0.0], noise(3, 0.025)),
            ],
            background: 128,
        }
    }

    /// Nearest hit along a ray: `(camera depth, intensity)`.
    fn trace(&self, center: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for quad in &self.quads {
            if let Some((lambda, s, t)) = quad.intersect(center, dir) {
                if best.is_none_or(|(l, _)| lambda < l) {
                    best = Some((lambda, quad.texture.sample(s, t)));
                }
            }
        }
        best
    }
}

/// Renders row `u` seen from `pose` into `out` and its camera depth into
/// `depth` (`INVALID` where only background is seen).
fn render_row(scene: &PlaneScene, k: &CameraIntrinsics, pose: &RowPose, model: RotationModel, u: usize, out: &mut [u8], depth: &mut [f32]) {
    let r = pose.rotation(model);
    let rt = r.transpose();
    let center = -(rt * pose.d);
    for (v, (o, z)) in out.iter_mut().zip(depth.iter_mut()).enumerate() {
        let x = k.normalize(PixelPoint::new(u as f64, v as f64));
        // x has unit third component, so the ray parameter is the camera depth.
        match scene.trace(&center, &(rt * x)) {
            Some((lambda, value)) => {
                *o = to_u8(value);
                *z = lambda as f32;
            }
            None => {
                *o = scene.background;
                *z = INVALID;
            }
        }
    }
}

fn render_rows(k: &CameraIntrinsics, f: impl Fn(usize, &mut [u8], &mut [f32]) + Sync + Send) -> (GrayImage, FloatImage) {
    let (w, h) = (k.width, k.n_rows);
    let mut img = vec![0u8; w * h];
    let mut depth = vec![0f32; w * h];
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        img.par_chunks_mut(w).zip(depth.par_chunks_mut(w)).enumerate().for_each(|(u, (o, z))| f(u, o, z));
    }
    #[cfg(not(feature = "parallel"))]
    {
        img.chunks_mut(w).zip(depth.chunks_mut(w)).enumerate().for_each(|(u, (o, z))| f(u, o, z));
    }
    (Image::from_vec(w, h, img).expect("sized"), Image::from_vec(w, h, depth).expect("sized"))
}

/// Pinhole rendering of the scene from a single pose, with camera depth.
pub fn render_gs(scene: &PlaneScene, k: &CameraIntrinsics, pose: &RowPose, model: RotationModel) -> (GrayImage, FloatImage) {
    render_rows(k, |u, o, z| render_row(scene, k, pose, model, u, o, z))
}

/// Rolling-shutter frame: row `r` is row `r` of the render from the pose of
/// row `r`. The depth map holds each pixel's depth at its own row pose.
pub fn synthesize_rs(
    scene: &PlaneScene,
    k: &CameraIntrinsics,
    rig: &StereoRigConfig,
    id: FrameId,
    motion: &MotionVelocity,
    model: RotationModel,
) -> Result<(GrayImage, FloatImage)> {
    if k.n_rows != rig.n_rows() {
        return Err(Error::DimensionMismatch(format!("intrinsics have {} rows, rig {}", k.n_rows, rig.n_rows())));
    }
    Ok(render_rows(k, |u, o, z| {
        let pose = row_pose_unchecked(rig, id, u as f64, motion);
        render_row(scene, k, &pose, model, u, o, z)
    }))
}

/// Offsets this close to an integer land on a single pixel, so that a
/// motionless warp reproduces its input exactly.
const SNAP: f64 = 1e-6;
/// Relative depth slack of the soft z-buffer.
const Z_TOLERANCE: f64 = 0.02;

struct Splat {
    target: usize,
    weight: f64,
    z: f64,
    value: f64,
}

fn splats_of(u: f64, v: f64, z: f64, value: f64, w: usize, h: usize, out: &mut Vec<Splat>) {
    let snap = |x: f64| if (x - x.round()).abs() < SNAP { x.round() } else { x };
    let (u, v) = (snap(u), snap(v));
    let (u0, v0) = (u.floor(), v.floor());
    let (fu, fv) = (u - u0, v - v0);
    for (du, wu) in [(0.0, 1.0 - fu), (1.0, fu)] {
        for (dv, wv) in [(0.0, 1.0 - fv), (1.0, fv)] {
            let weight = wu * wv;
            let (tu, tv) = (u0 + du, v0 + dv);
            if weight > 0.0 && tu >= 0.0 && tv >= 0.0 && (tu as usize) < h && (tv as usize) < w {
                out.push(Splat { target: tu as usize * w + tv as usize, weight, z, value });
            }
        }
    }
}

/// Forward-warps every pixel with a valid depth from its own row pose to the
/// pose of row 0 of the same frame, splatting bilinearly with a z-buffer.
///
/// The nearest surface at each target pixel wins (within a small relative
/// depth slack); the mask marks pixels that received at least one splat.
pub fn correct_image(
    img: &GrayImage,
    depth: &FloatImage,
    k: &CameraIntrinsics,
    rig: &StereoRigConfig,
    id: FrameId,
    motion: &MotionVelocity,
    model: RotationModel,
) -> Result<(GrayImage, Mask)> {
    img.check_same_size(depth)?;
    if img.height() != rig.n_rows() || img.width() != k.width || img.height() != k.n_rows {
        return Err(Error::DimensionMismatch(format!("image {}x{} vs camera {}x{}", img.width(), img.height(), k.width, k.n_rows)));
    }
    let (w, h) = (img.width(), img.height());
    let target = row_pose(rig, id, 0.0, motion)?;
    let (r0, t0) = (target.rotation(model), target.d);

    let warp_row = |u: usize| -> Vec<Splat> {
        let pose = row_pose_unchecked(rig, id, u as f64, motion);
        let mut out = Vec::new();
        for v in 0..w {
            let lambda = depth.get(u, v);
            if lambda == INVALID || !(lambda > 0.0) || !lambda.is_finite() {
                continue;
            }
            let x_cam = lambda as f64 * k.normalize(PixelPoint::new(u as f64, v as f64));
            let world = pose.inverse_transform(&x_cam, model);
            let y = r0 * world + t0;
            if !(y[2] > 0.0) {
                continue;
            }
            let p = k.to_pixel(&y);
            splats_of(p.u, p.v, y[2], img.get(u, v) as f64, w, h, &mut out);
        }
        out
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Splat>> = {
        use rayon::prelude::*;
        (0..h).into_par_iter().map(warp_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Splat>> = (0..h).map(warp_row).collect();

    // Nearest depth per target first, then accumulate only the splats within
    // the slack, in source order.
    let mut zmin = vec![f64::INFINITY; w * h];
    for s in rows.iter().flatten() {
        zmin[s.target] = zmin[s.target].min(s.z);
    }
    let mut sum = vec![0.0; w * h];
    let mut weight = vec![0.0; w * h];
    for s in rows.iter().flatten() {
        if s.z <= zmin[s.target] * (1.0 + Z_TOLERANCE) {
            sum[s.target] += s.weight * s.value;
            weight[s.target] += s.weight;
        }
    }
    let out = Image::from_vec(w, h, sum.iter().zip(&weight).map(|(s, wt)| if *wt > 0.0 { to_u8(s / wt) } else { 0 }).collect())?;
    let mask = Image::from_vec(w, h, weight.iter().map(|&wt| wt > 0.0).collect())?;
    Ok((out, mask))
}

/// One pass of 8-neighbor median filling: each masked-out pixel with at
/// least three valid neighbors takes their (lower) median.
pub fn fill_holes(img: &GrayImage, mask: &Mask) -> Result<(GrayImage, Mask)> {
    img.check_same_size(mask)?;
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let mut out_mask = mask.clone();
    let mut vals = Vec::with_capacity(8);
    for u in 0..h {
        for v in 0..w {
            if mask.get(u, v) {
                continue;
            }
            vals.clear();
            for du in -1i64..=1 {
                for dv in -1i64..=1 {
                    let (nu, nv) = (u as i64 + du, v as i64 + dv);
                    if (du, dv) != (0, 0)
                        && nu >= 0
                        && nv >= 0
                        && (nu as usize) < h
                        && (nv as usize) < w
                        && mask.get(nu as usize, nv as usize)
                    {
                        vals.push(img.get(nu as usize, nv as usize));
                    }
                }
            }
            if vals.len() >= 3 {
                vals.sort_unstable();
                out.set(u, v, vals[(vals.len() - 1) / 2]);
                out_mask.set(u, v, true);
            }
        }
    }
    Ok((out, out_mask))
}

/// Red: `|a - b|`, green: `a`, blue: `b`.
pub fn overlay_diff(a: &GrayImage, b: &GrayImage) -> Result<RgbImage> {
    a.check_same_size(b)?;
    Ok(Image::from_fn(a.width(), a.height(), |u, v| {
        let (x, y) = (a.get(u, v), b.get(u, v));
        [x.abs_diff(y), x, y]
    }))
}

/// Mean red channel over the masked pixels.
pub fn mean_red(overlay: &RgbImage, mask: &Mask) -> Result<f64> {
    overlay.check_same_size(mask)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for (p, &m) in overlay.data().iter().zip(mask.data()) {
        if m {
            sum += p[0] as f64;
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Relative depth agreement required for a projected point to count as
/// visible.
const VISIBILITY_TOLERANCE: f64 = 0.01;

fn visible_at(k: &CameraIntrinsics, depth: &FloatImage, p: PixelPoint, z: f64) -> bool {
    if !k.contains(p) {
        return false;
    }
    let (u, v) = (p.u.round() as usize, p.v.round() as usize);
    if u >= depth.height() || v >= depth.width() {
        return false;
    }
    let zm = depth.get(u, v) as f64;
    zm > 0.0 && (zm - z).abs() <= VISIBILITY_TOLERANCE * z
}

/// Exact temporal matches (I1 to I3 on the left, I2 to I4 on the right) of
/// random surface points, kept only where the point is the visible surface
/// in both images according to their rendered depth maps (indexed by
/// `FrameId::index() - 1`).
#[allow(clippy::too_many_arguments)]
pub fn ground_truth_matches(
    scene: &PlaneScene,
    k: &CameraIntrinsics,
    rig: &StereoRigConfig,
    motion: &MotionVelocity,
    model: RotationModel,
    depths: &[FloatImage; 4],
    per_side: usize,
    seed: u64,
) -> Result<(Vec<Correspondence>, Vec<Correspondence>)> {
    if scene.quads.is_empty() {
        return Err(Error::InvalidParameter("scene has no surfaces".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sides = [Vec::new(), Vec::new()];
    for (side, (a, b), out) in [(Side::Left, (FrameId::I1, FrameId::I3)), (Side::Right, (FrameId::I2, FrameId::I4))]
        .into_iter()
        .zip(sides.iter_mut())
        .map(|((s, ids), o)| (s, ids, o))
    {
        let mut attempts = 0;
        while out.len() < per_side && attempts < 200 * per_side {
            attempts += 1;
            let q = &scene.quads[rng.random_range(0..scene.quads.len())];
            let x = q.origin + rng.random::<f64>() * q.edge_s + rng.random::<f64>() * q.edge_t;
            let see = |id: FrameId| {
                project_rs(k, rig, id, motion, &x, model)
                    .ok()
                    .filter(|(p, z)| visible_at(k, &depths[id.index() - 1], *p, *z))
                    .map(|(p, _)| p)
            };
            if let (Some(pa), Some(pb)) = (see(a), see(b)) {
                out.push(Correspondence::new(side, pa, pb));
            }
        }
    }
    let [left, right] = sides;
    if left.len() < MIN_PER_SIDE || right.len() < MIN_PER_SIDE {
        return Err(Error::InsufficientData { needed: MIN_PER_SIDE, left: left.len(), right: right.len() });
    }
    Ok((left, right))
}

/// Valid-depth mask.
pub fn depth_mask(depth: &FloatImage) -> Mask {
    depth.map(|z| z != INVALID && z > 0.0)
}
