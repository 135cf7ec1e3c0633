//! Census/Hamming semi-global matching on a rectified horizontal-baseline
//! pair and disparity-to-depth conversion.
//!
//! Disparity runs along columns: a left pixel `(u, v)` matches the right
//! pixel `(u, v - disp)`.

use crate::image::{FloatImage, GrayImage, Image, INVALID};
use crate::{Error, Result};

/// Census code for pixels whose 5x5 window leaves the image.
pub const CENSUS_BORDER: u32 = u32::MAX;
const CENSUS_RADIUS: usize = 2;
const MAX_COST: u8 = 24;
/// Smallest image side the census window fits in.
pub const MIN_IMAGE_SIZE: usize = 2 * CENSUS_RADIUS + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgmParams {
    pub p1: u16,
    pub p2: u16,
    /// Number of disparity levels, `0..d_max`.
    pub d_max: usize,
    /// Largest left/right disagreement kept, in pixels.
    pub lr_threshold: f32,
    /// Mark left-image columns `< d_max`, which have no possible match, as
    /// invalid.
    pub invalidate_left_band: bool,
}

impl Default for SgmParams {
    fn default() -> Self {
        SgmParams { p1: 10, p2: 120, d_max: 128, lr_threshold: 1.0, invalidate_left_band: true }
    }
}

impl SgmParams {
    pub fn validate(&self) -> Result<()> {
        if self.d_max < 2 {
            return Err(Error::InvalidParameter(format!("d_max must be >= 2, got {}", self.d_max)));
        }
        if self.p1 > self.p2 {
            return Err(Error::InvalidParameter(format!("need p1 <= p2, got {} > {}", self.p1, self.p2)));
        }
        // Eight paths of at most MAX_COST + p2 each must fit in u16.
        if 8 * (MAX_COST as u32 + self.p2 as u32) > u16::MAX as u32 {
            return Err(Error::InvalidParameter(format!("p2 = {} is too large", self.p2)));
        }
        if !(self.lr_threshold >= 0.0) {
            return Err(Error::InvalidParameter(format!("bad left/right threshold {}", self.lr_threshold)));
        }
        Ok(())
    }
}

/// 24-bit 5x5 census: bit set where the neighbor is darker than the center,
/// neighbors in row-major order without the center.
pub fn census_transform(img: &GrayImage) -> Image<u32> {
    let (h, w) = (img.height(), img.width());
    let r = CENSUS_RADIUS;
    Image::from_fn(w, h, |u, v| {
        if u < r || v < r || u + r >= h || v + r >= w {
            return CENSUS_BORDER;
        }
        let c = img.get(u, v);
        let mut code = 0u32;
        for du in 0..=2 * r {
            for dv in 0..=2 * r {
                if du == r && dv == r {
                    continue;
                }
                code = (code << 1) | (img.get(u + du - r, v + dv - r) < c) as u32;
            }
        }
        code
    })
}

/// Matching costs laid out as `[(u * width + v) * d_count + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    pub width: usize,
    pub height: usize,
    pub d_count: usize,
    pub data: Vec<u8>,
}

impl CostVolume {
    #[inline]
    pub fn at(&self, u: usize, v: usize) -> &[u8] {
        let i = (u * self.width + v) * self.d_count;
        &self.data[i..i + self.d_count]
    }
}

pub fn hamming_cost(a: u32, b: u32) -> u8 {
    if a == CENSUS_BORDER || b == CENSUS_BORDER {
        MAX_COST
    } else {
        (a ^ b).count_ones() as u8
    }
}

pub fn cost_volume(left: &Image<u32>, right: &Image<u32>, d_count: usize) -> Result<CostVolume> {
    left.check_same_size(right)?;
    let (w, h) = (left.width(), left.height());
    let mut data = vec![MAX_COST; w * h * d_count];
    for u in 0..h {
        for v in 0..w {
            let base = (u * w + v) * d_count;
            for d in 0..d_count.min(v + 1) {
                data[base + d] = hamming_cost(left.get(u, v), right.get(u, v - d));
            }
        }
    }
    Ok(CostVolume { width: w, height: h, d_count, data })
}

/// One step of the path recurrence:
/// `L(d) = C(d) + min(P(d), P(d±1) + p1, min P + p2) - min P`.
#[inline]
fn path_step(cost: &[u8], prev: Option<(&[u16], u16)>, p1: u16, p2: u16, out: &mut [u16]) -> u16 {
    let n = cost.len();
    let mut best = u16::MAX;
    match prev {
        None => {
            for d in 0..n {
                out[d] = cost[d] as u16;
                best = best.min(out[d]);
            }
        }
        Some((p, pmin)) => {
            let jump = pmin + p2;
            for d in 0..n {
                let mut m = p[d].min(jump);
                if d > 0 {
                    m = m.min(p[d - 1] + p1);
                }
                if d + 1 < n {
                    m = m.min(p[d + 1] + p1);
                }
                out[d] = cost[d] as u16 + m - pmin;
                best = best.min(out[d]);
            }
        }
    }
    best
}

fn add_into(acc: &mut [u16], x: &[u16]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += *b;
    }
}

/// Left-to-right and right-to-left paths of one row, added into `acc_row`.
fn horizontal_paths(cv: &CostVolume, u: usize, p1: u16, p2: u16, acc_row: &mut [u16]) {
    let (w, n) = (cv.width, cv.d_count);
    let mut prev = vec![0u16; n];
    let mut cur = vec![0u16; n];
    for forward in [true, false] {
        let mut pmin = None;
        for i in 0..w {
            let v = if forward { i } else { w - 1 - i };
            let m = path_step(cv.at(u, v), pmin.map(|m| (&prev[..], m)), p1, p2, &mut cur);
            add_into(&mut acc_row[v * n..(v + 1) * n], &cur);
            std::mem::swap(&mut prev, &mut cur);
            pmin = Some(m);
        }
    }
}

/// Computes one row of a vertical or diagonal path from the previous row.
#[allow(clippy::too_many_arguments)]
fn row_step(cv: &CostVolume, u: usize, dv: isize, prev: Option<(&[u16], &[u16])>, p1: u16, p2: u16, cur: &mut [u16], cur_min: &mut [u16]) {
    let (w, n) = (cv.width, cv.d_count);
    let column = |(v, (out, m)): (usize, (&mut [u16], &mut u16))| {
        let pv = v as isize - dv;
        let p = match prev {
            Some((pr, pm)) if pv >= 0 && (pv as usize) < w => {
                let pv = pv as usize;
                Some((&pr[pv * n..(pv + 1) * n], pm[pv]))
            }
            _ => None,
        };
        *m = path_step(cv.at(u, v), p, p1, p2, out);
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cur.par_chunks_mut(n).zip(cur_min.par_iter_mut()).enumerate().for_each(column);
    }
    #[cfg(not(feature = "parallel"))]
    {
        cur.chunks_mut(n).zip(cur_min.iter_mut()).enumerate().for_each(column);
    }
}

/// Sum of the eight path costs `S(p, d)`, same layout as the cost volume.
/// Integer arithmetic throughout, so the result does not depend on
/// scheduling.
pub fn aggregate_costs(cv: &CostVolume, p1: u16, p2: u16) -> Vec<u16> {
    let (w, h, n) = (cv.width, cv.height, cv.d_count);
    let mut acc = vec![0u16; w * h * n];
    if w == 0 || h == 0 {
        return acc;
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        acc.par_chunks_mut(w * n).enumerate().for_each(|(u, row)| horizontal_paths(cv, u, p1, p2, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        acc.chunks_mut(w * n).enumerate().for_each(|(u, row)| horizontal_paths(cv, u, p1, p2, row));
    }

    for down in [true, false] {
        let mut prev = [vec![0u16; w * n], vec![0u16; w * n], vec![0u16; w * n]];
        let mut prev_min = [vec![0u16; w], vec![0u16; w], vec![0u16; w]];
        let mut cur = prev.clone();
        let mut cur_min = prev_min.clone();
        for i in 0..h {
            let u = if down { i } else { h - 1 - i };
            for (k, dv) in [-1isize, 0, 1].into_iter().enumerate() {
                let p = (i > 0).then(|| (&prev[k][..], &prev_min[k][..]));
                row_step(cv, u, dv, p, p1, p2, &mut cur[k], &mut cur_min[k]);
                add_into(&mut acc[u * w * n..(u + 1) * w * n], &cur[k]);
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut prev_min, &mut cur_min);
        }
    }
    acc
}

/// Index of the smallest value, first on ties.
fn argmin(xs: impl Iterator<Item = u16>) -> Option<(usize, u16)> {
    xs.enumerate().fold(None, |best, (i, x)| match best {
        Some((_, b)) if b <= x => best,
        _ => Some((i, x)),
    })
}

/// Winner-take-all with parabolic sub-pixel refinement and a left/right
/// consistency check, the right disparities being read from the same
/// aggregated volume.
pub fn disparity_wta(agg: &[u16], width: usize, height: usize, params: &SgmParams) -> FloatImage {
    let n = params.d_max;
    let at = |u: usize, v: usize| &agg[(u * width + v) * n..(u * width + v + 1) * n];
    let mut out = FloatImage::new(width, height, INVALID);
    let r = CENSUS_RADIUS;
    for u in r..height.saturating_sub(r) {
        let right: Vec<Option<usize>> =
            (0..width).map(|vr| argmin((0..n).take_while(|d| vr + d < width).map(|d| at(u, vr + d)[d])).map(|(d, _)| d)).collect();
        for v in r..width.saturating_sub(r) {
            if params.invalidate_left_band && v < n {
                continue;
            }
            let s = at(u, v);
            let Some((d, _)) = argmin(s.iter().take(v + 1).copied()) else { continue };
            let mut disp = d as f32;
            if d > 0 && d + 1 < n.min(v + 1) {
                let (a, b, c) = (s[d - 1] as f32, s[d] as f32, s[d + 1] as f32);
                let denom = a - 2.0 * b + c;
                if denom > 0.0 {
                    disp += (a - c) / (2.0 * denom);
                }
            }
            let vr = (v as f32 - disp).round();
            if vr < r as f32 {
                continue;
            }
            match right[vr as usize] {
                Some(dr) if (dr as f32 - disp).abs() <= params.lr_threshold => out.set(u, v, disp),
                _ => {}
            }
        }
    }
    out
}

/// Full pipeline: census, cost volume, eight-path aggregation, WTA.
pub fn compute_disparity(left: &GrayImage, right: &GrayImage, params: &SgmParams) -> Result<FloatImage> {
    params.validate()?;
    left.check_same_size(right)?;
    let (w, h) = (left.width(), left.height());
    if w < MIN_IMAGE_SIZE || h < MIN_IMAGE_SIZE {
        return Err(Error::ImageTooSmall { width: w, height: h, min: MIN_IMAGE_SIZE });
    }
    let cv = cost_volume(&census_transform(left), &census_transform(right), params.d_max)?;
    let agg = aggregate_costs(&cv, params.p1, params.p2);
    Ok(disparity_wta(&agg, w, h, params))
}

/// `lambda = fy * 2b / disparity`; the column focal length applies because
/// the baseline runs along image columns.
pub fn disparity_to_depth(disp: f32, fy: f64, half_baseline: f64) -> f32 {
    if disp == INVALID || !(disp > 0.0) {
        INVALID
    } else {
        (fy * 2.0 * half_baseline / disp as f64) as f32
    }
}

pub fn depth_map(disp: &FloatImage, fy: f64, half_baseline: f64) -> FloatImage {
    disp.map(|d| disparity_to_depth(d, fy, half_baseline))
}
