//! Row-major raster containers indexed by `(row, column)`.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type GrayImage = Image<u8>;
pub type FloatImage = Image<f32>;
pub type RgbImage = Image<[u8; 3]>;
pub type Mask = Image<bool>;

/// Marker for pixels without a disparity or depth estimate.
pub const INVALID: f32 = -1.0;

impl<T: Copy> Image<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Image { width, height, data: vec![fill; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!("{} samples for a {width}x{height} image", data.len())));
        }
        Ok(Image { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for u in 0..height {
            for v in 0..width {
                data.push(f(u, v));
            }
        }
        Image { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> T {
        self.data[u * self.width + v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: T) {
        self.data[u * self.width + v] = value;
    }

    pub fn row(&self, u: usize) -> &[T] {
        &self.data[u * self.width..(u + 1) * self.width]
    }

    pub fn row_mut(&mut self, u: usize) -> &mut [T] {
        &mut self.data[u * self.width..(u + 1) * self.width]
    }

    pub fn same_size<U>(&self, other: &Image<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_same_size<U>(&self, other: &Image<U>) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("{}x{} vs {}x{}", self.width, self.height, other.width, other.height)))
        }
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Image<U> {
        Image { width: self.width, height: self.height, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

impl GrayImage {
    /// Bilinear sample at a real-valued `(u, v)`; `None` outside the image.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Option<f64> {
        let (h, w) = (self.height as f64, self.width as f64);
        if !(u >= 0.0 && v >= 0.0 && u <= h - 1.0 && v <= w - 1.0) {
            return None;
        }
        let (u0, v0) = (u.floor() as usize, v.floor() as usize);
        let (u1, v1) = ((u0 + 1).min(self.height - 1), (v0 + 1).min(self.width - 1));
        let (fu, fv) = (u - u0 as f64, v - v0 as f64);
        let p = |a, b| self.get(a, b) as f64;
        Some((1.0 - fu) * ((1.0 - fv) * p(u0, v0) + fv * p(u0, v1)) + fu * ((1.0 - fv) * p(u1, v0) + fv * p(u1, v1)))
    }
}

/// Rounds and clamps an intensity to `u8`.
pub fn to_u8(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

/// Root-mean-square intensity difference over pixels where `mask` is set;
/// `None` when the mask is empty.
pub fn masked_rmse(a: &GrayImage, b: &GrayImage, mask: &Mask) -> Result<Option<f64>> {
    a.check_same_size(b)?;
    a.check_same_size(mask)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for ((&x, &y), &m) in a.data.iter().zip(&b.data).zip(&mask.data) {
        if m {
            sum += (x as f64 - y as f64).powi(2);
            n += 1;
        }
    }
    Ok((n > 0).then(|| (sum / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let img = Image::from_fn(3, 2, |u, v| (10 * u + v) as u8);
        assert_eq!(img.data(), &[0, 1, 2, 10, 11, 12]);
        assert_eq!(img.get(1, 2), 12);
        assert_eq!(img.row(1), &[10, 11, 12]);
        assert!(Image::from_vec(3, 2, vec![0u8; 5]).is_err());
    }

    #[test]
    fn bilinear() {
        let img = Image::from_fn(2, 2, |u, v| (100 * u + 10 * v) as u8);
        assert_eq!(img.sample_bilinear(0.5, 0.5), Some(55.0));
        assert_eq!(img.sample_bilinear(1.0, 1.0), Some(110.0));
        assert_eq!(img.sample_bilinear(-0.1, 0.0), None);
    }

    #[test]
    fn rmse() {
        let a = GrayImage::new(2, 2, 10);
        let b = Image::from_vec(2, 2, vec![10, 13, 10, 6]).unwrap();
        let all = Mask::new(2, 2, true);
        assert_eq!(masked_rmse(&a, &b, &all).unwrap(), Some(((9.0 + 16.0) / 4.0f64).sqrt()));
        assert_eq!(masked_rmse(&a, &b, &Mask::new(2, 2, false)).unwrap(), None);
    }
}
