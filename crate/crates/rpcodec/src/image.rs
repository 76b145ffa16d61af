//! Image tensors: H×W×C arrays of `f64` pixels in `[0, 1]`.

use ndarray::Array3;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An image held as an `(H, W, C)` array with pixel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub data: Array3<f64>,
}

impl ImageTensor {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        if !data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err(Error::Validation(
                "image pixels must be finite and in [0, 1]".into(),
            ));
        }
        Ok(Self { data })
    }

    /// Builds an image, clamping every pixel into `[0, 1]`.
    pub fn from_clamped(mut data: Array3<f64>) -> Self {
        data.mapv_inplace(|v| v.clamp(0.0, 1.0));
        Self { data }
    }

    pub fn zeros(h: usize, w: usize, c: usize) -> Self {
        Self {
            data: Array3::zeros((h, w, c)),
        }
    }

    pub fn height(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn width(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn channels(&self) -> usize {
        self.data.shape()[2]
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        let s = self.data.shape();
        (s[0], s[1], s[2])
    }

    pub fn pixels(&self) -> usize {
        self.height() * self.width()
    }

    /// Mean squared error against another image of the same shape.
    pub fn mse(&self, other: &ImageTensor) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::Validation("shape mismatch in mse".into()));
        }
        let n = self.data.len() as f64;
        let sum: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(sum / n)
    }

    /// SHA-256 over the little-endian byte image of the raw pixel data.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for v in self.data.iter() {
            hasher.update(v.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Deterministic procedural test image: smooth gradients plus a few blobs,
/// parameterized by a seed so fixture sets are reproducible without shipping
/// image files.
pub fn synthetic_image(h: usize, w: usize, seed: u64) -> ImageTensor {
    let mut data = Array3::zeros((h, w, 3));
    let s = seed as f64;
    let fx = 1.0 + (seed % 5) as f64 * 0.7;
    let fy = 1.0 + (seed / 5 % 5) as f64 * 0.5;
    let cx = 0.2 + (seed % 7) as f64 / 8.0;
    let cy = 0.3 + (seed % 3) as f64 / 5.0;
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            let d2 = (u - cx).powi(2) + (v - cy).powi(2);
            let blob = (-d2 * 30.0).exp();
            let base = 0.5 + 0.25 * (fx * u * std::f64::consts::TAU + s * 0.1).sin()
                + 0.15 * (fy * v * std::f64::consts::TAU + s * 0.31).cos();
            data[[y, x, 0]] = (base + 0.3 * blob).clamp(0.0, 1.0);
            data[[y, x, 1]] = (base * 0.8 + 0.2 * blob + 0.1 * (u * 9.0 + s).sin()).clamp(0.0, 1.0);
            data[[y, x, 2]] = (0.9 - base * 0.5 + 0.25 * blob).clamp(0.0, 1.0);
        }
    }
    ImageTensor { data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        let mut d = Array3::zeros((2, 2, 3));
        d[[0, 0, 0]] = 1.5;
        assert!(ImageTensor::new(d).is_err());
    }

    #[test]
    fn clamp_constructor_saturates() {
        let mut d = Array3::zeros((2, 2, 3));
        d[[0, 0, 0]] = 1.5;
        d[[1, 1, 2]] = -0.3;
        let img = ImageTensor::from_clamped(d);
        assert_eq!(img.data[[0, 0, 0]], 1.0);
        assert_eq!(img.data[[1, 1, 2]], 0.0);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = synthetic_image(16, 16, 3);
        let b = synthetic_image(16, 16, 3);
        assert_eq!(a.content_hash(), b.content_hash());
        let c = synthetic_image(16, 16, 4);
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn mse_of_identical_is_zero() {
        let a = synthetic_image(8, 8, 0);
        assert_eq!(a.mse(&a).unwrap(), 0.0);
    }
}
