//! Synthetic degradation of clean images for the six low-level vision tasks.
//!
//! Each degradation is an analytic, seeded, pure function of the clean image
//! and its spec, so ground-truth training pairs exist without captured
//! datasets.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum DegradationKind {
    None,
    Noise,
    Rain,
    Raindrop,
    Haze,
    Shadow,
    Mask,
}

impl DegradationKind {
    pub const ALL: [DegradationKind; 7] = [
        DegradationKind::None,
        DegradationKind::Noise,
        DegradationKind::Rain,
        DegradationKind::Raindrop,
        DegradationKind::Haze,
        DegradationKind::Shadow,
        DegradationKind::Mask,
    ];

    /// Stable class index used by the controller. `none` is class 0.
    pub fn class_index(self) -> usize {
        Self::ALL.iter().position(|k| *k == self).unwrap()
    }

    pub fn from_class_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            DegradationKind::None => "none",
            DegradationKind::Noise => "noise",
            DegradationKind::Rain => "rain",
            DegradationKind::Raindrop => "raindrop",
            DegradationKind::Haze => "haze",
            DegradationKind::Shadow => "shadow",
            DegradationKind::Mask => "mask",
        }
    }
}

impl std::str::FromStr for DegradationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::UnsupportedDegradation(s.to_string()))
    }
}

/// Parameterized description of one task's synthetic corruption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub kind: DegradationKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

/// Closed parameter ranges per kind; anything outside is a construction error.
fn param_range(name: &str) -> Option<(f64, f64)> {
    match name {
        "noise_sigma" => Some((0.0, 1.0)),
        "mask_ratio" => Some((0.0, 1.0)),
        "haze_beta" => Some((0.0, f64::INFINITY)),
        "rain_density" => Some((0.0, f64::INFINITY)),
        "drop_count" => Some((0.0, f64::INFINITY)),
        "shadow_strength" => Some((0.0, 1.0)),
        _ => None,
    }
}

impl DegradationSpec {
    pub fn new(kind: DegradationKind, params: &[(&str, f64)], seed: u64) -> Result<Self> {
        let spec = Self {
            kind,
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self {
            kind: DegradationKind::None,
            params: BTreeMap::new(),
            seed: 0,
        }
    }

    /// Default parameterization for each task, matching the training setup.
    pub fn default_for(kind: DegradationKind, seed: u64) -> Self {
        let params: &[(&str, f64)] = match kind {
            DegradationKind::None => &[],
            DegradationKind::Noise => &[("noise_sigma", 50.0 / 255.0)],
            DegradationKind::Rain => &[("rain_density", 0.5)],
            DegradationKind::Raindrop => &[("drop_count", 6.0)],
            DegradationKind::Haze => &[("haze_beta", 1.2)],
            DegradationKind::Shadow => &[("shadow_strength", 0.6)],
            DegradationKind::Mask => &[("mask_ratio", 0.25)],
        };
        Self::new(kind, params, seed).unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in &self.params {
            let (lo, hi) = param_range(name)
                .ok_or_else(|| Error::Validation(format!("unknown parameter {name}")))?;
            if !value.is_finite() || *value < lo || *value > hi {
                return Err(Error::Validation(format!(
                    "parameter {name}={value} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

/// A (degraded, ideal) training pair.
#[derive(Debug, Clone)]
pub struct TrainPair {
    pub degraded: ImageTensor,
    pub ideal: ImageTensor,
    pub spec: DegradationSpec,
}

fn rng_for(spec: &DegradationSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms per call keeps the stream layout simple.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn apply_noise(ideal: &ImageTensor, spec: &DegradationSpec) -> ImageTensor {
    let sigma = spec.param("noise_sigma", 50.0 / 255.0);
    let mut rng = rng_for(spec);
    let mut out = ideal.data.clone();
    for v in out.iter_mut() {
        *v += sigma * sample_standard_normal(&mut rng);
    }
    ImageTensor::from_clamped(out)
}

/// Additive oriented streak field.
fn apply_rain(ideal: &ImageTensor, spec: &DegradationSpec) -> ImageTensor {
    let density = spec.param("rain_density", 0.5);
    let (h, w, _) = ideal.shape();
    let mut rng = rng_for(spec);
    let streaks = ((h * w) as f64 * density * 0.02).round() as usize;
    let mut out = ideal.data.clone();
    for _ in 0..streaks {
        let x0 = rng.gen_range(0..w) as f64;
        let y0 = rng.gen_range(0..h) as f64;
        let len = rng.gen_range(3..(h / 2).max(4)) as f64;
        let angle = rng.gen_range(-0.35..-0.15) + std::f64::consts::FRAC_PI_2;
        let (dx, dy) = (angle.cos(), angle.sin());
        let strength = rng.gen_range(0.2..0.5);
        let mut t = 0.0;
        while t < len {
            let x = (x0 + t * dx).round() as isize;
            let y = (y0 + t * dy).round() as isize;
            if x >= 0 && (x as usize) < w && y >= 0 && (y as usize) < h {
                for c in 0..3 {
                    out[[y as usize, x as usize, c]] += strength;
                }
            }
            t += 1.0;
        }
    }
    ImageTensor::from_clamped(out)
}

/// Local blur discs standing in for adherent raindrops.
fn apply_raindrop(ideal: &ImageTensor, spec: &DegradationSpec) -> ImageTensor {
    let count = spec.param("drop_count", 6.0).round() as usize;
    let (h, w, ch) = ideal.shape();
    let mut rng = rng_for(spec);
    let mut out = ideal.data.clone();
    for _ in 0..count {
        let cx = rng.gen_range(0..w) as isize;
        let cy = rng.gen_range(0..h) as isize;
        let r = rng.gen_range(2..(w.min(h) / 4).max(3)) as isize;
        for y in (cy - r).max(0)..(cy + r + 1).min(h as isize) {
            for x in (cx - r).max(0)..(cx + r + 1).min(w as isize) {
                let d2 = (x - cx).pow(2) + (y - cy).pow(2);
                if d2 <= r * r {
                    // box-average over a small window, brightened toward white
                    for c in 0..ch {
                        let mut acc = 0.0;
                        let mut n = 0.0;
                        for yy in (y - 2).max(0)..(y + 3).min(h as isize) {
                            for xx in (x - 2).max(0)..(x + 3).min(w as isize) {
                                acc += ideal.data[[yy as usize, xx as usize, c]];
                                n += 1.0;
                            }
                        }
                        out[[y as usize, x as usize, c]] = 0.7 * acc / n + 0.3;
                    }
                }
            }
        }
    }
    ImageTensor::from_clamped(out)
}

/// Fixed synthetic depth map used by the scattering model: depth increases
/// from the bottom of the frame to the top, as in an outdoor scene.
fn depth_map(h: usize, w: usize) -> Array2<f64> {
    Array2::from_shape_fn((h, w), |(y, _)| {
        0.2 + 0.8 * (1.0 - y as f64 / (h.max(2) - 1) as f64)
    })
}

/// Atmospheric scattering I' = I*exp(-beta*d) + A*(1 - exp(-beta*d)).
fn apply_haze(ideal: &ImageTensor, spec: &DegradationSpec) -> ImageTensor {
    let beta = spec.param("haze_beta", 1.2);
    let airlight = 0.9;
    let (h, w, ch) = ideal.shape();
    let depth = depth_map(h, w);
    let mut out = ideal.data.clone();
    for y in 0..h {
        for x in 0..w {
            let t = (-beta * depth[[y, x]]).exp();
            for c in 0..ch {
                out[[y, x, c]] = ideal.data[[y, x, c]] * t + airlight * (1.0 - t);
            }
        }
    }
    ImageTensor::from_clamped(out)
}

/// Multiplicative luminance mask over a random half-plane with a soft edge.
fn apply_shadow(ideal: &ImageTensor, spec: &DegradationSpec) -> ImageTensor {
    let strength = spec.param("shadow_strength", 0.6);
    let (h, w, ch) = ideal.shape();
    let mut rng = rng_for(spec);
    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let offset: f64 = rng.gen_range(-0.2..0.2);
    let (nx, ny) = (angle.cos(), angle.sin());
    let mut out = ideal.data.clone();
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / w as f64 - 0.5;
            let v = y as f64 / h as f64 - 0.5;
            let signed = u * nx + v * ny + offset;
            let soft = 1.0 / (1.0 + (-signed * 25.0).exp());
            let gain = 1.0 - strength * soft;
            for c in 0..ch {
                out[[y, x, c]] *= gain;
            }
        }
    }
    ImageTensor::from_clamped(out)
}

/// Pixel positions masked for a given spec, in raster order.
/// Exactly round(mask_ratio * H * W) positions are chosen.
pub fn mask_positions(h: usize, w: usize, spec: &DegradationSpec) -> Vec<(usize, usize)> {
    let ratio = spec.param("mask_ratio", 0.25);
    let total = h * w;
    let k = (ratio * total as f64).round() as usize;
    let mut rng = rng_for(spec);
    // partial Fisher-Yates over pixel indices
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..k.min(total) {
        let j = rng.gen_range(i..total);
        idx.swap(i, j);
    }
    let mut chosen: Vec<usize> = idx[..k.min(total)].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|i| (i / w, i % w)).collect()
}

/// Masked pixels are set to a fill value of 0; the restorer sees the task
/// only through the control signal, never an explicit mask channel.
fn apply_mask(ideal: &ImageTensor, spec: &DegradationSpec) -> ImageTensor {
    let (h, w, ch) = ideal.shape();
    let mut out = ideal.data.clone();
    for (y, x) in mask_positions(h, w, spec) {
        for c in 0..ch {
            out[[y, x, c]] = 0.0;
        }
    }
    ImageTensor::from_clamped(out)
}

/// Applies `spec` to a clean image. Pure in all arguments including the seed.
pub fn apply_degradation(ideal: &ImageTensor, spec: &DegradationSpec) -> Result<ImageTensor> {
    spec.validate()?;
    let out = match spec.kind {
        DegradationKind::None => ideal.clone(),
        DegradationKind::Noise => apply_noise(ideal, spec),
        DegradationKind::Rain => apply_rain(ideal, spec),
        DegradationKind::Raindrop => apply_raindrop(ideal, spec),
        DegradationKind::Haze => apply_haze(ideal, spec),
        DegradationKind::Shadow => apply_shadow(ideal, spec),
        DegradationKind::Mask => apply_mask(ideal, spec),
    };
    debug_assert!(out.data.iter().all(|v| (0.0..=1.0).contains(v)));
    Ok(out)
}

pub fn make_pair(ideal: &ImageTensor, spec: &DegradationSpec) -> Result<TrainPair> {
    Ok(TrainPair {
        degraded: apply_degradation(ideal, spec)?,
        ideal: ideal.clone(),
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::synthetic_image;

    #[test]
    fn none_is_identity() {
        let img = synthetic_image(16, 16, 1);
        let out = apply_degradation(&img, &DegradationSpec::none()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn noise_matches_requested_sigma() {
        // empirical std of the added noise over a large flat image
        let img = ImageTensor {
            data: ndarray::Array3::from_elem((64, 64, 3), 0.5),
        };
        let sigma = 50.0 / 255.0;
        let spec =
            DegradationSpec::new(DegradationKind::Noise, &[("noise_sigma", sigma)], 11).unwrap();
        let out = apply_degradation(&img, &spec).unwrap();
        let diffs: Vec<f64> = out
            .data
            .iter()
            .zip(img.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
        // clamping at [0,1] trims the tails slightly at 0.5 +- ~2.5 sigma
        assert!((var.sqrt() - sigma).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn determinism_under_fixed_seed() {
        let img = synthetic_image(32, 32, 2);
        for kind in DegradationKind::ALL {
            let spec = DegradationSpec::default_for(kind, 7);
            let a = make_pair(&img, &spec).unwrap();
            let b = make_pair(&img, &spec).unwrap();
            assert_eq!(a.degraded, b.degraded, "kind {kind:?}");
            assert_eq!(a.ideal.shape(), a.degraded.shape());
        }
    }

    #[test]
    fn mask_count_matches_oracle() {
        // independent oracle: enumerate pixels that differ from the ideal
        let img = ImageTensor {
            data: ndarray::Array3::from_elem((64, 64, 3), 0.8),
        };
        let spec =
            DegradationSpec::new(DegradationKind::Mask, &[("mask_ratio", 0.25)], 3).unwrap();
        let out = apply_degradation(&img, &spec).unwrap();
        let mut masked = 0usize;
        for y in 0..64 {
            for x in 0..64 {
                if out.data[[y, x, 0]] == 0.0 {
                    masked += 1;
                }
            }
        }
        assert_eq!(masked, (0.25f64 * 64.0 * 64.0).round() as usize);
        assert_eq!(masked, mask_positions(64, 64, &spec).len());
    }

    #[test]
    fn haze_beta_zero_is_identity() {
        let img = synthetic_image(16, 16, 4);
        let spec = DegradationSpec::new(DegradationKind::Haze, &[("haze_beta", 0.0)], 1).unwrap();
        let out = apply_degradation(&img, &spec).unwrap();
        for (a, b) in out.data.iter().zip(img.data.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn param_out_of_range_rejected() {
        assert!(DegradationSpec::new(DegradationKind::Noise, &[("noise_sigma", 1.5)], 0).is_err());
        assert!(DegradationSpec::new(DegradationKind::Mask, &[("mask_ratio", -0.1)], 0).is_err());
        assert!(DegradationSpec::new(DegradationKind::Haze, &[("bogus", 0.1)], 0).is_err());
    }

    #[test]
    fn noise_severity_monotone_in_sigma() {
        // statistical: over many seeds, mean MSE is non-decreasing in sigma
        let img = synthetic_image(24, 24, 9);
        let sigmas = [0.05, 0.1, 0.2, 0.4];
        let mut means = Vec::new();
        for sigma in sigmas {
            let mut acc = 0.0;
            for seed in 0..120u64 {
                let spec =
                    DegradationSpec::new(DegradationKind::Noise, &[("noise_sigma", sigma)], seed)
                        .unwrap();
                let out = apply_degradation(&img, &spec).unwrap();
                acc += out.mse(&img).unwrap();
            }
            means.push(acc / 120.0);
        }
        for pair in means.windows(2) {
            assert!(pair[1] > pair[0] - 1e-6, "means {means:?}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = DegradationSpec::default_for(DegradationKind::Haze, 42);
        let json = serde_json::to_string(&spec).unwrap();
        let back: DegradationSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        assert!(json.contains("\"kind\":\"haze\""));
    }
}
