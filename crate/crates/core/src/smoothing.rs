//! Temporal latent smoothing.
//!
//! Each `(f, h, w)` site gets a channel-summed deviation score
//! `v = Σ_c |x − μ_{c,h,w}| / σ_c`, where `μ` is the temporal mean and `σ_c`
//! the spatial standard deviation of `μ` in channel `c`. Sites scoring below
//! the threshold are treated as static background and replaced, in every
//! channel, by their temporal mean. Moving content scores high and passes
//! through untouched.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{Dims, LatentVideo};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    pub threshold: f64,
    /// Lower bound on `σ_c` when a channel's mean image is flat.
    #[serde(default = "default_sigma_floor")]
    pub sigma_floor: f64,
}

fn default_sigma_floor() -> f64 {
    1e-8
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            threshold: 2.0,
            sigma_floor: default_sigma_floor(),
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold >= 0.0) {
            return Err(Error::param(
                "threshold",
                format!("must be >= 0, got {}", self.threshold),
            ));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(Error::param(
                "sigma_floor",
                format!("must be finite and > 0, got {}", self.sigma_floor),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingStats {
    pub dims: Dims,
    /// Temporal mean, laid out `(c, h, w)`.
    pub mu: Vec<f64>,
    /// Population std of `mu` over `(h, w)`, per channel.
    pub sigma_c: Vec<f64>,
    /// `|x − μ|`, laid out like the input `(f, c, h, w)`.
    pub delta: Vec<f64>,
    /// Normalized deviation summed over channels, laid out `(f, h, w)`.
    pub v: Vec<f64>,
}

impl SmoothingStats {
    pub fn delta_at(&self, c: usize, f: usize, h: usize, w: usize) -> f64 {
        self.delta[self.dims.index(f, c, h, w)]
    }

    pub fn v_at(&self, f: usize, h: usize, w: usize) -> f64 {
        self.v[(f * self.dims.height + h) * self.dims.width + w]
    }
}

pub fn compute_smoothing_stats(x: &LatentVideo, sigma_floor: f64) -> SmoothingStats {
    let d = x.dims();
    let (frames, k, plane) = (d.frames, d.frame_len(), d.plane_len());
    // Mean as x_0 + mean(x_f − x_0): exact whenever the series is constant.
    let mu: Vec<f64> = (0..k)
        .map(|j| {
            let base = x.data()[j];
            let offset: f64 = (0..frames).map(|f| x.data()[f * k + j] - base).sum();
            base + offset / frames as f64
        })
        .collect();
    let sigma_c: Vec<f64> = mu
        .chunks_exact(plane)
        .map(|m| {
            let mean = m.iter().sum::<f64>() / plane as f64;
            (m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / plane as f64).sqrt()
        })
        .collect();
    let delta: Vec<f64> = x
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| (v - mu[i % k]).abs())
        .collect();
    let mut v = vec![0.0; frames * plane];
    for f in 0..frames {
        for (c, &s) in sigma_c.iter().enumerate() {
            let norm = s.max(sigma_floor);
            for p in 0..plane {
                v[f * plane + p] += delta[f * k + c * plane + p] / norm;
            }
        }
    }
    SmoothingStats {
        dims: d,
        mu,
        sigma_c,
        delta,
        v,
    }
}

/// Smoothed video plus the `(f, h, w)` mask of replaced sites.
pub fn temporal_smooth_with_mask(x: &LatentVideo, cfg: &SmoothingConfig) -> (LatentVideo, Vec<bool>) {
    let stats = compute_smoothing_stats(x, cfg.sigma_floor);
    let d = x.dims();
    let (k, plane) = (d.frame_len(), d.plane_len());
    let replaced: Vec<bool> = stats.v.iter().map(|&v| v < cfg.threshold).collect();
    let mut out = x.clone();
    let data = out.data_mut();
    for f in 0..d.frames {
        for p in 0..plane {
            if replaced[f * plane + p] {
                for c in 0..d.channels {
                    data[f * k + c * plane + p] = stats.mu[c * plane + p];
                }
            }
        }
    }
    (out, replaced)
}

pub fn temporal_smooth(x: &LatentVideo, cfg: &SmoothingConfig) -> LatentVideo {
    temporal_smooth_with_mask(x, cfg).0
}

/// Maps a tap offset onto `0..n` by half-sample reflection; `None` when the
/// reflected index is still out of range.
fn reflect(i: isize, n: usize) -> Option<usize> {
    let n = n as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - i - 1
    } else {
        i
    };
    (0..n).contains(&j).then_some(j as usize)
}

fn convolve_time(x: &LatentVideo, kernel: &[f64]) -> LatentVideo {
    let d = x.dims();
    let k = d.frame_len();
    let radius = (kernel.len() / 2) as isize;
    let mut out = x.clone();
    let data = out.data_mut();
    for f in 0..d.frames {
        for j in 0..k {
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (tap, &w) in kernel.iter().enumerate() {
                if let Some(src) = reflect(f as isize + tap as isize - radius, d.frames) {
                    acc += w * x.data()[src * k + j];
                    wsum += w;
                }
            }
            data[f * k + j] = acc / wsum;
        }
    }
    out
}

fn taps(width: usize) -> Result<usize> {
    if width == 0 {
        return Err(Error::param("width", "must be at least 1"));
    }
    Ok(2 * (width / 2) + 1)
}

/// Box filter over `width` frames (even widths round up to the next odd
/// length), reflected at the ends.
pub fn uniform_time_smooth(x: &LatentVideo, width: usize) -> Result<LatentVideo> {
    let n = taps(width)?;
    Ok(convolve_time(x, &vec![1.0; n]))
}

/// Gaussian filter spanning `width` frames with standard deviation
/// `radius / 2`, reflected at the ends.
pub fn gaussian_time_smooth(x: &LatentVideo, width: usize) -> Result<LatentVideo> {
    let n = taps(width)?;
    let radius = (n / 2) as f64;
    if radius == 0.0 {
        return Ok(x.clone());
    }
    let sd = radius / 2.0;
    let kernel: Vec<f64> = (0..n)
        .map(|i| {
            let o = i as f64 - radius;
            (-o * o / (2.0 * sd * sd)).exp()
        })
        .collect();
    Ok(convolve_time(x, &kernel))
}
