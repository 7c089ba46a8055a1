//! Reverse-diffusion steps and step-noise generation.

use serde::{Deserialize, Serialize};

use crate::denoisers::{guided_eps, Condition, Denoiser};
use crate::error::{Error, Result};
use crate::latent::{Dims, LatentVideo};
use crate::rng::RngStream;
use crate::schedule::{NoiseSchedule, StepMap};

/// Step-noise shaping. `r_*` is the share of noise common to all frames
/// after a step by that model; `gamma` scales the whole noise term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub r_video: f64,
    pub r_image: f64,
    pub gamma: f64,
}

impl Default for EntropyConfig {
    /// Plain DDPM noise.
    fn default() -> Self {
        Self {
            r_video: 0.0,
            r_image: 0.0,
            gamma: 1.0,
        }
    }
}

impl EntropyConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("r_video", self.r_video), ("r_image", self.r_image)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::param(name, format!("must be in [0, 1], got {r}")));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(
                "gamma",
                format!("must be finite and >= 0, got {}", self.gamma),
            ));
        }
        Ok(())
    }
}

/// `z^f = √r·z_shared + √(1−r)·z_ind^f`: unit variance per entry and
/// correlation `r` between frames at the same `(c, h, w)`.
///
/// Always draws one shared frame followed by `F` independent frames, so the
/// stream advances by the same amount for every `r`.
pub fn sample_correlated_noise(dims: Dims, r: f64, rng: &mut RngStream) -> Result<LatentVideo> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::param("r", format!("must be in [0, 1], got {r}")));
    }
    dims.validate()?;
    let k = dims.frame_len();
    let mut shared = vec![0.0; k];
    rng.fill_standard_normal(&mut shared);
    let mut data = vec![0.0; dims.len()];
    rng.fill_standard_normal(&mut data);
    let (a, b) = (r.sqrt(), (1.0 - r).sqrt());
    for (i, v) in data.iter_mut().enumerate() {
        *v = a * shared[i % k] + b * *v;
    }
    LatentVideo::from_vec(dims, data)
}

/// One ancestral DDPM step from `t` to `t_prev`:
/// `(1/√α)·(s_t − β/√(1−ᾱ_t)·ε̂) + γ·σ·z`, where the noise term is dropped
/// when `t_prev = 0`.
pub fn ddpm_step(
    s_t: &LatentVideo,
    (t, t_prev): (usize, usize),
    eps_hat: &LatentVideo,
    sched: &NoiseSchedule,
    gamma: f64,
    z: &LatentVideo,
) -> Result<LatentVideo> {
    s_t.ensure_same_dims(eps_hat)?;
    s_t.ensure_same_dims(z)?;
    let c = sched.step_coefficients(t, t_prev)?;
    let inv_sqrt_alpha = 1.0 / c.alpha.sqrt();
    let eps_coef = c.beta / (1.0 - c.alpha_bar).sqrt();
    let noise = if t_prev == 0 { 0.0 } else { gamma * c.sigma };
    let data = s_t
        .data()
        .iter()
        .zip(eps_hat.data())
        .zip(z.data())
        .map(|((s, e), z)| inv_sqrt_alpha * (s - eps_coef * e) + noise * z)
        .collect();
    LatentVideo::from_vec(s_t.dims(), data)
}

/// Noise scale `γ·σ` actually applied by [`ddpm_step`] for this pair.
pub fn ddpm_noise_scale(
    (t, t_prev): (usize, usize),
    sched: &NoiseSchedule,
    gamma: f64,
) -> Result<f64> {
    let c = sched.step_coefficients(t, t_prev)?;
    Ok(if t_prev == 0 { 0.0 } else { gamma * c.sigma })
}

/// Deterministic DDIM (η = 0) step.
pub fn ddim_step(
    s_t: &LatentVideo,
    (t, t_prev): (usize, usize),
    eps_hat: &LatentVideo,
    sched: &NoiseSchedule,
) -> Result<LatentVideo> {
    s_t.ensure_same_dims(eps_hat)?;
    let c = sched.step_coefficients(t, t_prev)?;
    let x0 = predicted_x0(s_t, eps_hat, c.alpha_bar)?;
    x0.lincomb(c.alpha_bar_prev.sqrt(), eps_hat, (1.0 - c.alpha_bar_prev).sqrt())
}

/// `x̂0 = (s_t − √(1−ᾱ)·ε̂) / √ᾱ`.
pub fn predicted_x0(s_t: &LatentVideo, eps_hat: &LatentVideo, alpha_bar: f64) -> Result<LatentVideo> {
    let sa = alpha_bar.sqrt();
    s_t.lincomb(1.0 / sa, eps_hat, -(1.0 - alpha_bar).sqrt() / sa)
}

/// Runs a full DDIM chain with one denoiser over the whole tensor.
pub fn run_ddim_chain<D: Denoiser + ?Sized>(
    denoiser: &D,
    sched: &NoiseSchedule,
    steps: &StepMap,
    init: LatentVideo,
    cond: Condition,
    guidance: f64,
) -> Result<LatentVideo> {
    let mut s = init;
    for (i, pair) in steps.pairs().enumerate() {
        let eps = guided_eps(denoiser, &s, pair.0, cond, guidance).map_err(|e| e.at_step(i))?;
        s = ddim_step(&s, pair, &eps, sched).map_err(|e| e.at_step(i))?;
    }
    Ok(s)
}
