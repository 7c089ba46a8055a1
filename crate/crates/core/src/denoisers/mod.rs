//! ε-prediction denoisers and classifier-free guidance.

mod gaussian;
mod toy;

pub use gaussian::{Covariance, GaussianSpec};
pub use toy::{
    draw_training_batch, sinusoidal_embedding, train_toy_denoiser, ToyArch, ToyDataset, ToyDenoiser, TrainConfig,
    TrainedToy, TrainingExample,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::{Dims, LatentVideo};
use crate::rng::RngStream;
use crate::schedule::{forward_perturb, NoiseSchedule};

pub(crate) use gaussian::check_psd;
use gaussian::PreparedGaussian;

/// Conditioning label. `Null` is the unconditional token and is never a
/// class id. Serializes as `null` or an integer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<u32>", into = "Option<u32>")]
pub enum Condition {
    #[default]
    Null,
    Class(u32),
}

impl From<Option<u32>> for Condition {
    fn from(v: Option<u32>) -> Self {
        v.map_or(Condition::Null, Condition::Class)
    }
}

impl From<Condition> for Option<u32> {
    fn from(c: Condition) -> Self {
        match c {
            Condition::Null => None,
            Condition::Class(k) => Some(k),
        }
    }
}

/// A noise-prediction model `ε_θ(s_t, t, y)`.
///
/// `input_dims` is the shape of a single call. Video denoisers take the whole
/// `F×C×H×W` tensor; image denoisers have `frames == 1` and are applied to
/// every frame independently by the mixture sampler.
pub trait Denoiser: Send + Sync {
    fn input_dims(&self) -> Dims;

    fn predict_eps(&self, s_t: &LatentVideo, t: usize, cond: Condition) -> Result<LatentVideo>;
}

impl<D: Denoiser + ?Sized> Denoiser for Arc<D> {
    fn input_dims(&self) -> Dims {
        (**self).input_dims()
    }

    fn predict_eps(&self, s_t: &LatentVideo, t: usize, cond: Condition) -> Result<LatentVideo> {
        (**self).predict_eps(s_t, t, cond)
    }
}

impl<D: Denoiser + ?Sized> Denoiser for Box<D> {
    fn input_dims(&self) -> Dims {
        (**self).input_dims()
    }

    fn predict_eps(&self, s_t: &LatentVideo, t: usize, cond: Condition) -> Result<LatentVideo> {
        (**self).predict_eps(s_t, t, cond)
    }
}

/// The MMSE denoiser `E[ε | s_t]` for a Gaussian target.
///
/// Conditioning selects a per-class target when one is registered and falls
/// back to the unconditional target otherwise.
#[derive(Clone, Debug)]
pub struct AnalyticDenoiser {
    schedule: Arc<NoiseSchedule>,
    unconditional: PreparedGaussian,
    classes: BTreeMap<u32, PreparedGaussian>,
}

impl AnalyticDenoiser {
    pub fn new(target: GaussianSpec, schedule: Arc<NoiseSchedule>) -> Self {
        Self {
            schedule,
            unconditional: PreparedGaussian::new(target),
            classes: BTreeMap::new(),
        }
    }

    pub fn with_class_target(mut self, class: u32, target: GaussianSpec) -> Result<Self> {
        if target.dims() != self.unconditional.spec.dims() {
            return Err(Error::InvalidShape(format!(
                "class target dims {} differ from {}",
                target.dims(),
                self.unconditional.spec.dims()
            )));
        }
        self.classes.insert(class, PreparedGaussian::new(target));
        Ok(self)
    }

    pub fn target(&self) -> &GaussianSpec {
        &self.unconditional.spec
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }
}

impl Denoiser for AnalyticDenoiser {
    fn input_dims(&self) -> Dims {
        self.unconditional.spec.dims()
    }

    fn predict_eps(&self, s_t: &LatentVideo, t: usize, cond: Condition) -> Result<LatentVideo> {
        self.schedule.check_timestep(t)?;
        let target = match cond {
            Condition::Class(k) => self.classes.get(&k).unwrap_or(&self.unconditional),
            Condition::Null => &self.unconditional,
        };
        target.eps(s_t, self.schedule.alpha_bar(t))
    }
}

/// Closed-form `E[ε | s_t]` for a Gaussian target at timestep `t`.
///
/// Prepares the target on every call; build an [`AnalyticDenoiser`] when the
/// same target is queried repeatedly.
pub fn analytic_gaussian_eps(
    s_t: &LatentVideo,
    t: usize,
    target: &GaussianSpec,
    sched: &NoiseSchedule,
) -> Result<LatentVideo> {
    if t == 0 {
        return Err(Error::Domain("t = 0 has no noise to predict".into()));
    }
    sched.check_timestep(t)?;
    PreparedGaussian::new(target.clone()).eps(s_t, sched.alpha_bar(t))
}

/// Classifier-free guidance: `ε(∅) + g·(ε(y) − ε(∅))`.
///
/// `g = 0` and `g = 1` evaluate the denoiser once and return its output
/// unchanged.
pub fn guided_eps<D: Denoiser + ?Sized>(
    denoiser: &D,
    s_t: &LatentVideo,
    t: usize,
    y: Condition,
    g: f64,
) -> Result<LatentVideo> {
    if g == 0.0 {
        return denoiser.predict_eps(s_t, t, Condition::Null);
    }
    if g == 1.0 {
        return denoiser.predict_eps(s_t, t, y);
    }
    let uncond = denoiser.predict_eps(s_t, t, Condition::Null)?;
    let cond = denoiser.predict_eps(s_t, t, y)?;
    let data = uncond
        .data()
        .iter()
        .zip(cond.data())
        .map(|(u, c)| u + g * (c - u))
        .collect();
    LatentVideo::from_vec(uncond.dims(), data)
}

/// Monte-Carlo estimate of `E‖ε − ε̂(s_t, t)‖² / d` for samples drawn from
/// `target`, at a fixed `t` or with `t` uniform over the schedule.
pub fn empirical_denoising_mse<D: Denoiser + ?Sized>(
    denoiser: &D,
    target: &GaussianSpec,
    sched: &NoiseSchedule,
    t: Option<usize>,
    samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let dims = target.dims();
    let mut total = 0.0;
    for _ in 0..samples {
        let s0 = target.sample(rng);
        let eps = crate::latent::sample_standard_normal(dims, rng)?;
        let step = match t {
            Some(t) => t,
            None => rng.uniform_usize(1, sched.train_steps() + 1),
        };
        let s_t = forward_perturb(&s0, step, &eps, sched)?;
        let pred = denoiser.predict_eps(&s_t, step, Condition::Null)?;
        total += pred
            .data()
            .iter()
            .zip(eps.data())
            .map(|(p, e)| (p - e).powi(2))
            .sum::<f64>()
            / dims.len() as f64;
    }
    Ok(total / samples as f64)
}
