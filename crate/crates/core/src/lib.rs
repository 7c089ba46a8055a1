//! Mixture-of-denoisers diffusion sampling.
//!
//! A reverse DDPM chain over rank-4 latent videos (`F×C×H×W`) that, at every
//! step, picks either a temporally aware video denoiser or a per-frame image
//! denoiser. Around that sit the pieces needed to run and check it at desk
//! scale:
//!
//! - [`latent`]: tensors, the video/frame-batch reshape bridge, the `.lvt` format
//! - [`rng`]: counter-based, splittable random streams
//! - [`schedule`]: β/α/ᾱ/σ tables, forward perturbation, inference step maps
//! - [`denoisers`]: the ε-prediction trait, closed-form MMSE denoisers for
//!   Gaussian targets, a small trainable MLP, classifier-free guidance
//! - [`sampler`]: DDPM/DDIM steps and frame-correlated step noise
//! - [`mixture`]: the video-selection policy and the mixture orchestration
//! - [`smoothing`]: temporal latent smoothing and kernel baselines
//! - [`eval`]: moment, autocorrelation, flicker and Gaussian W2 statistics
//! - [`cli`]: config files, run manifests and the batch commands behind the
//!   `mixdiff` binary

// NaN-rejecting parameter checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod denoisers;
pub mod error;
pub mod eval;
pub mod latent;
pub mod mixture;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod smoothing;

pub use error::{Error, Result};
pub use latent::{Dims, FrameBatch, LatentVideo};
pub use rng::RngStream;
