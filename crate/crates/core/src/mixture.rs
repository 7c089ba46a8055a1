//! Mixture-of-denoisers sampling.
//!
//! Every reverse step hands the whole latent to exactly one of two
//! denoisers that share the same noise schedule: a video model seeing all
//! `F` frames jointly, or an image model applied to each frame on its own.
//! Which one is drawn from a Bernoulli coin whose success probability
//! `P_V` depends on sampling progress.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::denoisers::{guided_eps, Condition, Denoiser};
use crate::error::{Error, Result};
use crate::latent::{frames_to_video, sample_standard_normal, video_to_frames, FrameBatch, LatentVideo};
use crate::rng::RngStream;
use crate::sampler::{ddpm_noise_scale, ddpm_step, sample_correlated_noise, EntropyConfig};
use crate::schedule::{NoiseSchedule, StepMap};

/// Piecewise-linear `P_V(progress)`: 1 up to `t_v`, linear down to `p_e`
/// at `t_e`, then linear to `p_f` at progress 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixturePolicy {
    pub t_v: f64,
    pub t_e: f64,
    pub p_e: f64,
    pub p_f: f64,
}

impl MixturePolicy {
    /// Tuned for 64×64 samples.
    pub const RES_64: MixturePolicy = MixturePolicy {
        t_v: 0.2,
        t_e: 0.7,
        p_e: 0.3,
        p_f: 0.3,
    };
    /// Tuned for 128×128 samples.
    pub const RES_128: MixturePolicy = MixturePolicy {
        t_v: 0.4,
        t_e: 0.7,
        p_e: 0.4,
        p_f: 0.1,
    };
    /// Tuned for 256×256 samples.
    pub const RES_256: MixturePolicy = MixturePolicy {
        t_v: 0.1,
        t_e: 0.6,
        p_e: 0.2,
        p_f: 0.1,
    };
    /// `P_V ≡ 1`.
    pub const VIDEO_ONLY: MixturePolicy = MixturePolicy {
        t_v: 1.0,
        t_e: 1.0,
        p_e: 1.0,
        p_f: 1.0,
    };

    pub fn new(t_v: f64, t_e: f64, p_e: f64, p_f: f64) -> Result<Self> {
        let p = Self { t_v, t_e, p_e, p_f };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.t_v && self.t_v <= self.t_e && self.t_e <= 1.0) {
            return Err(Error::param(
                "policy",
                format!("need 0 <= t_v <= t_e <= 1, got t_v={} t_e={}", self.t_v, self.t_e),
            ));
        }
        for (name, p) in [("p_e", self.p_e), ("p_f", self.p_f)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

// Weighted form so that w = 0 and w = 1 return the endpoints exactly.
#[inline]
fn lerp(a: f64, b: f64, w: f64) -> f64 {
    (1.0 - w) * a + w * b
}

/// Probability of picking the video model at `progress ∈ [0, 1]` (the
/// fraction of reverse steps already taken).
pub fn p_video(policy: &MixturePolicy, progress: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&progress) {
        return Err(Error::param(
            "progress",
            format!("must be in [0, 1], got {progress}"),
        ));
    }
    let MixturePolicy { t_v, t_e, p_e, p_f } = *policy;
    // Empty segments (t_v = t_e, t_e = 1) are never entered, so the
    // divisions below are always by a positive span.
    Ok(if progress <= t_v {
        1.0
    } else if progress <= t_e {
        lerp(1.0, p_e, (progress - t_v) / (t_e - t_v))
    } else {
        lerp(p_e, p_f, (progress - t_e) / (1.0 - t_e))
    })
}

/// Progress of step `i` in a chain of `steps`: `i / (steps − 1)`, or 0 for a
/// single-step chain.
pub fn progress_at(i: usize, steps: usize) -> f64 {
    if steps <= 1 {
        0.0
    } else {
        i as f64 / (steps - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Video,
    Image,
}

/// Bernoulli(`P_V`) draw consuming exactly one word from `rng`.
pub fn select_model(policy: &MixturePolicy, progress: f64, rng: &mut RngStream) -> Result<ModelChoice> {
    let p = p_video(policy, progress)?;
    Ok(choose(p, rng.next_f64()))
}

#[inline]
fn choose(p: f64, coin: f64) -> ModelChoice {
    if coin < p {
        ModelChoice::Video
    } else {
        ModelChoice::Image
    }
}

/// How the model is picked at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    Policy(MixturePolicy),
    Always(ModelChoice),
    /// Replays recorded choices; length must equal the step count.
    Scripted(Vec<ModelChoice>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub timestep: usize,
    pub progress: f64,
    pub p_video: f64,
    pub coin: f64,
    pub choice: ModelChoice,
    /// `γ·σ` applied to the step noise.
    pub noise_scale: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepTrace {
    pub records: Vec<StepRecord>,
}

impl StepTrace {
    pub fn choices(&self) -> Vec<ModelChoice> {
        self.records.iter().map(|r| r.choice).collect()
    }

    pub fn count(&self, choice: ModelChoice) -> usize {
        self.records.iter().filter(|r| r.choice == choice).count()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { records })
    }
}

/// Guidance and step-noise settings for one chain. `guidance_video` and
/// `guidance_image` override `guidance` for that model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub guidance: f64,
    pub guidance_video: Option<f64>,
    pub guidance_image: Option<f64>,
    pub entropy: EntropyConfig,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            guidance: 1.0,
            guidance_video: None,
            guidance_image: None,
            entropy: EntropyConfig::default(),
        }
    }
}

/// The three independent random sources of one chain.
#[derive(Clone, Debug)]
pub struct ChainStreams {
    pub init: RngStream,
    pub step_noise: RngStream,
    pub selection: RngStream,
}

impl ChainStreams {
    /// Chain `index` of a run: each role has its own seed, and the chain
    /// index selects the stream.
    pub fn new(init_seed: u64, step_noise_seed: u64, selection_seed: u64, index: u64) -> Self {
        Self {
            init: RngStream::new(init_seed, index),
            step_noise: RngStream::new(step_noise_seed, index),
            selection: RngStream::new(selection_seed, index),
        }
    }
}

/// Applies an image denoiser to every frame independently.
pub fn image_model_eps<D: Denoiser + ?Sized>(
    image_d: &D,
    s_t: &LatentVideo,
    t: usize,
    cond: Condition,
    g: f64,
) -> Result<LatentVideo> {
    let batch = video_to_frames(s_t.clone());
    let items = (0..batch.count())
        .map(|b| guided_eps(image_d, &batch.item(b), t, cond, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(frames_to_video(FrameBatch::from_items(items)?))
}

/// Runs one reverse chain from `s_T ~ N(0, I)`, alternating denoisers per
/// `selector`, and returns `s_0` with the per-step trace.
#[allow(clippy::too_many_arguments)]
pub fn run_mixture_sampling<V, I>(
    video_d: &V,
    image_d: &I,
    selector: &Selector,
    sched: &NoiseSchedule,
    steps: &StepMap,
    cfg: &ChainConfig,
    cond: Condition,
    streams: &mut ChainStreams,
) -> Result<(LatentVideo, StepTrace)>
where
    V: Denoiser + ?Sized,
    I: Denoiser + ?Sized,
{
    let dims = video_d.input_dims();
    if image_d.input_dims() != dims.single_frame() {
        return Err(Error::InvalidShape(format!(
            "image denoiser takes {}, video frames are {}",
            image_d.input_dims(),
            dims.single_frame()
        )));
    }
    cfg.entropy.validate()?;
    match selector {
        Selector::Policy(p) => p.validate()?,
        Selector::Scripted(v) if v.len() != steps.len() => {
            return Err(Error::param(
                "selector",
                format!("{} scripted choices for {} steps", v.len(), steps.len()),
            ))
        }
        _ => {}
    }
    if steps.train_steps != sched.train_steps() {
        return Err(Error::param(
            "steps",
            format!(
                "step map built for T={}, schedule has T={}",
                steps.train_steps,
                sched.train_steps()
            ),
        ));
    }
    let g_video = cfg.guidance_video.unwrap_or(cfg.guidance);
    let g_image = cfg.guidance_image.unwrap_or(cfg.guidance);
    let n = steps.len();

    let mut s = sample_standard_normal(dims, &mut streams.init)?;
    let mut trace = StepTrace::default();
    for (i, pair) in steps.pairs().enumerate() {
        let progress = progress_at(i, n);
        let coin = streams.selection.next_f64();
        let (p, choice) = match selector {
            Selector::Policy(policy) => {
                let p = p_video(policy, progress)?;
                (p, choose(p, coin))
            }
            Selector::Always(c) => (if *c == ModelChoice::Video { 1.0 } else { 0.0 }, *c),
            Selector::Scripted(v) => (f64::NAN, v[i]),
        };
        let (eps, r) = match choice {
            ModelChoice::Video => (
                guided_eps(video_d, &s, pair.0, cond, g_video),
                cfg.entropy.r_video,
            ),
            ModelChoice::Image => (
                image_model_eps(image_d, &s, pair.0, cond, g_image),
                cfg.entropy.r_image,
            ),
        };
        let eps = eps.map_err(|e| e.at_step(i))?;
        let z = sample_correlated_noise(dims, r, &mut streams.step_noise)?;
        s = ddpm_step(&s, pair, &eps, sched, cfg.entropy.gamma, &z).map_err(|e| e.at_step(i))?;
        if !s.is_finite() {
            return Err(Error::Domain("non-finite latent".into()).at_step(i));
        }
        trace.records.push(StepRecord {
            step: i,
            timestep: pair.0,
            progress,
            p_video: p,
            coin,
            choice,
            noise_scale: ddpm_noise_scale(pair, sched, cfg.entropy.gamma)?,
        });
    }
    Ok((s, trace))
}

/// Mean and covariance of a flattened output.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianLaw {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Exact output distribution of a chain with a fixed sequence of model
/// choices, for denoisers that are affine in their input (the analytic
/// ones are). Each step's affine map is read off from `d + 1` denoiser
/// calls and checked at one more point; a non-affine denoiser is a domain
/// error.
#[allow(clippy::too_many_arguments)]
pub fn chain_output_law<V, I>(
    video_d: &V,
    image_d: &I,
    choices: &[ModelChoice],
    sched: &NoiseSchedule,
    steps: &StepMap,
    cfg: &ChainConfig,
    cond: Condition,
) -> Result<GaussianLaw>
where
    V: Denoiser + ?Sized,
    I: Denoiser + ?Sized,
{
    let dims = video_d.input_dims();
    if choices.len() != steps.len() {
        return Err(Error::param(
            "choices",
            format!("{} choices for {} steps", choices.len(), steps.len()),
        ));
    }
    cfg.entropy.validate()?;
    let n = dims.len();
    let g_video = cfg.guidance_video.unwrap_or(cfg.guidance);
    let g_image = cfg.guidance_image.unwrap_or(cfg.guidance);
    let zero = LatentVideo::zeros(dims)?;

    let mut mean = DVector::zeros(n);
    let mut cov = DMatrix::identity(n, n);
    for (i, (pair, &choice)) in steps.pairs().zip(choices).enumerate() {
        let step = |s: &LatentVideo| -> Result<DVector<f64>> {
            let eps = match choice {
                ModelChoice::Video => guided_eps(video_d, s, pair.0, cond, g_video),
                ModelChoice::Image => image_model_eps(image_d, s, pair.0, cond, g_image),
            }?;
            let out = ddpm_step(s, pair, &eps, sched, cfg.entropy.gamma, &zero)?;
            Ok(DVector::from_column_slice(out.data()))
        };
        let offset = step(&zero).map_err(|e| e.at_step(i))?;
        let mut map = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = step(&LatentVideo::from_vec(dims, e)?).map_err(|e| e.at_step(i))? - &offset;
            map.set_column(j, &col);
        }
        let probe: Vec<f64> = (0..n).map(|j| ((j + 1) as f64).sin()).collect();
        let direct = step(&LatentVideo::from_vec(dims, probe.clone())?).map_err(|e| e.at_step(i))?;
        let predicted = &map * DVector::from_vec(probe) + &offset;
        let scale = direct.amax().max(1.0);
        if (direct - predicted).amax() > 1e-8 * scale {
            return Err(Error::Domain("denoiser is not affine in its input".into()).at_step(i));
        }

        let r = match choice {
            ModelChoice::Video => cfg.entropy.r_video,
            ModelChoice::Image => cfg.entropy.r_image,
        };
        let noise = ddpm_noise_scale(pair, sched, cfg.entropy.gamma)?;
        mean = &map * mean + offset;
        cov = &map * cov * map.transpose();
        if noise > 0.0 {
            let k = dims.frame_len();
            let var = noise * noise;
            for a in 0..n {
                for b in 0..n {
                    if a % k == b % k {
                        cov[(a, b)] += var * if a == b { 1.0 } else { r };
                    }
                }
            }
        }
    }
    Ok(GaussianLaw {
        mean,
        covariance: (&cov + cov.transpose()) * 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoisers::{AnalyticDenoiser, GaussianSpec};
    use crate::latent::Dims;
    use crate::schedule::{make_step_map, ScheduleParams};
    use proptest::prelude::*;
    use std::sync::Arc;

    #[test]
    fn preset_endpoints() {
        let p = MixturePolicy::RES_128;
        assert_eq!(p_video(&p, 0.4).unwrap(), 1.0);
        assert_eq!(p_video(&p, 0.7).unwrap(), 0.4);
        assert_eq!(p_video(&p, 1.0).unwrap(), 0.1);
        assert!((p_video(&p, 0.55).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn degenerate_policies() {
        for x in [0.0, 0.3, 0.999, 1.0] {
            assert_eq!(p_video(&MixturePolicy::VIDEO_ONLY, x).unwrap(), 1.0);
        }
        let image = MixturePolicy::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p_video(&image, 0.0).unwrap(), 1.0);
        assert_eq!(p_video(&image, 1e-9).unwrap(), 0.0);
        let step = MixturePolicy::new(0.5, 0.5, 0.2, 0.2).unwrap();
        assert_eq!(p_video(&step, 0.5).unwrap(), 1.0);
        assert!((p_video(&step, 0.5 + 1e-12).unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        assert!(p_video(&MixturePolicy::RES_64, 1.01).is_err());
        assert!(p_video(&MixturePolicy::RES_64, -0.01).is_err());
        assert!(MixturePolicy::new(0.7, 0.4, 0.5, 0.5).is_err());
        assert!(MixturePolicy::new(0.1, 0.4, 1.5, 0.5).is_err());
    }

    #[test]
    fn selection_extremes_and_frequency() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..1000 {
            assert_eq!(select_model(&MixturePolicy::VIDEO_ONLY, 0.5, &mut rng).unwrap(), ModelChoice::Video);
            let never = MixturePolicy::new(0.0, 0.0, 0.0, 0.0).unwrap();
            assert_eq!(select_model(&never, 0.5, &mut rng).unwrap(), ModelChoice::Image);
        }
        let flat = MixturePolicy::new(0.0, 0.0, 0.3, 0.3).unwrap();
        let mut rng = RngStream::new(2, 0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| select_model(&flat, 0.5, &mut rng).unwrap() == ModelChoice::Video)
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.3).abs() < 0.005, "{freq}");
    }

    fn setup(dims: Dims) -> (Arc<NoiseSchedule>, AnalyticDenoiser, AnalyticDenoiser) {
        let sched = Arc::new(ScheduleParams::default().build().unwrap());
        let video = AnalyticDenoiser::new(GaussianSpec::standard_normal(dims).unwrap(), sched.clone());
        let image = AnalyticDenoiser::new(
            GaussianSpec::standard_normal(dims.single_frame()).unwrap(),
            sched.clone(),
        );
        (sched, video, image)
    }

    #[test]
    fn video_only_equals_direct_chain() {
        let dims = Dims::new(3, 1, 2, 2);
        let (sched, video, image) = setup(dims);
        let steps = make_step_map(1000, 25).unwrap();
        let cfg = ChainConfig::default();
        let mut streams = ChainStreams::new(1, 2, 3, 0);
        let (out, trace) = run_mixture_sampling(
            &video,
            &image,
            &Selector::Policy(MixturePolicy::VIDEO_ONLY),
            &sched,
            &steps,
            &cfg,
            Condition::Null,
            &mut streams,
        )
        .unwrap();
        assert_eq!(trace.count(ModelChoice::Video), 25);

        let mut init = RngStream::new(1, 0);
        let mut noise = RngStream::new(2, 0);
        let mut s = sample_standard_normal(dims, &mut init).unwrap();
        for pair in steps.pairs() {
            let eps = video.predict_eps(&s, pair.0, Condition::Null).unwrap();
            let z = sample_correlated_noise(dims, 0.0, &mut noise).unwrap();
            s = ddpm_step(&s, pair, &eps, &sched, 1.0, &z).unwrap();
        }
        assert_eq!(out, s);
    }

    #[test]
    fn zero_policy_uses_video_only_at_first_step() {
        let dims = Dims::new(2, 1, 1, 2);
        let (sched, video, image) = setup(dims);
        let steps = make_step_map(1000, 10).unwrap();
        let never = MixturePolicy::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let (_, trace) = run_mixture_sampling(
            &video,
            &image,
            &Selector::Policy(never),
            &sched,
            &steps,
            &ChainConfig::default(),
            Condition::Null,
            &mut ChainStreams::new(0, 0, 0, 0),
        )
        .unwrap();
        assert_eq!(trace.records[0].choice, ModelChoice::Video);
        assert_eq!(trace.count(ModelChoice::Image), 9);
    }

    #[test]
    fn replay_from_trace_is_bit_identical() {
        let dims = Dims::new(4, 1, 2, 1);
        let (sched, video, image) = setup(dims);
        let steps = make_step_map(1000, 30).unwrap();
        let cfg = ChainConfig {
            entropy: EntropyConfig { r_video: 0.2, r_image: 0.7, gamma: 0.5 },
            ..ChainConfig::default()
        };
        let run = |sel: &Selector| {
            run_mixture_sampling(
                &video,
                &image,
                sel,
                &sched,
                &steps,
                &cfg,
                Condition::Null,
                &mut ChainStreams::new(5, 6, 7, 3),
            )
            .unwrap()
        };
        let (a, trace) = run(&Selector::Policy(MixturePolicy::RES_128));
        assert!(trace.count(ModelChoice::Image) > 0 && trace.count(ModelChoice::Video) > 0);
        for r in &trace.records {
            assert_eq!(r.choice == ModelChoice::Video, r.coin < r.p_video);
        }
        let parsed = StepTrace::from_jsonl(&trace.to_jsonl().unwrap()).unwrap();
        assert_eq!(parsed, trace);
        let (b, _) = run(&Selector::Scripted(parsed.choices()));
        assert_eq!(a, b);
    }

    #[test]
    fn output_law_follows_scalar_recursion() {
        // For a standard-normal target the step is s' = √α·s + σ·z entrywise.
        let dims = Dims::new(2, 1, 1, 2);
        let (sched, video, image) = setup(dims);
        let steps = make_step_map(1000, 10).unwrap();
        let cfg = ChainConfig {
            entropy: EntropyConfig {
                r_video: 0.5,
                r_image: 0.0,
                gamma: 0.7,
            },
            ..ChainConfig::default()
        };
        let choices: Vec<_> = (0..10)
            .map(|i| if i % 3 == 0 { ModelChoice::Image } else { ModelChoice::Video })
            .collect();
        let law = chain_output_law(&video, &image, &choices, &sched, &steps, &cfg, Condition::Null).unwrap();
        let (mut var, mut cross) = (1.0, 0.0);
        for (pair, choice) in steps.pairs().zip(&choices) {
            let c = sched.step_coefficients(pair.0, pair.1).unwrap();
            let noise = ddpm_noise_scale(pair, &sched, 0.7).unwrap();
            let r = if *choice == ModelChoice::Video { 0.5 } else { 0.0 };
            var = c.alpha * var + noise * noise;
            cross = c.alpha * cross + noise * noise * r;
        }
        assert!(law.mean.amax() < 1e-12);
        for a in 0..4 {
            assert!((law.covariance[(a, a)] - var).abs() < 1e-12);
        }
        // Same (h, w) across the two frames, then different sites.
        assert!((law.covariance[(0, 2)] - cross).abs() < 1e-12);
        assert!(law.covariance[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn output_law_rejects_nonlinear_denoisers() {
        use crate::denoisers::{ToyArch, ToyDenoiser};
        let dims = Dims::new(1, 1, 1, 2);
        let (sched, _, image) = setup(dims);
        let toy = ToyDenoiser::init(ToyArch::new(dims, 8, 0), 4).unwrap();
        let steps = make_step_map(1000, 4).unwrap();
        let err = chain_output_law(
            &toy,
            &image,
            &[ModelChoice::Video; 4],
            &sched,
            &steps,
            &ChainConfig::default(),
            Condition::Null,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Step { step: 0, .. }), "{err}");
    }

    #[test]
    fn rejects_mismatched_image_denoiser() {
        let dims = Dims::new(2, 1, 2, 2);
        let (sched, video, _) = setup(dims);
        let wrong = AnalyticDenoiser::new(
            GaussianSpec::standard_normal(Dims::new(1, 1, 2, 1)).unwrap(),
            sched.clone(),
        );
        let steps = make_step_map(1000, 5).unwrap();
        assert!(run_mixture_sampling(
            &video,
            &wrong,
            &Selector::Always(ModelChoice::Image),
            &sched,
            &steps,
            &ChainConfig::default(),
            Condition::Null,
            &mut ChainStreams::new(0, 0, 0, 0),
        )
        .is_err());
        assert!(run_mixture_sampling(
            &video,
            &video,
            &Selector::Scripted(vec![ModelChoice::Video; 4]),
            &sched,
            &steps,
            &ChainConfig::default(),
            Condition::Null,
            &mut ChainStreams::new(0, 0, 0, 0),
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn continuous_at_knots(a in 0.0f64..1.0, b in 0.0f64..1.0, p_e in 0.0f64..=1.0, p_f in 0.0f64..=1.0) {
            let (t_v, t_e) = if a <= b { (a, b) } else { (b, a) };
            prop_assume!(t_e - t_v >= 0.01 && 1.0 - t_e >= 0.01);
            let p = MixturePolicy::new(t_v, t_e, p_e, p_f).unwrap();
            let d = 1e-15;
            prop_assert_eq!(p_video(&p, t_v).unwrap(), 1.0);
            prop_assert!((p_video(&p, t_v + d).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((p_video(&p, t_e).unwrap() - p_e).abs() < 1e-12);
            prop_assert!((p_video(&p, t_e + d).unwrap() - p_e).abs() < 1e-12);
            prop_assert_eq!(p_video(&p, 1.0).unwrap(), p_f);
        }
    }
}
