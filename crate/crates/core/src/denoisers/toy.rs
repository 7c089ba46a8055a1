//! A two-layer perceptron ε-predictor and its training loop.
//!
//! Input is the concatenation of the flattened noisy latent, a sinusoidal
//! embedding of `t`, and a one-hot condition whose last slot is the null
//! token. One SiLU hidden layer, linear output.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Condition, Denoiser, GaussianSpec};
use crate::error::{Error, Result};
use crate::latent::{sample_standard_normal, Dims, LatentVideo};
use crate::rng::RngStream;
use crate::schedule::{forward_perturb, NoiseSchedule};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Architecture; also the JSON sidecar of a saved model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyArch {
    pub hidden_width: usize,
    pub embed_dim: usize,
    pub num_classes: usize,
    pub input_dims: Dims,
}

impl ToyArch {
    pub fn new(input_dims: Dims, hidden_width: usize, num_classes: usize) -> Self {
        Self {
            hidden_width,
            embed_dim: 16,
            num_classes,
            input_dims,
        }
    }

    fn validate(&self) -> Result<()> {
        self.input_dims.validate()?;
        if self.hidden_width == 0 {
            return Err(Error::param("hidden_width", "must be at least 1"));
        }
        if self.embed_dim == 0 || !self.embed_dim.is_multiple_of(2) {
            return Err(Error::param("embed_dim", "must be a positive even number"));
        }
        Ok(())
    }

    pub fn in_features(&self) -> usize {
        self.input_dims.len() + self.embed_dim + self.num_classes + 1
    }

    pub fn out_features(&self) -> usize {
        self.input_dims.len()
    }

    pub fn param_count(&self) -> usize {
        let (i, h, o) = (self.in_features(), self.hidden_width, self.out_features());
        h * i + h + o * h + o
    }

    // Offsets of w1 [h×i], b1 [h], w2 [o×h], b2 [o] in the flat vector.
    fn offsets(&self) -> [usize; 4] {
        let (i, h, o) = (self.in_features(), self.hidden_width, self.out_features());
        let w1 = 0;
        let b1 = w1 + h * i;
        let w2 = b1 + h;
        let b2 = w2 + o * h;
        [w1, b1, w2, b2]
    }
}

/// `[sin(t·ω_0), …, sin(t·ω_{k−1}), cos(t·ω_0), …]` with
/// `ω_i = 10000^(−i/k)`, `k = dim / 2`.
pub fn sinusoidal_embedding(t: usize, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut out = vec![0.0; dim];
    for i in 0..half {
        let freq = (-(10000f64).ln() * i as f64 / half as f64).exp();
        let arg = t as f64 * freq;
        out[i] = arg.sin();
        out[half + i] = arg.cos();
    }
    out
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyDenoiser {
    arch: ToyArch,
    params: Vec<f64>,
}

/// One supervised example: predict `eps` from `(s_t, t, cond)`.
#[derive(Clone, Debug)]
pub struct TrainingExample {
    pub s_t: LatentVideo,
    pub t: usize,
    pub cond: Condition,
    pub eps: LatentVideo,
}

impl ToyDenoiser {
    /// Uniform `±1/√fan_in` weights, zero biases.
    pub fn init(arch: ToyArch, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = RngStream::new(seed, 0);
        let mut params = vec![0.0; arch.param_count()];
        let [w1, b1, w2, b2] = arch.offsets();
        let s1 = 1.0 / (arch.in_features() as f64).sqrt();
        for p in &mut params[w1..b1] {
            *p = s1 * (2.0 * rng.next_f64() - 1.0);
        }
        let s2 = 1.0 / (arch.hidden_width as f64).sqrt();
        for p in &mut params[w2..b2] {
            *p = s2 * (2.0 * rng.next_f64() - 1.0);
        }
        Ok(Self { arch, params })
    }

    pub fn from_params(arch: ToyArch, params: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::Format(format!(
                "{} parameters, architecture needs {}",
                params.len(),
                arch.param_count()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Format("non-finite parameter".into()));
        }
        Ok(Self { arch, params })
    }

    pub fn arch(&self) -> &ToyArch {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn input_vector(&self, x: &[f64], t: usize, cond: Condition) -> Result<Vec<f64>> {
        let mut u = Vec::with_capacity(self.arch.in_features());
        u.extend_from_slice(x);
        u.extend(sinusoidal_embedding(t, self.arch.embed_dim));
        let mut onehot = vec![0.0; self.arch.num_classes + 1];
        let slot = match cond {
            Condition::Null => self.arch.num_classes,
            Condition::Class(k) if (k as usize) < self.arch.num_classes => k as usize,
            Condition::Class(k) => {
                return Err(Error::param(
                    "condition",
                    format!("class {k} outside 0..{}", self.arch.num_classes),
                ))
            }
        };
        onehot[slot] = 1.0;
        u.extend(onehot);
        Ok(u)
    }

    /// Returns `(pre-activation, hidden, output)`.
    fn forward(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (ni, h, o) = (
            self.arch.in_features(),
            self.arch.hidden_width,
            self.arch.out_features(),
        );
        let [w1, b1, w2, b2] = self.arch.offsets();
        let p = &self.params;
        let mut pre = vec![0.0; h];
        let mut hid = vec![0.0; h];
        for j in 0..h {
            let row = &p[w1 + j * ni..w1 + (j + 1) * ni];
            let a = p[b1 + j] + row.iter().zip(u).map(|(w, x)| w * x).sum::<f64>();
            pre[j] = a;
            hid[j] = a * sigmoid(a);
        }
        let mut out = vec![0.0; o];
        for k in 0..o {
            let row = &p[w2 + k * h..w2 + (k + 1) * h];
            out[k] = p[b2 + k] + row.iter().zip(&hid).map(|(w, x)| w * x).sum::<f64>();
        }
        (pre, hid, out)
    }

    fn check_input(&self, x: &LatentVideo) -> Result<()> {
        if x.dims() != self.arch.input_dims {
            return Err(Error::InvalidShape(format!(
                "toy denoiser expects {}, got {}",
                self.arch.input_dims,
                x.dims()
            )));
        }
        Ok(())
    }

    /// Mean squared error per element over the batch.
    pub fn loss(&self, batch: &[TrainingExample]) -> Result<f64> {
        let d = self.arch.out_features() as f64;
        let mut total = 0.0;
        for ex in batch {
            self.check_input(&ex.s_t)?;
            let u = self.input_vector(ex.s_t.data(), ex.t, ex.cond)?;
            let (_, _, y) = self.forward(&u);
            total += y
                .iter()
                .zip(ex.eps.data())
                .map(|(y, e)| (y - e).powi(2))
                .sum::<f64>()
                / d;
        }
        Ok(total / batch.len() as f64)
    }

    /// Loss and its gradient with respect to the flat parameter vector.
    pub fn loss_and_grad(&self, batch: &[TrainingExample]) -> Result<(f64, Vec<f64>)> {
        let (ni, h, o) = (
            self.arch.in_features(),
            self.arch.hidden_width,
            self.arch.out_features(),
        );
        let [w1, b1, w2, b2] = self.arch.offsets();
        let p = &self.params;
        let scale = 1.0 / (o as f64 * batch.len() as f64);
        let mut grad = vec![0.0; p.len()];
        let mut total = 0.0;
        let mut dh = vec![0.0; h];
        for ex in batch {
            self.check_input(&ex.s_t)?;
            let u = self.input_vector(ex.s_t.data(), ex.t, ex.cond)?;
            let (pre, hid, y) = self.forward(&u);
            dh.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..o {
                let r = y[k] - ex.eps.data()[k];
                total += r * r * scale;
                let dy = 2.0 * r * scale;
                grad[b2 + k] += dy;
                for j in 0..h {
                    grad[w2 + k * h + j] += dy * hid[j];
                    dh[j] += dy * p[w2 + k * h + j];
                }
            }
            for j in 0..h {
                let s = sigmoid(pre[j]);
                let da = dh[j] * s * (1.0 + pre[j] * (1.0 - s));
                if da == 0.0 {
                    continue;
                }
                grad[b1 + j] += da;
                let g = &mut grad[w1 + j * ni..w1 + (j + 1) * ni];
                for (g, x) in g.iter_mut().zip(&u) {
                    *g += da * x;
                }
            }
        }
        Ok((total, grad))
    }

    pub fn encode_params(&self) -> Vec<u8> {
        self.params
            .iter()
            .flat_map(|&p| (p as f32).to_le_bytes())
            .collect()
    }

    /// Writes `<stem>.f32` (flat f32 LE parameters) and `<stem>.json`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::write(dir.join(format!("{stem}.f32")), self.encode_params())?;
        fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&self.arch)?,
        )?;
        Ok(())
    }

    /// Loads from a sidecar path; the parameter file is the sibling `.f32`.
    pub fn load(sidecar: impl AsRef<Path>) -> Result<Self> {
        let sidecar = sidecar.as_ref();
        let arch: ToyArch = serde_json::from_slice(&fs::read(sidecar)?)?;
        let bytes = fs::read(sidecar.with_extension("f32"))?;
        if bytes.len() % 4 != 0 {
            return Err(Error::Format("parameter file length not a multiple of 4".into()));
        }
        let params = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Self::from_params(arch, params)
    }
}

impl Denoiser for ToyDenoiser {
    fn input_dims(&self) -> Dims {
        self.arch.input_dims
    }

    fn predict_eps(&self, s_t: &LatentVideo, t: usize, cond: Condition) -> Result<LatentVideo> {
        self.check_input(s_t)?;
        if t == 0 {
            return Err(Error::TimestepOutOfRange { t, max: usize::MAX });
        }
        let u = self.input_vector(s_t.data(), t, cond)?;
        let (_, _, y) = self.forward(&u);
        LatentVideo::from_vec(s_t.dims(), y)
    }
}

/// Where clean training samples come from.
#[derive(Clone, Debug)]
pub enum ToyDataset {
    /// Unconditional draws from one target.
    Gaussian(GaussianSpec),
    /// Class chosen uniformly, then a draw from its target.
    Labeled(Vec<(u32, GaussianSpec)>),
    /// Uniform draws from a finite set.
    Samples(Vec<(LatentVideo, Condition)>),
}

impl ToyDataset {
    fn dims(&self) -> Option<Dims> {
        match self {
            ToyDataset::Gaussian(g) => Some(g.dims()),
            ToyDataset::Labeled(v) => v.first().map(|(_, g)| g.dims()),
            ToyDataset::Samples(v) => v.first().map(|(x, _)| x.dims()),
        }
    }

    fn validate(&self, arch: &ToyArch) -> Result<()> {
        let dims = self
            .dims()
            .ok_or_else(|| Error::param("dataset", "is empty"))?;
        let labels: Vec<(Dims, Condition)> = match self {
            ToyDataset::Gaussian(g) => vec![(g.dims(), Condition::Null)],
            ToyDataset::Labeled(v) => v.iter().map(|(k, g)| (g.dims(), Condition::Class(*k))).collect(),
            ToyDataset::Samples(v) => v.iter().map(|(x, c)| (x.dims(), *c)).collect(),
        };
        for (d, c) in labels {
            if d != dims || d != arch.input_dims {
                return Err(Error::InvalidShape(format!(
                    "dataset item {d} does not match model input {}",
                    arch.input_dims
                )));
            }
            if let Condition::Class(k) = c {
                if k as usize >= arch.num_classes {
                    return Err(Error::param(
                        "dataset",
                        format!("class {k} outside 0..{}", arch.num_classes),
                    ));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut RngStream) -> (LatentVideo, Condition) {
        match self {
            ToyDataset::Gaussian(g) => (g.sample(rng), Condition::Null),
            ToyDataset::Labeled(v) => {
                let (k, g) = &v[rng.uniform_usize(0, v.len())];
                (g.sample(rng), Condition::Class(*k))
            }
            ToyDataset::Samples(v) => v[rng.uniform_usize(0, v.len())].clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    /// Linear learning-rate ramp length; constant afterwards.
    pub warmup_steps: usize,
    pub prompt_drop: f64,
    pub noise_offset: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 5000,
            batch: 128,
            lr: 3e-3,
            warmup_steps: 500,
            prompt_drop: 0.3,
            noise_offset: 0.1,
            seed: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prompt_drop) {
            return Err(Error::param(
                "prompt_drop",
                format!("must be in [0, 1], got {}", self.prompt_drop),
            ));
        }
        if !(self.noise_offset >= 0.0 && self.noise_offset.is_finite()) {
            return Err(Error::param(
                "noise_offset",
                format!("must be finite and >= 0, got {}", self.noise_offset),
            ));
        }
        if !(self.lr > 0.0) || self.lr.is_infinite() {
            return Err(Error::param("lr", format!("must be finite and > 0, got {}", self.lr)));
        }
        if self.batch == 0 {
            return Err(Error::param("batch", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainedToy {
    pub model: ToyDenoiser,
    pub initial: ToyDenoiser,
    /// Batch loss before each update.
    pub losses: Vec<f64>,
}

/// Draws one training batch: condition dropped to null with probability
/// `prompt_drop`, `t` uniform over the schedule, and noise
/// `ε = ε_base + noise_offset·o` with one `o` per (frame, channel) broadcast
/// over the spatial plane.
pub fn draw_training_batch(
    dataset: &ToyDataset,
    sched: &NoiseSchedule,
    cfg: &TrainConfig,
    rng: &mut RngStream,
) -> Result<Vec<TrainingExample>> {
    let mut batch = Vec::with_capacity(cfg.batch);
    for _ in 0..cfg.batch {
        let (s0, label) = dataset.draw(rng);
        let dims = s0.dims();
        let cond = if rng.next_f64() < cfg.prompt_drop {
            Condition::Null
        } else {
            label
        };
        let t = rng.uniform_usize(1, sched.train_steps() + 1);
        let mut eps = sample_standard_normal(dims, rng)?;
        let mut offsets = vec![0.0; dims.frames * dims.channels];
        rng.fill_standard_normal(&mut offsets);
        let plane = dims.plane_len();
        for (i, v) in eps.data_mut().iter_mut().enumerate() {
            *v += cfg.noise_offset * offsets[i / plane];
        }
        let s_t = forward_perturb(&s0, t, &eps, sched)?;
        batch.push(TrainingExample { s_t, t, cond, eps });
    }
    Ok(batch)
}

pub fn train_toy_denoiser(
    dataset: &ToyDataset,
    sched: &NoiseSchedule,
    arch: ToyArch,
    cfg: &TrainConfig,
) -> Result<TrainedToy> {
    cfg.validate()?;
    arch.validate()?;
    dataset.validate(&arch)?;
    let initial = ToyDenoiser::init(arch, cfg.seed)?;
    let mut model = initial.clone();
    let mut rng = RngStream::new(cfg.seed, 1);
    let n = model.params.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut losses = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let batch = draw_training_batch(dataset, sched, cfg, &mut rng)?;
        let (loss, grad) = model.loss_and_grad(&batch)?;
        if !loss.is_finite() {
            return Err(Error::TrainingFailure { step, loss });
        }
        losses.push(loss);
        let warm = if cfg.warmup_steps == 0 {
            1.0
        } else {
            ((step + 1) as f64 / cfg.warmup_steps as f64).min(1.0)
        };
        let lr = cfg.lr * warm;
        let k = (step + 1) as i32;
        let c1 = 1.0 - ADAM_BETA1.powi(k);
        let c2 = 1.0 - ADAM_BETA2.powi(k);
        for i in 0..n {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grad[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
            model.params[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
        }
    }
    if let Some(bad) = model.params.iter().find(|p| !p.is_finite()) {
        return Err(Error::TrainingFailure {
            step: cfg.steps,
            loss: *bad,
        });
    }
    Ok(TrainedToy {
        model,
        initial,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoisers::Covariance;
    use crate::schedule::ScheduleParams;

    fn scalar_arch() -> ToyArch {
        ToyArch::new(Dims::new(1, 1, 1, 1), 32, 2)
    }

    #[test]
    fn zero_steps_keep_initialization() {
        let sched = ScheduleParams::default().build().unwrap();
        let ds = ToyDataset::Gaussian(GaussianSpec::standard_normal(Dims::new(1, 1, 1, 1)).unwrap());
        let cfg = TrainConfig { steps: 0, ..TrainConfig::default() };
        let out = train_toy_denoiser(&ds, &sched, scalar_arch(), &cfg).unwrap();
        assert_eq!(out.model, ToyDenoiser::init(scalar_arch(), cfg.seed).unwrap());
        assert!(out.losses.is_empty());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let sched = ScheduleParams::default().build().unwrap();
        let arch = ToyArch::new(Dims::new(2, 1, 1, 2), 6, 2);
        let d = arch.input_dims;
        let ds = ToyDataset::Labeled(vec![
            (0, GaussianSpec::standard_normal(d).unwrap()),
            (1, GaussianSpec::new(d, vec![1.0; 4], Covariance::Isotropic { variance: 0.5 }).unwrap()),
        ]);
        let cfg = TrainConfig { batch: 5, ..TrainConfig::default() };
        let batch = draw_training_batch(&ds, &sched, &cfg, &mut RngStream::new(4, 1)).unwrap();
        let model = ToyDenoiser::init(arch, 9).unwrap();
        let (_, grad) = model.loss_and_grad(&batch).unwrap();
        let h = 1e-5;
        for i in 0..model.params.len() {
            let mut plus = model.clone();
            plus.params[i] += h;
            let mut minus = model.clone();
            minus.params[i] -= h;
            let fd = (plus.loss(&batch).unwrap() - minus.loss(&batch).unwrap()) / (2.0 * h);
            let tol = 1e-4 * grad[i].abs().max(fd.abs()) + 1e-9;
            assert!((grad[i] - fd).abs() <= tol, "param {i}: {} vs {fd}", grad[i]);
        }
    }

    #[test]
    fn divergence_reports_step() {
        let sched = ScheduleParams::default().build().unwrap();
        let ds = ToyDataset::Gaussian(GaussianSpec::standard_normal(Dims::new(1, 1, 1, 1)).unwrap());
        let cfg = TrainConfig { steps: 50, lr: 1e200, warmup_steps: 0, ..TrainConfig::default() };
        match train_toy_denoiser(&ds, &sched, scalar_arch(), &cfg) {
            Err(Error::TrainingFailure { step, .. }) => assert!(step > 0 && step <= 50),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let sched = ScheduleParams::default().build().unwrap();
        let ds = ToyDataset::Gaussian(GaussianSpec::standard_normal(Dims::new(1, 1, 1, 1)).unwrap());
        for cfg in [
            TrainConfig { prompt_drop: 1.5, ..TrainConfig::default() },
            TrainConfig { noise_offset: -0.1, ..TrainConfig::default() },
            TrainConfig { lr: f64::NAN, ..TrainConfig::default() },
        ] {
            assert!(matches!(
                train_toy_denoiser(&ds, &sched, scalar_arch(), &cfg),
                Err(Error::InvalidParameter { .. })
            ));
        }
        let wrong = ToyDataset::Gaussian(GaussianSpec::standard_normal(Dims::new(1, 1, 1, 2)).unwrap());
        assert!(train_toy_denoiser(&wrong, &sched, scalar_arch(), &TrainConfig::default()).is_err());
    }

    #[test]
    fn offset_noise_is_shared_across_plane() {
        let sched = ScheduleParams::default().build().unwrap();
        let d = Dims::new(2, 2, 3, 3);
        let target = GaussianSpec::new(d, vec![], Covariance::Isotropic { variance: 0.0 }).unwrap();
        let ds = ToyDataset::Gaussian(target);
        let base = TrainConfig { batch: 1, noise_offset: 0.0, ..TrainConfig::default() };
        let off = TrainConfig { noise_offset: 10.0, ..base };
        let a = draw_training_batch(&ds, &sched, &base, &mut RngStream::new(1, 1)).unwrap();
        let b = draw_training_batch(&ds, &sched, &off, &mut RngStream::new(1, 1)).unwrap();
        let diff = b[0].eps.lincomb(1.0, &a[0].eps, -1.0).unwrap();
        for f in 0..2 {
            for c in 0..2 {
                let first = diff.get(f, c, 0, 0);
                assert!(first.abs() > 0.0);
                for h in 0..3 {
                    for w in 0..3 {
                        assert!((diff.get(f, c, h, w) - first).abs() < 1e-12);
                    }
                }
            }
        }
        assert!((diff.get(0, 0, 0, 0) - diff.get(0, 1, 0, 0)).abs() > 1e-9);
    }

    #[test]
    fn prompt_drop_rate() {
        let sched = ScheduleParams::default().build().unwrap();
        let d = Dims::new(1, 1, 1, 1);
        let ds = ToyDataset::Labeled(vec![(0, GaussianSpec::standard_normal(d).unwrap())]);
        let cfg = TrainConfig { batch: 20_000, ..TrainConfig::default() };
        let b = draw_training_batch(&ds, &sched, &cfg, &mut RngStream::new(2, 1)).unwrap();
        let nulls = b.iter().filter(|e| e.cond == Condition::Null).count() as f64 / 20_000.0;
        assert!((nulls - 0.3).abs() < 0.015, "{nulls}");
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = ToyDenoiser::init(scalar_arch(), 1).unwrap();
        m.save(dir.path(), "model").unwrap();
        let back = ToyDenoiser::load(dir.path().join("model.json")).unwrap();
        assert_eq!(back.arch(), m.arch());
        for (a, b) in back.params().iter().zip(m.params()) {
            assert_eq!(*a, *b as f32 as f64);
        }
        let sidecar: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("model.json")).unwrap()).unwrap();
        assert_eq!(sidecar["input_dims"], serde_json::json!([1, 1, 1, 1]));
        assert_eq!(sidecar["embed_dim"], 16);
    }

    #[test]
    fn embedding_shape() {
        let e = sinusoidal_embedding(0, 16);
        assert_eq!(e.len(), 16);
        assert!(e[..8].iter().all(|&v| v == 0.0));
        assert!(e[8..].iter().all(|&v| v == 1.0));
    }
}
