//! Run configuration: JSON documents layered as built-in defaults, then the
//! config file, then `--key=value` overrides, and validated with field paths.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CliError;
use crate::denoisers::{AnalyticDenoiser, Condition, Covariance, Denoiser, GaussianSpec, ToyDenoiser, TrainConfig};
use crate::error::Error;
use crate::eval::MetricKind;
use crate::latent::Dims;
use crate::mixture::{ChainConfig, MixturePolicy, ModelChoice, Selector};
use crate::sampler::EntropyConfig;
use crate::schedule::{make_step_map, NoiseSchedule, ScheduleParams, StepMap};
use crate::smoothing::SmoothingConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyPreset {
    #[serde(rename = "res-64")]
    Res64,
    #[serde(rename = "res-128")]
    Res128,
    #[serde(rename = "res-256")]
    Res256,
    VideoOnly,
    ImageOnly,
}

/// A named preset or explicit knots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Preset(PolicyPreset),
    Explicit(MixturePolicy),
}

impl PolicySpec {
    /// `None` for image-only, which no `P_V` curve expresses.
    pub fn resolve(&self) -> Option<MixturePolicy> {
        match *self {
            PolicySpec::Preset(PolicyPreset::Res64) => Some(MixturePolicy::RES_64),
            PolicySpec::Preset(PolicyPreset::Res128) => Some(MixturePolicy::RES_128),
            PolicySpec::Preset(PolicyPreset::Res256) => Some(MixturePolicy::RES_256),
            PolicySpec::Preset(PolicyPreset::VideoOnly) => Some(MixturePolicy::VIDEO_ONLY),
            PolicySpec::Preset(PolicyPreset::ImageOnly) => None,
            PolicySpec::Explicit(p) => Some(p),
        }
    }

    pub fn selector(&self) -> Selector {
        match self.resolve() {
            Some(p) => Selector::Policy(p),
            None => Selector::Always(ModelChoice::Image),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub init: u64,
    pub step_noise: u64,
    pub selection: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            init: 0,
            step_noise: 1,
            selection: 2,
        }
    }
}

/// A Gaussian target whose dims come from the surrounding config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    /// Empty means zero.
    pub mean: Vec<f64>,
    pub covariance: Covariance,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            mean: Vec::new(),
            covariance: Covariance::Isotropic { variance: 1.0 },
        }
    }
}

impl TargetConfig {
    pub fn to_spec(&self, dims: Dims) -> Result<GaussianSpec, CliError> {
        GaussianSpec::new(dims, self.mean.clone(), self.covariance.clone()).map_err(at("target"))
    }
}

/// Where a denoiser comes from. `analytic` is the MMSE denoiser of the
/// config's target (the image model uses the first frame's marginal).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DenoiserSource {
    #[default]
    Analytic,
    /// Sidecar `.json` written by `train-toy`.
    Toy { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub dims: Dims,
    pub chains: usize,
    pub guidance: f64,
    pub guidance_video: Option<f64>,
    pub guidance_image: Option<f64>,
    pub infer_steps: usize,
    pub schedule: ScheduleParams,
    pub entropy: EntropyConfig,
    pub policy: PolicySpec,
    pub smoothing: Option<SmoothingConfig>,
    pub seeds: Seeds,
    pub target: TargetConfig,
    pub video_denoiser: DenoiserSource,
    pub image_denoiser: DenoiserSource,
    pub condition: Condition,
    /// Metrics for the run report (written when `chains >= 2`). Entries that
    /// do not apply to `dims` are skipped.
    pub metrics: Vec<String>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            dims: Dims::new(4, 1, 4, 4),
            chains: 1,
            guidance: 2.0,
            guidance_video: None,
            guidance_image: None,
            infer_steps: 50,
            schedule: ScheduleParams::default(),
            entropy: EntropyConfig {
                r_video: 0.0,
                r_image: 0.0,
                gamma: 0.02,
            },
            policy: PolicySpec::Preset(PolicyPreset::Res64),
            smoothing: None,
            seeds: Seeds::default(),
            target: TargetConfig::default(),
            video_denoiser: DenoiserSource::Analytic,
            image_denoiser: DenoiserSource::Analytic,
            condition: Condition::Null,
            metrics: ["moments", "autocorr:1", "flicker", "w2"].map(String::from).to_vec(),
        }
    }
}

/// Everything a sampling run needs, built from a validated config.
pub struct PreparedRun {
    pub schedule: Arc<NoiseSchedule>,
    pub steps: StepMap,
    pub video: Box<dyn Denoiser>,
    pub image: Box<dyn Denoiser>,
    pub selector: Selector,
    pub chain: ChainConfig,
    pub target: GaussianSpec,
    pub metrics: Vec<MetricKind>,
}

impl SamplerConfig {
    /// Checks every field and builds the run. Any failure names its field.
    pub fn prepare(&self) -> Result<PreparedRun, CliError> {
        self.dims.validate().map_err(at("dims"))?;
        if self.chains == 0 {
            return Err(CliError::invalid("chains", "must be at least 1"));
        }
        for (path, g) in [
            ("guidance", Some(self.guidance)),
            ("guidance_video", self.guidance_video),
            ("guidance_image", self.guidance_image),
        ] {
            if let Some(g) = g {
                if !g.is_finite() {
                    return Err(CliError::invalid(path, format!("must be finite, got {g}")));
                }
            }
        }
        let schedule = Arc::new(self.schedule.build().map_err(at("schedule"))?);
        if self.infer_steps == 0 || self.infer_steps > schedule.train_steps() {
            return Err(CliError::invalid(
                "infer_steps",
                format!("must be in 1..={}, got {}", schedule.train_steps(), self.infer_steps),
            ));
        }
        let steps = make_step_map(schedule.train_steps(), self.infer_steps).map_err(at("infer_steps"))?;
        self.entropy.validate().map_err(at("entropy"))?;
        if let Some(p) = self.policy.resolve() {
            p.validate().map_err(at("policy"))?;
        }
        if let Some(s) = &self.smoothing {
            s.validate().map_err(at("smoothing"))?;
        }
        let target = self.target.to_spec(self.dims)?;
        let video = load_denoiser(
            "video_denoiser",
            &self.video_denoiser,
            self.dims,
            || Ok(target.clone()),
            &schedule,
        )?;
        let image = load_denoiser(
            "image_denoiser",
            &self.image_denoiser,
            self.dims.single_frame(),
            || target.frame_marginal(0),
            &schedule,
        )?;
        let metrics = self
            .metrics
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.parse::<MetricKind>()
                    .map_err(|e| CliError::invalid(format!("metrics[{i}]"), reason(&e)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PreparedRun {
            schedule,
            steps,
            video,
            image,
            selector: self.policy.selector(),
            chain: ChainConfig {
                guidance: self.guidance,
                guidance_video: self.guidance_video,
                guidance_image: self.guidance_image,
                entropy: self.entropy,
            },
            target,
            metrics,
        })
    }

    /// Rewrites relative toy-model paths against `base`.
    pub(crate) fn anchor_paths(&mut self, base: &Path) {
        for src in [&mut self.video_denoiser, &mut self.image_denoiser] {
            if let DenoiserSource::Toy { path } = src {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }
}

fn load_denoiser(
    field: &str,
    src: &DenoiserSource,
    dims: Dims,
    analytic_target: impl FnOnce() -> crate::Result<GaussianSpec>,
    schedule: &Arc<NoiseSchedule>,
) -> Result<Box<dyn Denoiser>, CliError> {
    match src {
        DenoiserSource::Analytic => {
            let t = analytic_target().map_err(at("target"))?;
            Ok(Box::new(AnalyticDenoiser::new(t, schedule.clone())))
        }
        DenoiserSource::Toy { path } => {
            let model = ToyDenoiser::load(path).map_err(|e| {
                CliError::invalid(format!("{field}.path"), format!("{}: {}", path.display(), reason(&e)))
            })?;
            if model.input_dims() != dims {
                return Err(CliError::invalid(
                    field,
                    format!("model takes {}, run needs {dims}", model.input_dims()),
                ));
            }
            Ok(Box::new(model))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainToyConfig {
    pub dims: Dims,
    pub target: TargetConfig,
    pub hidden_width: usize,
    pub schedule: ScheduleParams,
    pub train: TrainConfig,
}

impl Default for TrainToyConfig {
    fn default() -> Self {
        Self {
            dims: Dims::new(1, 1, 1, 1),
            target: TargetConfig::default(),
            hidden_width: 64,
            schedule: ScheduleParams::default(),
            train: TrainConfig::default(),
        }
    }
}

impl TrainToyConfig {
    pub fn validate(&self) -> Result<(GaussianSpec, NoiseSchedule), CliError> {
        self.dims.validate().map_err(at("dims"))?;
        if self.hidden_width == 0 {
            return Err(CliError::invalid("hidden_width", "must be at least 1"));
        }
        self.train.validate().map_err(at("train"))?;
        let sched = self.schedule.build().map_err(at("schedule"))?;
        Ok((self.target.to_spec(self.dims)?, sched))
    }
}

/// One sweep axis: a dotted config key and the values it takes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Partial sampler config shared by every run.
    #[serde(default)]
    pub base: Value,
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
}

fn default_max_runs() -> usize {
    1024
}

impl SweepSpec {
    /// Override sets in row-major order (last axis fastest).
    pub fn runs(&self) -> Result<Vec<Vec<(String, Value)>>, CliError> {
        let mut total: usize = 1;
        for (i, a) in self.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(CliError::invalid(format!("axes[{i}].values"), "is empty"));
            }
            total = total.saturating_mul(a.values.len());
        }
        if total > self.max_runs {
            return Err(CliError::invalid(
                "max_runs",
                format!("sweep has {total} runs, limit is {}", self.max_runs),
            ));
        }
        let mut rows = vec![Vec::new()];
        for a in &self.axes {
            rows = rows
                .into_iter()
                .flat_map(|row| {
                    a.values.iter().map(move |v| {
                        let mut r = row.clone();
                        r.push((a.key.clone(), v.clone()));
                        r
                    })
                })
                .collect();
        }
        Ok(rows)
    }
}

/// Message of a library error without the variant prefix where that prefix
/// would repeat the field path.
fn reason(e: &Error) -> String {
    match e {
        Error::InvalidParameter { reason, .. } => reason.clone(),
        other => other.to_string(),
    }
}

/// Maps a library validation error under config field `prefix`.
pub(crate) fn at(prefix: &'static str) -> impl Fn(Error) -> CliError {
    move |e| {
        let path = match &e {
            Error::InvalidParameter { name, .. } if !prefix.ends_with(name) => format!("{prefix}.{name}"),
            _ => prefix.to_string(),
        };
        CliError::invalid(path, reason(&e))
    }
}

/// Recursively merges `over` into `base`; objects merge, anything else
/// replaces. Objects carrying a `kind` tag replace too.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        // A tagged enum value replaces the default variant wholesale.
        (Value::Object(b), Value::Object(o)) if !o.contains_key("kind") => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

/// Parses an override value: JSON if it parses, otherwise a bare string.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets a dotted `key` inside `doc`. Numeric segments index arrays; missing
/// or null intermediate objects are created.
pub fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut cur = doc;
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(CliError::invalid(key, "empty key segment"));
    }
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Value::Array(items) = cur {
            let len = items.len();
            let idx: usize = seg
                .parse()
                .ok()
                .filter(|&k| k < len)
                .ok_or_else(|| CliError::invalid(key, format!("`{seg}` is not an index below {len}")))?;
            if last {
                items[idx] = value;
                return Ok(());
            }
            cur = &mut items[idx];
            continue;
        }
        if !cur.is_object() {
            *cur = Value::Object(Map::new());
        }
        let obj = cur.as_object_mut().unwrap();
        if last {
            obj.insert(seg.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(seg.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last segment")
}

/// Defaults of `T`, then `file`, then `overrides`, deserialized with a
/// field-path diagnostic on failure.
pub fn layered<T: Default + Serialize + DeserializeOwned>(
    file: Option<Value>,
    overrides: &[(String, Value)],
) -> Result<T, CliError> {
    let mut doc = serde_json::to_value(T::default()).map_err(|e| CliError::invalid("", e.to_string()))?;
    if let Some(f) = file {
        if !f.is_object() {
            return Err(CliError::invalid("", "config must be a JSON object"));
        }
        merge(&mut doc, f);
    }
    for (k, v) in overrides {
        set_path(&mut doc, k, v.clone())?;
    }
    from_value(doc)
}

pub fn from_value<T: DeserializeOwned>(doc: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::invalid(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(path.display().to_string(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(path.display().to_string(), e.to_string()))
}
