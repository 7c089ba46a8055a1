use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{self, SamplerConfig, SweepSpec, TargetConfig, TrainToyConfig};
use super::CliError;
use crate::denoisers::{
    empirical_denoising_mse, train_toy_denoiser, AnalyticDenoiser, ToyArch, ToyDataset,
};
use crate::error::Error;
use crate::eval::{evaluate, MetricKind, MetricReport};
use crate::latent::{decode_lvt, encode_lvt, read_lvt};
use crate::latent::LatentVideo;
use crate::mixture::{run_mixture_sampling, ChainStreams, MixturePolicy};
use crate::rng::RngStream;
use crate::schedule::ScheduleParams;
use crate::smoothing::temporal_smooth;

pub const ARTIFACT_VERSION: &str = concat!("mixdiff ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub chain: usize,
    pub lvt: String,
    pub trace: String,
}

/// Record of a `sample` run. `config` alone reproduces the `.lvt` files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config: SamplerConfig,
    pub schedule: ScheduleParams,
    /// The `P_V` knots used; `None` for image-only.
    pub resolved_policy: Option<MixturePolicy>,
    pub outputs: Vec<ChainOutput>,
    pub report: Option<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub artifact_version: String,
    pub command: String,
    pub config: TrainToyConfig,
    pub arch: ToyArch,
    pub final_loss: Option<f64>,
    /// Denoising MSE of the trained model and of the exact MMSE denoiser,
    /// on the same held-out draws.
    pub eval_mse: f64,
    pub mmse_floor: f64,
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(Error::Io(e)))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(Error::Io(e)))
}

fn write_report(report: &MetricReport, out: &Path) -> Result<(), CliError> {
    write(&out.join("report.json"), report.to_json()?)?;
    write(&out.join("report.csv"), report.to_csv())
}

/// Metrics that make sense for videos of `frames` frames.
fn applicable(kinds: &[MetricKind], frames: usize) -> Vec<MetricKind> {
    kinds
        .iter()
        .copied()
        .filter(|k| match k {
            MetricKind::Autocorr(lag) => *lag < frames,
            MetricKind::Flicker => frames >= 2,
            _ => true,
        })
        .collect()
}

/// Runs `cfg.chains` chains into `out`: `chain_XXXXX.lvt`, a step trace per
/// chain, `manifest.json`, and with two or more chains `report.{json,csv}`
/// computed from the values as stored.
pub fn cmd_sample(cfg: &SamplerConfig, out: &Path) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let run = cfg.prepare()?;
    create_dir(out)?;

    let results = (0..cfg.chains)
        .into_par_iter()
        .map(|i| {
            let mut streams = ChainStreams::new(cfg.seeds.init, cfg.seeds.step_noise, cfg.seeds.selection, i as u64);
            let (x, trace) = run_mixture_sampling(
                &*run.video,
                &*run.image,
                &run.selector,
                &run.schedule,
                &run.steps,
                &run.chain,
                cfg.condition,
                &mut streams,
            )?;
            let x = match &cfg.smoothing {
                Some(s) => temporal_smooth(&x, s),
                None => x,
            };
            Ok((encode_lvt(&x), trace.to_jsonl()?))
        })
        .collect::<crate::Result<Vec<_>>>()?;

    let mut outputs = Vec::with_capacity(results.len());
    let mut stored = Vec::with_capacity(results.len());
    for (i, (bytes, trace)) in results.into_iter().enumerate() {
        let lvt = format!("chain_{i:05}.lvt");
        let tr = format!("chain_{i:05}.trace.jsonl");
        write(&out.join(&lvt), &bytes)?;
        write(&out.join(&tr), trace)?;
        stored.push(decode_lvt(&bytes)?);
        outputs.push(ChainOutput {
            chain: i,
            lvt,
            trace: tr,
        });
    }

    let report = if stored.len() >= 2 {
        let kinds = applicable(&run.metrics, cfg.dims.frames);
        let r = evaluate(&stored, Some(&run.target), &kinds)?;
        write_report(&r, out)?;
        Some("report.json".to_string())
    } else {
        None
    };

    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION.into(),
        command: "sample".into(),
        config: cfg.clone(),
        schedule: cfg.schedule,
        resolved_policy: cfg.policy.resolve(),
        outputs,
        report,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write(&out.join("manifest.json"), serde_json::to_string_pretty(&manifest).map_err(Error::from)?)?;
    Ok(manifest)
}

/// Trains the toy denoiser on draws from the config target. Writes
/// `model.{f32,json}`, `init.{f32,json}`, `loss.csv` and `manifest.json`.
pub fn cmd_train_toy(cfg: &TrainToyConfig, out: &Path) -> Result<TrainManifest, CliError> {
    let start = Instant::now();
    let (target, sched) = cfg.validate()?;
    let arch = ToyArch::new(cfg.dims, cfg.hidden_width, 0);
    let trained = train_toy_denoiser(&ToyDataset::Gaussian(target.clone()), &sched, arch, &cfg.train)?;
    create_dir(out)?;
    trained.model.save(out, "model")?;
    trained.initial.save(out, "init")?;
    let mut csv = String::from("step,loss\n");
    for (i, l) in trained.losses.iter().enumerate() {
        csv.push_str(&format!("{i},{l}\n"));
    }
    write(&out.join("loss.csv"), csv)?;

    let sched = std::sync::Arc::new(sched);
    let held_out = 4096;
    let mut rng = RngStream::new(cfg.train.seed, 2);
    let eval_mse = empirical_denoising_mse(&trained.model, &target, &sched, None, held_out, &mut rng)?;
    let mut rng = RngStream::new(cfg.train.seed, 2);
    let oracle = AnalyticDenoiser::new(target.clone(), sched.clone());
    let mmse_floor = empirical_denoising_mse(&oracle, &target, &sched, None, held_out, &mut rng)?;

    let manifest = TrainManifest {
        artifact_version: ARTIFACT_VERSION.into(),
        command: "train-toy".into(),
        config: cfg.clone(),
        arch,
        final_loss: trained.losses.last().copied(),
        eval_mse,
        mmse_floor,
        files: ["model.f32", "model.json", "init.f32", "init.json", "loss.csv"]
            .map(String::from)
            .to_vec(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write(&out.join("manifest.json"), serde_json::to_string_pretty(&manifest).map_err(Error::from)?)?;
    Ok(manifest)
}

/// Reads every `.lvt` matching `pattern` and writes `report.{json,csv}`.
/// With no metric list: moments, lag-1 autocorrelation and flicker where
/// they apply, plus W2 when a target is given.
pub fn cmd_eval(pattern: &str, target: Option<&Path>, metrics: &[String], out: &Path) -> Result<MetricReport, CliError> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| CliError::invalid("inputs", e.to_string()))?
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::invalid("inputs", e.to_string()))?;
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::invalid("inputs", format!("no files match `{pattern}`")));
    }
    let mut videos: Vec<LatentVideo> = Vec::with_capacity(paths.len());
    for p in &paths {
        let v = read_lvt(p).map_err(|e| CliError::invalid(p.display().to_string(), e.to_string()))?;
        if let Some(first) = videos.first() {
            if first.dims() != v.dims() {
                return Err(CliError::invalid(
                    p.display().to_string(),
                    format!("dims {} differ from {} of {}", v.dims(), first.dims(), paths[0].display()),
                ));
            }
        }
        videos.push(v);
    }
    let dims = videos[0].dims();
    let target = match target {
        Some(t) => {
            let tc: TargetConfig = config::from_value(config::read_json(t)?).map_err(|e| match e {
                CliError::Invalid { path, reason } if path.is_empty() => CliError::invalid("target", reason),
                CliError::Invalid { path, reason } => CliError::invalid(format!("target.{path}"), reason),
                other => other,
            })?;
            Some(tc.to_spec(dims)?)
        }
        None => None,
    };
    let kinds = if metrics.is_empty() {
        let mut k = vec![MetricKind::Moments, MetricKind::Autocorr(1), MetricKind::Flicker];
        if target.is_some() {
            k.push(MetricKind::W2);
        }
        if videos.len() < 2 {
            k.retain(|k| *k == MetricKind::Flicker);
        }
        applicable(&k, dims.frames)
    } else {
        metrics
            .iter()
            .enumerate()
            .map(|(i, m)| m.parse().map_err(|e: Error| CliError::invalid(format!("metrics[{i}]"), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?
    };
    let report = evaluate(&videos, target.as_ref(), &kinds).map_err(|e| match e {
        Error::InsufficientSamples { .. } => CliError::invalid("inputs", e.to_string()),
        other => CliError::invalid("metrics", other.to_string()),
    })?;
    create_dir(out)?;
    write_report(&report, out)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub run: usize,
    pub dir: String,
    pub overrides: Vec<(String, Value)>,
    pub report: Option<MetricReport>,
    /// Reused from an earlier, identical run in the same directory.
    pub resumed: bool,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs every point of the sweep into `out/run_XXXX`, skipping points whose
/// directory already holds a manifest with the same config and a report.
/// Writes `results.csv` and `results.json` in row order.
pub fn cmd_sweep(spec: &SweepSpec, out: &Path) -> Result<Vec<SweepRow>, CliError> {
    let rows = spec.runs()?;
    let base = (!spec.base.is_null()).then(|| spec.base.clone());
    let configs = rows
        .iter()
        .map(|ov| {
            let cfg: SamplerConfig = config::layered(base.clone(), ov)?;
            cfg.prepare()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    create_dir(out)?;

    let mut results = Vec::with_capacity(rows.len());
    for (k, (ov, cfg)) in rows.into_iter().zip(configs).enumerate() {
        let name = format!("run_{k:04}");
        let dir = out.join(&name);
        let previous = fs::read(dir.join("manifest.json"))
            .ok()
            .and_then(|b| serde_json::from_slice::<RunManifest>(&b).ok())
            .filter(|m| m.config == cfg);
        let (report, resumed) = match previous {
            Some(m) => match &m.report {
                Some(r) => match fs::read(dir.join(r)).ok().and_then(|b| serde_json::from_slice(&b).ok()) {
                    Some(rep) => (Some(rep), true),
                    None => (rerun(&cfg, &dir)?, false),
                },
                None => (None, true),
            },
            None => (rerun(&cfg, &dir)?, false),
        };
        results.push(SweepRow {
            run: k,
            dir: name,
            overrides: ov,
            report,
            resumed,
        });
    }

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let keys: Vec<String> = spec.axes.iter().map(|a| a.key.clone()).collect();
    let metric_names: Vec<String> = results
        .iter()
        .find_map(|r| r.report.as_ref())
        .map(|r| r.metrics.iter().map(|m| m.name.clone()).collect())
        .unwrap_or_default();
    let mut header = vec!["run".to_string()];
    header.extend(keys.iter().cloned());
    for m in &metric_names {
        header.push(m.clone());
        header.push(format!("{m}_half_width"));
    }
    let csv_err = |e: csv::Error| CliError::Runtime(Error::Format(e.to_string()));
    wtr.write_record(&header).map_err(csv_err)?;
    for r in &results {
        let mut rec = vec![r.run.to_string()];
        rec.extend(r.overrides.iter().map(|(_, v)| cell(v)));
        for m in &metric_names {
            match r.report.as_ref().and_then(|rep| rep.get(m)) {
                Some(x) => {
                    rec.push(x.value.to_string());
                    rec.push(x.half_width.to_string());
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Runtime(Error::Format(e.to_string())))?;
    write(&out.join("results.csv"), bytes)?;
    write(&out.join("results.json"), serde_json::to_string_pretty(&results).map_err(Error::from)?)?;
    Ok(results)
}

fn rerun(cfg: &SamplerConfig, dir: &Path) -> Result<Option<MetricReport>, CliError> {
    let m = cmd_sample(cfg, dir)?;
    match m.report {
        Some(r) => {
            let bytes = fs::read(dir.join(r)).map_err(Error::from)?;
            Ok(Some(serde_json::from_slice(&bytes).map_err(Error::from)?))
        }
        None => Ok(None),
    }
}

/// Writes `frame_XXXX.pgm` (binary P5, maxval 255) for each frame of one
/// channel, min-max scaled over the whole channel. A constant channel maps
/// to mid-gray 128.
pub fn cmd_export_frames(input: &Path, channel: usize, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let v = read_lvt(input).map_err(|e| CliError::invalid("input", format!("{}: {e}", input.display())))?;
    let d = v.dims();
    if channel >= d.channels {
        return Err(CliError::invalid(
            "channel",
            format!("channel {channel} out of range, video has {}", d.channels),
        ));
    }
    let plane = d.plane_len();
    let values: Vec<&[f64]> = (0..d.frames)
        .map(|f| {
            let start = f * d.frame_len() + channel * plane;
            &v.data()[start..start + plane]
        })
        .collect();
    let (lo, hi) = values
        .iter()
        .flat_map(|p| p.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    create_dir(out)?;
    let mut paths = Vec::with_capacity(d.frames);
    for (f, p) in values.iter().enumerate() {
        let mut bytes = format!("P5\n{} {}\n255\n", d.width, d.height).into_bytes();
        bytes.extend(p.iter().map(|&x| {
            if hi > lo {
                ((x - lo) / (hi - lo) * 255.0).round() as u8
            } else {
                128
            }
        }));
        let path = out.join(format!("frame_{f:04}.pgm"));
        write(&path, bytes)?;
        paths.push(path);
    }
    Ok(paths)
}
