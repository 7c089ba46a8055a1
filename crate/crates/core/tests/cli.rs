use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mixdiff::cli::config::layered;
use mixdiff::cli::{CliError, RunManifest, SamplerConfig, TrainManifest};
use mixdiff::denoisers::{Covariance, GaussianSpec};
use mixdiff::eval::MetricReport;
use mixdiff::latent::write_lvt;
use mixdiff::{Dims, LatentVideo, RngStream};
use proptest::prelude::*;
use serde_json::{json, Value};

fn mixdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixdiff"))
        .args(args)
        .env_remove("MIXDIFF_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = mixdiff(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn fails(args: &[&str], code: i32) -> String {
    let out = mixdiff(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_file<T: serde::de::DeserializeOwned>(p: impl AsRef<Path>) -> T {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

fn lvts(dir: &Path) -> Vec<Vec<u8>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "lvt"))
        .collect();
    paths.sort();
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

fn write_videos(dir: &Path, videos: &[LatentVideo]) {
    fs::create_dir_all(dir).unwrap();
    for (i, v) in videos.iter().enumerate() {
        write_lvt(dir.join(format!("v{i:05}.lvt")), v).unwrap();
    }
}

#[test]
fn sample_writes_chains_report_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    ok(&["sample", "--out", s(&out), "--chains=3", "--infer_steps=20"]);
    assert_eq!(lvts(&out).len(), 3);
    for i in 0..3 {
        let trace = fs::read_to_string(out.join(format!("chain_{i:05}.trace.jsonl"))).unwrap();
        assert_eq!(trace.lines().count(), 20);
    }
    let m: RunManifest = json_file(out.join("manifest.json"));
    assert_eq!(m.config.chains, 3);
    assert_eq!(m.outputs.len(), 3);
    let report: MetricReport = json_file(out.join(m.report.unwrap()));
    assert!(report.get("flicker").is_some());
    assert!(fs::read_to_string(out.join("report.csv")).unwrap().starts_with("name,value,half_width,n"));
}

#[test]
fn output_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from_env");
    let status = Command::new(env!("CARGO_BIN_EXE_mixdiff"))
        .args(["sample", "--infer_steps=5"])
        .env("MIXDIFF_OUTPUT_DIR", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn identical_configs_give_identical_bytes_and_seeds_matter() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let args = ["--chains=4", "--entropy.gamma=1", "--policy=res-256"];
    ok(&[&["sample", "--out", s(&a)][..], &args].concat());
    ok(&[&["sample", "--out", s(&b), "--jobs", "1"][..], &args].concat());
    ok(&[&["sample", "--out", s(&c), "--seeds.step_noise=5"][..], &args].concat());
    assert_eq!(lvts(&a), lvts(&b));
    assert_ne!(lvts(&a), lvts(&c));
}

#[test]
fn manifest_echoes_resolved_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"policy": "res-128", "chains": 2}"#).unwrap();
    let out = tmp.path().join("run");
    ok(&["sample", "--config", s(&cfg), "--out", s(&out)]);
    let m: Value = json_file(out.join("manifest.json"));
    assert_eq!(m["config"]["policy"], json!("res-128"));
    assert_eq!(m["resolved_policy"], json!({"t_v": 0.4, "t_e": 0.7, "p_e": 0.4, "p_f": 0.1}));

    let again = tmp.path().join("again");
    ok(&["sample", "--manifest", s(&out.join("manifest.json")), "--out", s(&again)]);
    assert_eq!(lvts(&out), lvts(&again));
}

#[test]
fn train_toy_without_steps_saves_its_initialization() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("toy");
    ok(&["train-toy", "--out", s(&out), "--train.steps=0"]);
    assert_eq!(fs::read(out.join("model.f32")).unwrap(), fs::read(out.join("init.f32")).unwrap());
}

#[test]
fn train_toy_records_defaults_and_tracks_the_floor() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("toy");
    ok(&["train-toy", "--out", s(&out), "--train.steps=1500"]);
    let m: TrainManifest = json_file(out.join("manifest.json"));
    let raw: Value = json_file(out.join("manifest.json"));
    assert_eq!(raw["config"]["train"]["prompt_drop"], json!(0.3));
    assert_eq!(raw["config"]["train"]["noise_offset"], json!(0.1));
    assert!(m.eval_mse < 1.15 * m.mmse_floor, "{} vs {}", m.eval_mse, m.mmse_floor);
    let loss = fs::read_to_string(out.join("loss.csv")).unwrap();
    assert_eq!(loss.lines().next(), Some("step,loss"));
    assert_eq!(loss.lines().count(), 1501);
}

#[test]
fn diverging_training_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let err = fails(&["train-toy", "--out", s(&tmp.path().join("t")), "--train.lr=1e200"], 1);
    assert!(err.contains("diverged"), "{err}");
}

#[test]
fn eval_reports_zero_flicker_for_static_videos() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("in");
    let mut rng = RngStream::new(1, 0);
    let videos: Vec<LatentVideo> = (0..5)
        .map(|_| {
            let frame: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
            let data = (0..3).flat_map(|_| frame.iter().copied()).collect();
            LatentVideo::from_vec(Dims::new(3, 2, 2, 2), data).unwrap()
        })
        .collect();
    write_videos(&dir, &videos);
    let out = tmp.path().join("eval");
    ok(&["eval", "--inputs", &format!("{}/*.lvt", s(&dir)), "--out", s(&out)]);
    let r: MetricReport = json_file(out.join("report.json"));
    assert_eq!(r.value("flicker"), Some(0.0));
}

#[test]
fn eval_recovers_ar1_correlation_and_w2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("in");
    let dims = Dims::new(4, 1, 2, 2);
    let spec = GaussianSpec::new(dims, vec![], Covariance::Ar1Temporal { rho: 0.9, frame_variance: 1.0 }).unwrap();
    let mut rng = RngStream::new(2, 0);
    let videos: Vec<LatentVideo> = (0..3000).map(|_| spec.sample(&mut rng)).collect();
    write_videos(&dir, &videos);
    let target = tmp.path().join("target.json");
    fs::write(&target, r#"{"covariance": {"kind": "ar1-temporal", "rho": 0.9, "frame_variance": 1.0}}"#).unwrap();
    let out = tmp.path().join("eval");
    ok(&["eval", "--inputs", &format!("{}/*.lvt", s(&dir)), "--target", s(&target), "--out", s(&out)]);
    let r: MetricReport = json_file(out.join("report.json"));
    let rho = r.value("temporal_autocorr[1]").unwrap();
    assert!((rho - 0.9).abs() < 0.02, "{rho}");
    assert!(r.value("w2_to_target").unwrap() < 0.3);
}

#[test]
fn eval_rejects_mixed_dims_and_bad_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("in");
    write_videos(
        &dir,
        &[
            LatentVideo::zeros(Dims::new(2, 1, 2, 2)).unwrap(),
            LatentVideo::zeros(Dims::new(3, 1, 2, 2)).unwrap(),
        ],
    );
    let pattern = format!("{}/*.lvt", s(&dir));
    let err = fails(&["eval", "--inputs", &pattern, "--out", s(&tmp.path().join("e"))], 2);
    assert!(err.contains("v00001.lvt"), "{err}");

    fs::write(dir.join("v00001.lvt"), b"LVT1 truncated").unwrap();
    let err = fails(&["eval", "--inputs", &pattern, "--out", s(&tmp.path().join("e"))], 2);
    assert!(err.contains("v00001.lvt"), "{err}");

    let err = fails(&["eval", "--inputs", &format!("{}/none*.lvt", s(&dir))], 2);
    assert!(err.contains("inputs"), "{err}");
}

#[test]
fn single_point_sweep_matches_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("sweep.json");
    fs::write(&spec, r#"{"base": {"chains": 3, "infer_steps": 10}, "axes": [{"key": "guidance", "values": [1.5]}]}"#)
        .unwrap();
    let sweep = tmp.path().join("sweep");
    ok(&["sweep", "--spec", s(&spec), "--out", s(&sweep)]);
    let direct = tmp.path().join("direct");
    ok(&["sample", "--out", s(&direct), "--chains=3", "--infer_steps=10", "--guidance=1.5"]);
    assert_eq!(lvts(&sweep.join("run_0000")), lvts(&direct));
    let a: MetricReport = json_file(sweep.join("run_0000/report.json"));
    let b: MetricReport = json_file(direct.join("report.json"));
    assert_eq!(a, b);
}

#[test]
fn sweep_grid_writes_one_row_per_point_and_resumes() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("sweep.json");
    fs::write(
        &spec,
        r#"{"base": {"chains": 2, "infer_steps": 5},
            "axes": [{"key": "policy", "values": ["res-64", "video-only"]},
                     {"key": "entropy.r_video", "values": [0.0, 0.5, 1.0]}]}"#,
    )
    .unwrap();
    let out = tmp.path().join("sweep");
    ok(&["sweep", "--spec", s(&spec), "--out", s(&out)]);
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("run,policy,entropy.r_video,"));
    assert!(lines[2].starts_with("1,res-64,0.5,"));
    assert!(lines[4].starts_with("3,video-only,0.0,"));

    let first: Vec<Value> = json_file(out.join("results.json"));
    assert!(first.iter().all(|r| r["resumed"] == json!(false)));
    ok(&["sweep", "--spec", s(&spec), "--out", s(&out)]);
    let second: Vec<Value> = json_file(out.join("results.json"));
    assert!(second.iter().all(|r| r["resumed"] == json!(true)));
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a["report"], b["report"]);
    }
    ok(&["sweep", "--spec", s(&spec), "--out", s(&out), "--chains=3"]);
    let third: Vec<Value> = json_file(out.join("results.json"));
    assert!(third.iter().all(|r| r["resumed"] == json!(false)));
}

#[test]
fn gamma_sweep_variance_is_nondecreasing() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("sweep.json");
    fs::write(
        &spec,
        r#"{"base": {"chains": 400, "dims": [4, 1, 2, 2], "policy": "video-only", "guidance": 1.0,
                     "target": {"covariance": {"kind": "ar1-temporal", "rho": 0.9, "frame_variance": 1.0}},
                     "metrics": ["moments"]},
            "axes": [{"key": "entropy.gamma", "values": [0.0, 0.05, 0.3, 1.0]}]}"#,
    )
    .unwrap();
    let out = tmp.path().join("sweep");
    ok(&["sweep", "--spec", s(&spec), "--out", s(&out)]);
    let rows: Vec<Value> = json_file(out.join("results.json"));
    let total: Vec<f64> = rows
        .iter()
        .map(|r| {
            let report: MetricReport = serde_json::from_value(r["report"].clone()).unwrap();
            report.metrics.iter().filter(|m| m.name.starts_with("var[")).map(|m| m.value).sum()
        })
        .collect();
    assert!(total.windows(2).all(|w| w[0] <= w[1]), "{total:?}");
    assert!((total[3] / 4.0 - 1.0).abs() < 0.15, "{total:?}");
}

#[test]
fn export_frames_writes_one_pgm_per_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let constant = tmp.path().join("c.lvt");
    write_lvt(&constant, &LatentVideo::filled(Dims::new(3, 2, 2, 3), 0.7).unwrap()).unwrap();
    let out = tmp.path().join("frames");
    ok(&["export-frames", "--input", s(&constant), "--channel", "1", "--out", s(&out)]);
    for f in 0..3 {
        let pgm = fs::read(out.join(format!("frame_{f:04}.pgm"))).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(&pgm[header.len()..], &[128u8; 6]);
    }

    let single = tmp.path().join("s.lvt");
    let mut v = LatentVideo::zeros(Dims::new(1, 1, 2, 2)).unwrap();
    v.data_mut().copy_from_slice(&[0.0, 1.0, 2.0, 3.0]);
    write_lvt(&single, &v).unwrap();
    let out = tmp.path().join("single");
    ok(&["export-frames", "--input", s(&single), "--out", s(&out)]);
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
    let pgm = fs::read(out.join("frame_0000.pgm")).unwrap();
    assert_eq!(&pgm[pgm.len() - 4..], &[0, 85, 170, 255]);

    let err = fails(&["export-frames", "--input", s(&single), "--channel", "1", "--out", s(&out)], 2);
    assert!(err.contains("channel"), "{err}");
}

#[test]
fn invalid_inputs_exit_two_with_the_field_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    for (arg, path) in [
        ("--entropy.gamma=-1", "entropy.gamma"),
        ("--entropy.r_video=1.5", "entropy.r_video"),
        ("--smoothing.threshold=-2", "smoothing.threshold"),
        ("--chains=0", "chains"),
        ("--policy=res-512", "policy"),
        ("--infer_steps=0", "infer_steps"),
        ("--dims=[0,1,2,2]", "dims"),
        ("--schedule.beta_end=2", "schedule"),
        ("--seeds.init=-1", "seeds.init"),
        ("--colour=red", "colour"),
    ] {
        let err = fails(&["sample", "--out", s(&out), arg], 2);
        assert!(err.contains(path), "{arg}: {err}");
    }
    let err = fails(&["sample", "--config", s(&tmp.path().join("missing.json"))], 2);
    assert!(err.contains("missing.json"), "{err}");
    fails(&["sample", "--jobs", "0"], 2);
    fails(&["frobnicate"], 2);
}

const FIELDS: &[&str] = &[
    "dims",
    "chains",
    "guidance",
    "guidance_video",
    "infer_steps",
    "schedule.T",
    "schedule.beta_start",
    "schedule.kind",
    "entropy.r_video",
    "entropy.r_image",
    "entropy.gamma",
    "smoothing.threshold",
    "smoothing.sigma_floor",
    "seeds.selection",
    "target.mean",
    "target.covariance",
    "metrics",
    "condition",
];

fn bad_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(json!("not a value")),
        Just(json!(-1)),
        Just(json!(-1e300)),
        Just(json!([1, 2])),
        Just(json!({"kind": "nope"})),
        Just(json!(true)),
        Just(json!(1e308)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn config_mutations_fail_at_their_own_field(field in prop::sample::select(FIELDS), value in bad_value()) {
        let result = layered::<SamplerConfig>(None, &[(field.to_string(), value.clone())])
            .and_then(|cfg| cfg.prepare().map(drop));
        if let Err(e) = result {
            match e {
                CliError::Invalid { path, .. } => {
                    let top = field.split('.').next().unwrap();
                    prop_assert!(path.starts_with(top), "{field} = {value}: reported `{path}`");
                }
                other => prop_assert!(false, "{field} = {value}: {other}"),
            }
        }
    }
}
