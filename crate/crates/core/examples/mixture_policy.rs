//! Switching between a video and an image denoiser with the P_V(t) presets,
//! on a target whose frames are correlated in time.

use std::sync::Arc;

use mixdiff::denoisers::{AnalyticDenoiser, Condition, Covariance, GaussianSpec};
use mixdiff::eval::temporal_autocorr;
use mixdiff::mixture::{p_video, run_mixture_sampling, ChainConfig, ChainStreams, MixturePolicy, ModelChoice, Selector};
use mixdiff::schedule::{make_step_map, ScheduleParams};
use mixdiff::Dims;

fn main() -> mixdiff::Result<()> {
    let dims = Dims::new(6, 1, 3, 3);
    let target = GaussianSpec::new(dims, vec![], Covariance::Ar1Temporal { rho: 0.9, frame_variance: 1.0 })?;
    let sched = Arc::new(ScheduleParams::default().build()?);
    let steps = make_step_map(sched.train_steps(), 50)?;
    let video = AnalyticDenoiser::new(target.clone(), sched.clone());
    let image = AnalyticDenoiser::new(target.frame_marginal(0)?, sched.clone());
    let cfg = ChainConfig::default();

    let p = MixturePolicy::RES_128;
    let curve: Vec<String> = [0.0, 0.4, 0.55, 0.7, 1.0]
        .iter()
        .map(|&t| format!("{t}:{:.2}", p_video(&p, t).unwrap()))
        .collect();
    println!("P_V for the 128² preset: {}", curve.join(" "));

    for (name, sel) in [
        ("image only", Selector::Always(ModelChoice::Image)),
        ("128² preset", Selector::Policy(p)),
        ("video only", Selector::Always(ModelChoice::Video)),
    ] {
        let mut out = Vec::new();
        let mut video_steps = 0;
        for chain in 0..400 {
            let mut streams = ChainStreams::new(0, 1, 2, chain);
            let (x, trace) = run_mixture_sampling(&video, &image, &sel, &sched, &steps, &cfg, Condition::Null, &mut streams)?;
            video_steps += trace.count(ModelChoice::Video);
            out.push(x);
        }
        let rho = temporal_autocorr(&out, 1)?;
        println!("{name:12} lag-1 autocorrelation {rho:.3}, video steps per chain {:.1}", video_steps as f64 / 400.0);
    }
    Ok(())
}
