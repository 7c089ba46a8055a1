//! One 50-step DDPM chain with the closed-form denoiser for a standard
//! normal target, then summary moments over a batch of chains.

use std::sync::Arc;

use mixdiff::denoisers::{AnalyticDenoiser, Condition, GaussianSpec};
use mixdiff::eval::empirical_moments;
use mixdiff::mixture::{run_mixture_sampling, ChainConfig, ChainStreams, ModelChoice, Selector};
use mixdiff::schedule::{make_step_map, ScheduleParams};
use mixdiff::Dims;

fn main() -> mixdiff::Result<()> {
    let dims = Dims::new(8, 1, 4, 4);
    let sched = Arc::new(ScheduleParams::default().build()?);
    let steps = make_step_map(sched.train_steps(), 50)?;
    let video = AnalyticDenoiser::new(GaussianSpec::standard_normal(dims)?, sched.clone());
    let image = AnalyticDenoiser::new(GaussianSpec::standard_normal(dims.single_frame())?, sched.clone());

    let mut out = Vec::new();
    for chain in 0..500 {
        let mut streams = ChainStreams::new(0, 1, 2, chain);
        let (x, _) = run_mixture_sampling(
            &video,
            &image,
            &Selector::Always(ModelChoice::Video),
            &sched,
            &steps,
            &ChainConfig::default(),
            Condition::Null,
            &mut streams,
        )?;
        out.push(x);
    }
    let m = empirical_moments(&out, false)?;
    let mean = m.mean.iter().sum::<f64>() / m.mean.len() as f64;
    let var = m.covariance.variances().iter().sum::<f64>() / m.mean.len() as f64;
    println!("{} chains of {dims}: mean {mean:+.4}, variance {var:.4}", out.len());
    Ok(())
}
