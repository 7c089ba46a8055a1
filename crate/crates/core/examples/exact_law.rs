//! Exact output distribution of a chain with fixed model choices, compared
//! with the target it was built for.

use std::sync::Arc;

use mixdiff::denoisers::{AnalyticDenoiser, Condition, Covariance, GaussianSpec};
use mixdiff::eval::gaussian_w2;
use mixdiff::mixture::{chain_output_law, ChainConfig, ModelChoice};
use mixdiff::sampler::EntropyConfig;
use mixdiff::schedule::{make_step_map, ScheduleParams};
use mixdiff::Dims;

fn main() -> mixdiff::Result<()> {
    let dims = Dims::new(4, 1, 2, 2);
    let target = GaussianSpec::new(dims, vec![], Covariance::Ar1Temporal { rho: 0.9, frame_variance: 1.0 })?;
    let sched = Arc::new(ScheduleParams::default().build()?);
    let video = AnalyticDenoiser::new(target.clone(), sched.clone());
    let image = AnalyticDenoiser::new(target.frame_marginal(0)?, sched.clone());
    let cov = target.covariance_matrix();

    for n in [10, 50, 200] {
        let steps = make_step_map(sched.train_steps(), n)?;
        for gamma in [0.5, 1.0] {
            let cfg = ChainConfig { entropy: EntropyConfig { gamma, ..Default::default() }, ..Default::default() };
            let law = chain_output_law(&video, &image, &vec![ModelChoice::Video; n], &sched, &steps, &cfg, Condition::Null)?;
            let w2 = gaussian_w2(law.mean.as_slice(), &law.covariance, target.mean(), &cov)?;
            println!("{n:3} steps, gamma {gamma}: W2 to target {w2:.4}");
        }
    }
    Ok(())
}
