//! Training the toy MLP denoiser on a scalar Gaussian and comparing its
//! error with the closed-form optimum.

use std::sync::Arc;

use mixdiff::denoisers::{
    empirical_denoising_mse, train_toy_denoiser, AnalyticDenoiser, GaussianSpec, ToyArch, ToyDataset, TrainConfig,
};
use mixdiff::schedule::ScheduleParams;
use mixdiff::{Dims, RngStream};

fn main() -> mixdiff::Result<()> {
    let dims = Dims::new(1, 1, 1, 1);
    let target = GaussianSpec::standard_normal(dims)?;
    let sched = Arc::new(ScheduleParams::default().build()?);
    let cfg = TrainConfig { steps: 3000, ..TrainConfig::default() };
    let trained = train_toy_denoiser(&ToyDataset::Gaussian(target.clone()), &sched, ToyArch::new(dims, 64, 0), &cfg)?;
    let head: f64 = trained.losses[..100].iter().sum::<f64>() / 100.0;
    let tail: f64 = trained.losses[trained.losses.len() - 100..].iter().sum::<f64>() / 100.0;
    println!("batch loss {head:.4} -> {tail:.4} over {} steps", cfg.steps);

    let oracle = AnalyticDenoiser::new(target.clone(), sched.clone());
    let mse = empirical_denoising_mse(&trained.model, &target, &sched, None, 10_000, &mut RngStream::new(9, 0))?;
    let floor = empirical_denoising_mse(&oracle, &target, &sched, None, 10_000, &mut RngStream::new(9, 0))?;
    println!("held-out MSE {mse:.4}, closed-form floor {floor:.4}");
    Ok(())
}
