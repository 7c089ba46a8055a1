//! Closed-form W2 between Gaussians and a metric report over samples.

use mixdiff::denoisers::{Covariance, GaussianSpec};
use mixdiff::eval::{evaluate, gaussian_w2, MetricKind};
use mixdiff::{Dims, RngStream};
use nalgebra::DMatrix;

fn main() -> mixdiff::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let b = DMatrix::identity(2, 2);
    println!("W2 = {:.6}", gaussian_w2(&[1.0, 0.0], &a, &[0.0, 0.0], &b)?);

    let dims = Dims::new(3, 1, 2, 2);
    let target = GaussianSpec::new(dims, vec![], Covariance::Ar1Temporal { rho: 0.5, frame_variance: 1.0 })?;
    let mut rng = RngStream::new(4, 0);
    let samples: Vec<_> = (0..2000).map(|_| target.sample(&mut rng)).collect();
    let kinds = ["autocorr:1", "flicker", "w2", "w2-full"].map(|k| k.parse::<MetricKind>().unwrap());
    let report = evaluate(&samples, Some(&target), &kinds)?;
    print!("{}", report.to_csv());
    Ok(())
}
