//! Cross-frame correlated step noise and the γ scale.

use mixdiff::sampler::sample_correlated_noise;
use mixdiff::{Dims, RngStream};

fn main() -> mixdiff::Result<()> {
    let dims = Dims::new(2, 1, 1, 1);
    let mut rng = RngStream::new(7, 0);
    for r in [0.0, 0.5, 0.9] {
        let n = 20_000;
        let mut prod = 0.0;
        for _ in 0..n {
            let z = sample_correlated_noise(dims, r, &mut rng)?;
            prod += z.data()[0] * z.data()[1];
        }
        println!("r = {r}: empirical frame correlation {:.3}", prod / n as f64);
    }
    Ok(())
}
