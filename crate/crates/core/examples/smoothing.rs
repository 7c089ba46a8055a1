//! Freezing static background with the deviation-threshold smoother.

use mixdiff::eval::flicker_metric;
use mixdiff::smoothing::{temporal_smooth_with_mask, SmoothingConfig};
use mixdiff::{Dims, LatentVideo, RngStream};

fn main() -> mixdiff::Result<()> {
    let dims = Dims::new(4, 1, 8, 8);
    let mut rng = RngStream::new(1, 0);
    let mut x = LatentVideo::zeros(dims)?;
    for v in x.data_mut() {
        *v = 0.02 * rng.standard_normal();
    }
    let mut background = vec![true; dims.frame_len()];
    for f in 0..4 {
        for h in 3..5 {
            for w in 2 * f..2 * f + 2 {
                x.set(f, 0, h, w, 10.0);
                background[h * 8 + w] = false;
            }
        }
    }
    for threshold in [0.0, 0.5, 2.0] {
        let (y, mask) = temporal_smooth_with_mask(&x, &SmoothingConfig { threshold, ..Default::default() });
        let replaced = mask.iter().filter(|m| **m).count();
        println!(
            "threshold {threshold}: {replaced}/{} sites replaced, background flicker {:.4} -> {:.4}",
            mask.len(),
            flicker_metric(&x, Some(&background))?,
            flicker_metric(&y, Some(&background))?
        );
    }
    Ok(())
}
