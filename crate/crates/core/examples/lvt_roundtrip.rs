//! Writing and reading the `.lvt` tensor format.

use mixdiff::latent::{decode_lvt, encode_lvt, sample_standard_normal};
use mixdiff::{Dims, RngStream};

fn main() -> mixdiff::Result<()> {
    let v = sample_standard_normal(Dims::new(2, 4, 3, 3), &mut RngStream::new(0, 0))?;
    let bytes = encode_lvt(&v);
    let back = decode_lvt(&bytes)?;
    let err = v.data().iter().zip(back.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("{} bytes, header {:?}, dims {}, max f32 rounding {err:.2e}", bytes.len(), &bytes[..4], back.dims());
    Ok(())
}
