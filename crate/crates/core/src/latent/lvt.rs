//! `.lvt` raw tensor files: `"LVT1"`, u32 LE rank (4), four u32 LE extents
//! `(F, C, H, W)`, then `F·C·H·W` f32 LE values in row-major order.

use std::fs;
use std::path::Path;

use super::{Dims, LatentVideo};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LVT1";
const HEADER_LEN: usize = 4 + 4 + 16;

pub fn encode_lvt(v: &LatentVideo) -> Vec<u8> {
    let d = v.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * d.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&4u32.to_le_bytes());
    for extent in [d.frames, d.channels, d.height, d.width] {
        out.extend_from_slice(&(extent as u32).to_le_bytes());
    }
    for &x in v.data() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    out
}

pub fn decode_lvt(bytes: &[u8]) -> Result<LatentVideo> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "lvt header truncated ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad lvt magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let rank = word(4);
    if rank != 4 {
        return Err(Error::Format(format!("lvt rank {rank}, expected 4")));
    }
    let dims = Dims::new(word(8), word(12), word(16), word(20));
    dims.validate()
        .map_err(|e| Error::Format(format!("lvt dims: {e}")))?;
    let expected = HEADER_LEN + 4 * dims.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "lvt payload is {} bytes, expected {expected} for {dims}",
            bytes.len()
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    LatentVideo::from_vec(dims, data)
}

pub fn write_lvt(path: impl AsRef<Path>, v: &LatentVideo) -> Result<()> {
    fs::write(path, encode_lvt(v))?;
    Ok(())
}

pub fn read_lvt(path: impl AsRef<Path>) -> Result<LatentVideo> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    decode_lvt(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let v = LatentVideo::from_vec(Dims::new(2, 1, 1, 1), vec![1.0, -2.5]).unwrap();
        let b = encode_lvt(&v);
        assert_eq!(&b[..4], b"LVT1");
        assert_eq!(&b[4..8], &[4, 0, 0, 0]);
        assert_eq!(&b[8..12], &[2, 0, 0, 0]);
        assert_eq!(b.len(), 24 + 8);
        assert_eq!(&b[24..28], &1.0f32.to_le_bytes());
        assert_eq!(&b[28..32], &(-2.5f32).to_le_bytes());
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let v = LatentVideo::zeros(Dims::new(1, 1, 2, 2)).unwrap();
        let mut b = encode_lvt(&v);
        assert!(decode_lvt(&b[..b.len() - 1]).is_err());
        b[0] = b'X';
        assert!(decode_lvt(&b).is_err());
        assert!(decode_lvt(b"LVT1").is_err());
    }

    proptest! {
        #[test]
        fn f32_values_round_trip(vals in proptest::collection::vec(-1e6f32..1e6, 6)) {
            let v = LatentVideo::from_vec(
                Dims::new(1, 2, 3, 1),
                vals.iter().map(|&x| x as f64).collect(),
            ).unwrap();
            let back = decode_lvt(&encode_lvt(&v)).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
