//! Rank-4 latent tensors and the video ↔ frame-batch bridge.
//!
//! Storage is row-major `(f, c, h, w)`. A [`FrameBatch`] uses the same buffer
//! read as `(b, c, h, w)` with `b = f`, so converting between the two moves
//! the buffer without touching a single value.

mod lvt;

pub use lvt::{decode_lvt, encode_lvt, read_lvt, write_lvt};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// `F×C×H×W` extents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 4]", from = "[usize; 4]")]
pub struct Dims {
    pub frames: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl From<Dims> for [usize; 4] {
    fn from(d: Dims) -> Self {
        [d.frames, d.channels, d.height, d.width]
    }
}

impl From<[usize; 4]> for Dims {
    fn from([f, c, h, w]: [usize; 4]) -> Self {
        Dims::new(f, c, h, w)
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{}x{}x{}",
            self.frames, self.channels, self.height, self.width
        )
    }
}

impl Dims {
    pub const fn new(frames: usize, channels: usize, height: usize, width: usize) -> Self {
        Self {
            frames,
            channels,
            height,
            width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.channels == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::InvalidShape(format!("zero extent in {self}")));
        }
        Ok(())
    }

    pub const fn len(&self) -> usize {
        self.frames * self.channels * self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values per frame, `C·H·W`.
    pub const fn frame_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    /// Spatial positions per channel, `H·W`.
    pub const fn plane_len(&self) -> usize {
        self.height * self.width
    }

    /// The same layout with a single frame.
    pub const fn single_frame(&self) -> Dims {
        Dims::new(1, self.channels, self.height, self.width)
    }

    #[inline]
    pub const fn index(&self, f: usize, c: usize, h: usize, w: usize) -> usize {
        ((f * self.channels + c) * self.height + h) * self.width + w
    }
}

/// A (noisy) latent video sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentVideo {
    dims: Dims,
    data: Vec<f64>,
}

impl LatentVideo {
    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(Error::InvalidShape(format!(
                "{} values for dims {dims} (expected {})",
                data.len(),
                dims.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: Dims, value: f64) -> Result<Self> {
        dims.validate()?;
        Ok(Self {
            dims,
            data: vec![value; dims.len()],
        })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::filled(dims, 0.0)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, f: usize, c: usize, h: usize, w: usize) -> f64 {
        self.data[self.dims.index(f, c, h, w)]
    }

    #[inline]
    pub fn set(&mut self, f: usize, c: usize, h: usize, w: usize, v: f64) {
        let i = self.dims.index(f, c, h, w);
        self.data[i] = v;
    }

    /// Contiguous `C·H·W` slice of frame `f`.
    pub fn frame(&self, f: usize) -> &[f64] {
        let n = self.dims.frame_len();
        &self.data[f * n..(f + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_dims(&self, other: &LatentVideo) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::InvalidShape(format!(
                "dims {} do not match {}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// Elementwise `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &LatentVideo, b: f64) -> Result<LatentVideo> {
        self.ensure_same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            dims: self.dims,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> LatentVideo {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// A batch of independent frames, one per time step of a [`LatentVideo`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBatch {
    item: Dims,
    count: usize,
    data: Vec<f64>,
}

impl FrameBatch {
    pub fn count(&self) -> usize {
        self.count
    }

    /// Dims of a single item, always with `frames == 1`.
    pub fn item_dims(&self) -> Dims {
        self.item
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn item_slice(&self, b: usize) -> &[f64] {
        let n = self.item.len();
        &self.data[b * n..(b + 1) * n]
    }

    /// Item `b` as a single-frame video.
    pub fn item(&self, b: usize) -> LatentVideo {
        LatentVideo {
            dims: self.item,
            data: self.item_slice(b).to_vec(),
        }
    }

    /// Stacks single-frame videos into a batch.
    pub fn from_items(items: Vec<LatentVideo>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidShape("empty frame batch".into()))?
            .dims;
        if first.frames != 1 {
            return Err(Error::InvalidShape(format!(
                "frame batch items must have one frame, got {first}"
            )));
        }
        let count = items.len();
        let mut data = Vec::with_capacity(count * first.len());
        for it in items {
            if it.dims != first {
                return Err(Error::InvalidShape(format!(
                    "frame batch item {} differs from {first}",
                    it.dims
                )));
            }
            data.extend_from_slice(&it.data);
        }
        Ok(Self {
            item: first,
            count,
            data,
        })
    }
}

/// Merges the time axis into the batch axis. Frame `b` of the output is time
/// slice `f = b` of the input.
pub fn video_to_frames(v: LatentVideo) -> FrameBatch {
    FrameBatch {
        item: v.dims.single_frame(),
        count: v.dims.frames,
        data: v.data,
    }
}

/// Exact inverse of [`video_to_frames`].
pub fn frames_to_video(b: FrameBatch) -> LatentVideo {
    LatentVideo {
        dims: Dims::new(b.count, b.item.channels, b.item.height, b.item.width),
        data: b.data,
    }
}

/// Draws an i.i.d. standard-normal tensor. Consumes `2·ceil(len/2)` words
/// from `rng`.
pub fn sample_standard_normal(dims: Dims, rng: &mut RngStream) -> Result<LatentVideo> {
    dims.validate()?;
    let mut data = vec![0.0; dims.len()];
    rng.fill_standard_normal(&mut data);
    Ok(LatentVideo { dims, data })
}
