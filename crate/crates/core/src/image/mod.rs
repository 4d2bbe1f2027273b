//! Planar integer images, Netpbm I/O and quality metrics.

mod metrics;
mod pnm;

pub use metrics::{bits_per_pixel, mse, psnr, Metrics};
pub use pnm::{decode_pnm, encode_pnm, load_pnm, store_pnm};

use crate::error::{Error, Result};

pub const MIN_BIT_DEPTH: u8 = 8;
pub const MAX_BIT_DEPTH: u8 = 16;

/// Row-major sample planes sharing one size and bit depth.
///
/// Samples are unsigned and bounded by `2^bit_depth - 1`. Only gray (one
/// plane) and three-component images exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    bit_depth: u8,
    planes: Vec<Vec<u16>>,
}

impl PlanarImage {
    pub fn new(width: usize, height: usize, bit_depth: u8, planes: Vec<Vec<u16>>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroArea);
        }
        if !(MIN_BIT_DEPTH..=MAX_BIT_DEPTH).contains(&bit_depth) {
            return Err(Error::InvalidImage(format!(
                "bit depth {bit_depth} outside 8..=16"
            )));
        }
        if planes.len() != 1 && planes.len() != 3 {
            return Err(Error::InvalidImage(format!(
                "{} components, expected 1 or 3",
                planes.len()
            )));
        }
        let max = max_sample(bit_depth);
        for (c, plane) in planes.iter().enumerate() {
            if plane.len() != width * height {
                return Err(Error::InvalidImage(format!(
                    "plane {c} has {} samples, expected {}",
                    plane.len(),
                    width * height
                )));
            }
            if let Some(&s) = plane.iter().find(|&&s| s > max) {
                return Err(Error::SampleExceedsMaxval {
                    sample: s.into(),
                    maxval: max.into(),
                });
            }
        }
        Ok(Self {
            width,
            height,
            bit_depth,
            planes,
        })
    }

    /// An image with every sample set to `value`.
    pub fn filled(
        width: usize,
        height: usize,
        components: usize,
        bit_depth: u8,
        value: u16,
    ) -> Result<Self> {
        Self::new(
            width,
            height,
            bit_depth,
            vec![vec![value; width * height]; components],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn components(&self) -> usize {
        self.planes.len()
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn max_value(&self) -> u16 {
        max_sample(self.bit_depth)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn plane(&self, component: usize) -> &[u16] {
        &self.planes[component]
    }

    pub fn planes(&self) -> &[Vec<u16>] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Vec<u16>> {
        self.planes
    }

    /// Same width, height, component count and bit depth.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.components() == other.components()
            && self.bit_depth == other.bit_depth
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{}x{}x{} @{} bits vs {}x{}x{} @{} bits",
                self.width,
                self.height,
                self.components(),
                self.bit_depth,
                other.width,
                other.height,
                other.components(),
                other.bit_depth
            )))
        }
    }
}

pub(crate) fn max_sample(bit_depth: u8) -> u16 {
    ((1u32 << bit_depth) - 1) as u16
}
