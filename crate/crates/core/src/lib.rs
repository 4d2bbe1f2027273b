//! Two-layer lossless image coding.
//!
//! A lossy, low-latency wavelet base layer ([`base`]) is followed by an
//! extension layer ([`residual`]) carrying the difference between the
//! original and the decoded base image, offset to be non-negative and
//! coded losslessly. Both layers live in one [`container`] whose base
//! substream decodes on its own. [`pipeline`] ties the pieces together and
//! drives rate sweeps.

pub mod base;
pub mod bitio;
pub mod container;
pub mod corpus;
pub mod error;
pub mod image;
pub mod pipeline;
pub mod residual;
pub mod rice;

pub use error::{Error, Result};
pub use image::PlanarImage;
