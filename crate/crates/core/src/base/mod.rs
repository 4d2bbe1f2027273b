//! Lossy base layer: a low-latency wavelet profile.
//!
//! The image is level-shifted and decomposed with the reversible 5/3
//! lifting transform using up to six horizontal levels but at most two
//! vertical ones, so a decoder only ever needs a few lines of vertical
//! context. Bands are quantized with a dead-zone scalar quantizer and
//! Golomb–Rice coded with one parameter per band, optionally behind group
//! significance flags so that runs of zeros stay cheap. Rate control
//! bisects a global quantizer scale to meet a bits-per-pixel budget.
//!
//! This is a self-contained profile with its own payload format, not an
//! ISO/IEC 21122 codestream.

mod bandcode;
mod bands;
mod codec;
mod dwt;
mod quant;
mod rate;

pub use crate::rice::{choose_rice_k, decode_band, encode_band};
pub use bandcode::{
    choose_band_coding, read_band, write_band, BandCoding, BandMode, GROUPS_PER_SET, GROUP_LEN,
};
pub use bands::{band_layout, decompose, recompose, Band, BandInfo, Orientation};
pub use codec::{
    decode_base, encode_base, BandParams, BaseBitstream, BaseConfig, BaseHeader, BaseTarget,
    BASE_MAGIC, MAX_LEVELS_H, MAX_LEVELS_V,
};
pub use dwt::{dwt_forward_53, dwt_inverse_53};
pub use quant::{dequantize_deadzone, quantize_deadzone};
pub use rate::{
    band_gain, rate_control, step_for_scale, RateDecision, MAX_PROBES, MAX_SCALE, MIN_SCALE,
};
