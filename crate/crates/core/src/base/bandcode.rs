//! Band entropy coding on top of the Rice primitive.
//!
//! A band is coded in one of two modes, whichever is shorter:
//!
//! * plain: every index Rice coded with the band parameter;
//! * significance: indices are taken in raster order in groups of 4, and
//!   groups in sets of 8. Each set starts with one flag bit; a set with any
//!   nonzero index then carries one flag per group, and each flagged group
//!   carries its 4 Rice-coded indices. Runs of zero coefficients therefore
//!   cost 1/32 bit each instead of one bit.

use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::rice::{band_lengths, decode_band, encode_band, MAX_RICE_K};

pub const GROUP_LEN: usize = 4;
pub const GROUPS_PER_SET: usize = 8;
const SET_LEN: usize = GROUP_LEN * GROUPS_PER_SET;

/// Set in the serialized Rice-parameter byte for significance mode.
pub const SIGNIFICANCE_FLAG: u8 = 0x80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandMode {
    Plain,
    Significance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandCoding {
    pub mode: BandMode,
    pub k: u32,
    pub bits: u64,
}

impl BandCoding {
    pub fn param_byte(&self) -> u8 {
        let flag = if self.mode == BandMode::Significance {
            SIGNIFICANCE_FLAG
        } else {
            0
        };
        self.k as u8 | flag
    }

    pub fn parse_param_byte(byte: u8) -> Result<(BandMode, u32)> {
        let k = u32::from(byte & !SIGNIFICANCE_FLAG);
        if k > MAX_RICE_K {
            return Err(Error::CorruptHeader(format!("rice parameter {k}")));
        }
        let mode = if byte & SIGNIFICANCE_FLAG != 0 {
            BandMode::Significance
        } else {
            BandMode::Plain
        };
        Ok((mode, k))
    }
}

/// Indices of nonzero groups, concatenated, plus the number of flag bits.
fn significant_part(indices: &[i32]) -> (Vec<i32>, u64) {
    let mut kept = Vec::new();
    let mut flags = 0u64;
    for set in indices.chunks(SET_LEN) {
        flags += 1;
        if set.iter().all(|&v| v == 0) {
            continue;
        }
        for group in set.chunks(GROUP_LEN) {
            flags += 1;
            if group.iter().any(|&v| v != 0) {
                kept.extend_from_slice(group);
            }
        }
    }
    (kept, flags)
}

/// The shortest mode and Rice parameter. Ties prefer plain mode, then the
/// smallest k.
pub fn choose_band_coding(indices: &[i32]) -> BandCoding {
    let plain = band_lengths(indices);
    let (kept, flags) = significant_part(indices);
    let sig = band_lengths(&kept);
    let mut best = BandCoding {
        mode: BandMode::Plain,
        k: 0,
        bits: plain[0],
    };
    for (k, &bits) in plain.iter().enumerate() {
        if bits < best.bits {
            best = BandCoding {
                mode: BandMode::Plain,
                k: k as u32,
                bits,
            };
        }
    }
    for (k, &bits) in sig.iter().enumerate() {
        if bits + flags < best.bits {
            best = BandCoding {
                mode: BandMode::Significance,
                k: k as u32,
                bits: bits + flags,
            };
        }
    }
    best
}

pub fn write_band(indices: &[i32], mode: BandMode, k: u32, w: &mut BitWriter) {
    match mode {
        BandMode::Plain => encode_band(indices, k, w),
        BandMode::Significance => {
            for set in indices.chunks(SET_LEN) {
                let set_significant = set.iter().any(|&v| v != 0);
                w.write_bit(set_significant);
                if !set_significant {
                    continue;
                }
                for group in set.chunks(GROUP_LEN) {
                    let significant = group.iter().any(|&v| v != 0);
                    w.write_bit(significant);
                    if significant {
                        encode_band(group, k, w);
                    }
                }
            }
        }
    }
}

pub fn read_band(r: &mut BitReader<'_>, count: usize, mode: BandMode, k: u32) -> Result<Vec<i32>> {
    match mode {
        BandMode::Plain => decode_band(r, count, k),
        BandMode::Significance => {
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let set_len = SET_LEN.min(count - out.len());
                if !r.read_bit()? {
                    out.resize(out.len() + set_len, 0);
                    continue;
                }
                let set_end = out.len() + set_len;
                while out.len() < set_end {
                    let group_len = GROUP_LEN.min(set_end - out.len());
                    if r.read_bit()? {
                        out.extend(decode_band(r, group_len, k)?);
                    } else {
                        out.resize(out.len() + group_len, 0);
                    }
                }
            }
            Ok(out)
        }
    }
}
