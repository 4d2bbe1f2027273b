//! Binary PGM (P5) and PPM (P6).
//!
//! Samples wider than a byte are big-endian. The maxval must be `2^N - 1`
//! for some `8 <= N <= 16`; images whose samples live in the low bits of a
//! wider word (zero-padded MSBs) therefore load at their true depth, and a
//! sample above maxval is rejected instead of masked.

use std::fs;
use std::path::Path;

use super::{PlanarImage, MAX_BIT_DEPTH, MIN_BIT_DEPTH};
use crate::error::{Error, Result};

pub fn load_pnm(path: impl AsRef<Path>) -> Result<PlanarImage> {
    decode_pnm(&fs::read(path)?)
}

pub fn store_pnm(image: &PlanarImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pnm(image))?;
    Ok(())
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::PnmHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::PnmHeader(format!("{what} out of range")))
    }
}

pub fn decode_pnm(data: &[u8]) -> Result<PlanarImage> {
    let components = match data.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::PnmHeader("expected P5 or P6 magic".into())),
    };
    let mut cur = HeaderCursor { data, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    match data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::PnmHeader("missing whitespace after maxval".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::PnmHeader("zero image dimension".into()));
    }
    let bits = 32 - maxval.leading_zeros();
    if maxval == 0
        || maxval.count_ones() != bits
        || !(u32::from(MIN_BIT_DEPTH)..=u32::from(MAX_BIT_DEPTH)).contains(&bits)
    {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let bytes_per_sample = if maxval > 255 { 2 } else { 1 };

    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(components))
        .ok_or_else(|| Error::PnmHeader("dimensions overflow".into()))?;
    let expected = count * bytes_per_sample;
    let payload = &data[cur.pos..];
    if payload.len() < expected {
        return Err(Error::PnmTruncated {
            expected,
            found: payload.len(),
        });
    }

    let mut planes = vec![Vec::with_capacity(width * height); components];
    for (i, chunk) in payload[..expected]
        .chunks_exact(bytes_per_sample)
        .enumerate()
    {
        let sample = match chunk {
            [hi, lo] => u16::from_be_bytes([*hi, *lo]),
            [b] => u16::from(*b),
            _ => unreachable!(),
        };
        if u32::from(sample) > maxval {
            return Err(Error::SampleExceedsMaxval {
                sample: sample.into(),
                maxval,
            });
        }
        planes[i % components].push(sample);
    }
    PlanarImage::new(width, height, bits as u8, planes)
}

pub fn encode_pnm(image: &PlanarImage) -> Vec<u8> {
    let magic = if image.components() == 1 { "P5" } else { "P6" };
    let header = format!(
        "{magic}\n{} {}\n{}\n",
        image.width(),
        image.height(),
        image.max_value()
    );
    let wide = image.bit_depth() > 8;
    let mut out = Vec::with_capacity(
        header.len() + image.pixel_count() * image.components() * (1 + wide as usize),
    );
    out.extend_from_slice(header.as_bytes());
    for i in 0..image.pixel_count() {
        for plane in image.planes() {
            let s = plane[i];
            if wide {
                out.extend_from_slice(&s.to_be_bytes());
            } else {
                out.push(s as u8);
            }
        }
    }
    out
}
