//! Base-layer payload.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! "XSB1" | width u32 | height u32 | components u8 | bit_depth u8
//!        | levels_h << 4 | levels_v (u8)
//!        | per component, per band: step u16 | mode/k u8 | coded bits u32
//!        | per component, per band: coded indices, zero-padded to a byte
//! ```
//!
//! The mode/k byte holds the Rice parameter in its low bits and sets
//! [`SIGNIFICANCE_FLAG`] when the band uses group significance coding.
//!
//! ```text
//! ```
//!
//! Band geometry is implied by the dimensions and level counts, so the
//! payload decodes with no side information.

use rayon::prelude::*;

use super::bandcode::{
    choose_band_coding, read_band, write_band, BandCoding, BandMode, GROUPS_PER_SET, GROUP_LEN,
    SIGNIFICANCE_FLAG,
};
use super::bands::{band_layout, decompose, recompose, Band, BandInfo};
use super::quant::{dequantize_deadzone, quantize_deadzone};
use super::rate::decide;
use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::image::{PlanarImage, MAX_BIT_DEPTH, MIN_BIT_DEPTH};

pub const BASE_MAGIC: [u8; 4] = *b"XSB1";
pub const MAX_LEVELS_H: u8 = 6;
pub const MAX_LEVELS_V: u8 = 2;

const FIXED_HEADER_LEN: usize = 15;
const BAND_ENTRY_LEN: usize = 7;

pub(crate) fn header_len(components: usize, bands_per_component: usize) -> usize {
    FIXED_HEADER_LEN + components * bands_per_component * BAND_ENTRY_LEN
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseTarget {
    /// Rate-controlled to this many bits per pixel.
    Bpp(f64),
    /// Quantization step 1 in every band.
    Lossless,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseConfig {
    pub levels_h: u8,
    pub levels_v: u8,
    pub target: BaseTarget,
    pub rate_tolerance: f64,
}

impl Default for BaseConfig {
    fn default() -> Self {
        Self {
            levels_h: 5,
            levels_v: 2,
            target: BaseTarget::Bpp(2.0),
            rate_tolerance: 0.02,
        }
    }
}

impl BaseConfig {
    pub fn with_bpp(bpp: f64) -> Self {
        Self {
            target: BaseTarget::Bpp(bpp),
            ..Self::default()
        }
    }

    pub fn lossless() -> Self {
        Self {
            target: BaseTarget::Lossless,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEVELS_H).contains(&self.levels_h) {
            return Err(Error::InvalidConfig(format!(
                "levels_h {} outside 1..=6",
                self.levels_h
            )));
        }
        if self.levels_v > MAX_LEVELS_V || self.levels_v > self.levels_h {
            return Err(Error::InvalidConfig(format!(
                "levels_v {} must be <= 2 and <= levels_h",
                self.levels_v
            )));
        }
        if let BaseTarget::Bpp(bpp) = self.target {
            if !(bpp.is_finite() && bpp > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "target bpp {bpp} must be positive"
                )));
            }
        }
        if !(self.rate_tolerance.is_finite() && self.rate_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(
                "rate tolerance must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// One entry of the band table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandParams {
    pub info: BandInfo,
    pub step: u16,
    pub mode: BandMode,
    pub k: u8,
    pub bit_len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseHeader {
    pub width: usize,
    pub height: usize,
    pub components: usize,
    pub bit_depth: u8,
    pub levels_h: u8,
    pub levels_v: u8,
    /// Per component, canonical band order.
    pub bands: Vec<Vec<BandParams>>,
}

fn take<'a>(data: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let slice = data.get(*pos..*pos + n).ok_or(Error::TruncatedBitstream)?;
    *pos += n;
    Ok(slice)
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

impl BaseHeader {
    pub fn len(&self) -> usize {
        header_len(self.components, self.bands.first().map_or(0, Vec::len))
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Size of the whole payload this header describes.
    pub fn payload_len(&self) -> usize {
        self.len()
            + self
                .bands
                .iter()
                .flatten()
                .map(|b| (b.bit_len as usize).div_ceil(8))
                .sum::<usize>()
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&BASE_MAGIC);
        out.extend_from_slice(&(self.width as u32).to_be_bytes());
        out.extend_from_slice(&(self.height as u32).to_be_bytes());
        out.push(self.components as u8);
        out.push(self.bit_depth);
        out.push((self.levels_h << 4) | self.levels_v);
        for band in self.bands.iter().flatten() {
            out.extend_from_slice(&band.step.to_be_bytes());
            let flag = if band.mode == BandMode::Significance {
                SIGNIFICANCE_FLAG
            } else {
                0
            };
            out.push(band.k | flag);
            out.extend_from_slice(&band.bit_len.to_be_bytes());
        }
    }

    /// Parses and validates the header, including that the payload length
    /// matches the band table exactly.
    pub fn parse(payload: &[u8]) -> Result<Self> {
        let mut pos = 0;
        if take(payload, &mut pos, 4)? != BASE_MAGIC {
            return Err(Error::CorruptHeader("bad base magic".into()));
        }
        let width = be_u32(take(payload, &mut pos, 4)?) as usize;
        let height = be_u32(take(payload, &mut pos, 4)?) as usize;
        let fixed = take(payload, &mut pos, 3)?;
        let (components, bit_depth, levels) = (fixed[0] as usize, fixed[1], fixed[2]);
        let (levels_h, levels_v) = (levels >> 4, levels & 0x0F);

        if width == 0 || height == 0 {
            return Err(Error::CorruptHeader("zero dimension".into()));
        }
        if components != 1 && components != 3 {
            return Err(Error::CorruptHeader(format!("{components} components")));
        }
        if !(MIN_BIT_DEPTH..=MAX_BIT_DEPTH).contains(&bit_depth) {
            return Err(Error::CorruptHeader(format!("bit depth {bit_depth}")));
        }
        if !(1..=MAX_LEVELS_H).contains(&levels_h) || levels_v > MAX_LEVELS_V || levels_v > levels_h
        {
            return Err(Error::CorruptHeader(format!(
                "levels {levels_h}/{levels_v}"
            )));
        }

        let layout = band_layout(width, height, levels_h, levels_v)?;
        let mut bands = Vec::with_capacity(components);
        for _ in 0..components {
            let mut plane = Vec::with_capacity(layout.len());
            for info in &layout {
                let entry = take(payload, &mut pos, BAND_ENTRY_LEN)?;
                let step = u16::from_be_bytes([entry[0], entry[1]]);
                let (mode, k) = BandCoding::parse_param_byte(entry[2])?;
                let bit_len = be_u32(&entry[3..7]);
                if step == 0 {
                    return Err(Error::CorruptHeader("zero quantization step".into()));
                }
                // Plain coding spends at least one bit per index, significance
                // coding at least one bit per set.
                let min_bits = match mode {
                    BandMode::Plain => info.len(),
                    BandMode::Significance => info.len().div_ceil(GROUP_LEN * GROUPS_PER_SET),
                };
                if (bit_len as usize) < min_bits {
                    return Err(Error::CorruptHeader(format!(
                        "band {}{} declares {bit_len} bits for {} samples",
                        info.orientation.name(),
                        info.level,
                        info.len()
                    )));
                }
                plane.push(BandParams {
                    info: *info,
                    step,
                    mode,
                    k: k as u8,
                    bit_len,
                });
            }
            bands.push(plane);
        }
        let header = Self {
            width,
            height,
            components,
            bit_depth,
            levels_h,
            levels_v,
            bands,
        };
        let expected = header.payload_len();
        if payload.len() < expected {
            return Err(Error::TruncatedBitstream);
        }
        if payload.len() > expected {
            return Err(Error::CorruptPayload(format!(
                "{} trailing bytes",
                payload.len() - expected
            )));
        }
        Ok(header)
    }
}

/// An encoded base layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseBitstream {
    bytes: Vec<u8>,
    header: BaseHeader,
    scale: Option<u32>,
    overshoot: bool,
}

impl BaseBitstream {
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn header(&self) -> &BaseHeader {
        &self.header
    }

    /// Quantizer scale chosen by rate control; `None` for a lossless base.
    pub fn scale(&self) -> Option<u32> {
        self.scale
    }

    /// Even the coarsest scale exceeded the rate budget.
    pub fn overshoot(&self) -> bool {
        self.overshoot
    }

    pub fn bpp(&self) -> f64 {
        8.0 * self.bytes.len() as f64 / (self.header.width * self.header.height) as f64
    }
}

/// Level-shifted and decomposed planes, one band list per component.
pub(crate) fn analyze(image: &PlanarImage, levels_h: u8, levels_v: u8) -> Result<Vec<Vec<Band>>> {
    let offset = 1i32 << (image.bit_depth() - 1);
    image
        .planes()
        .par_iter()
        .map(|plane| {
            let shifted: Vec<i32> = plane.iter().map(|&s| i32::from(s) - offset).collect();
            decompose(&shifted, image.width(), image.height(), levels_h, levels_v)
        })
        .collect()
}

pub fn encode_base(image: &PlanarImage, config: &BaseConfig) -> Result<BaseBitstream> {
    config.validate()?;
    let bands = analyze(image, config.levels_h, config.levels_v)?;

    let (steps, scale, overshoot) = match config.target {
        BaseTarget::Lossless => (
            bands.iter().map(|plane| vec![1u16; plane.len()]).collect(),
            None,
            false,
        ),
        BaseTarget::Bpp(bpp) => {
            let decision = decide(
                &bands,
                config.levels_v,
                image.pixel_count(),
                bpp,
                config.rate_tolerance,
            );
            (decision.steps, Some(decision.scale), decision.overshoot)
        }
    };

    let coded: Vec<Vec<(BandParams, Vec<u8>)>> = bands
        .par_iter()
        .zip(&steps)
        .map(|(plane, plane_steps)| {
            plane
                .par_iter()
                .zip(plane_steps)
                .map(|(band, &step)| encode_one_band(band, step))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let header = BaseHeader {
        width: image.width(),
        height: image.height(),
        components: image.components(),
        bit_depth: image.bit_depth(),
        levels_h: config.levels_h,
        levels_v: config.levels_v,
        bands: coded
            .iter()
            .map(|plane| plane.iter().map(|(p, _)| *p).collect())
            .collect(),
    };
    let mut bytes = Vec::with_capacity(header.payload_len());
    header.write(&mut bytes);
    for (_, data) in coded.iter().flatten() {
        bytes.extend_from_slice(data);
    }
    debug_assert_eq!(bytes.len(), header.payload_len());
    Ok(BaseBitstream {
        bytes,
        header,
        scale,
        overshoot,
    })
}

fn encode_one_band(band: &Band, step: u16) -> Result<(BandParams, Vec<u8>)> {
    let indices: Vec<i32> = band
        .coeffs
        .iter()
        .map(|&c| quantize_deadzone(c, step.into()))
        .collect();
    let coding = choose_band_coding(&indices);
    let bit_len = u32::try_from(coding.bits)
        .map_err(|_| Error::InvalidImage("band too large to code".into()))?;
    let mut w = BitWriter::new();
    write_band(&indices, coding.mode, coding.k, &mut w);
    debug_assert_eq!(w.bit_len(), coding.bits);
    Ok((
        BandParams {
            info: band.info,
            step,
            mode: coding.mode,
            k: coding.k as u8,
            bit_len,
        },
        w.finish(),
    ))
}

pub fn decode_base(payload: &[u8]) -> Result<PlanarImage> {
    let header = BaseHeader::parse(payload)?;

    // Byte offset of every band's data, in serialization order.
    let mut offset = header.len();
    let mut spans = Vec::with_capacity(header.components);
    for plane in &header.bands {
        let mut plane_spans = Vec::with_capacity(plane.len());
        for params in plane {
            let len = (params.bit_len as usize).div_ceil(8);
            plane_spans.push((*params, &payload[offset..offset + len]));
            offset += len;
        }
        spans.push(plane_spans);
    }

    let offset = 1i32 << (header.bit_depth - 1);
    let max = (1i32 << header.bit_depth) - 1;
    let planes = spans
        .par_iter()
        .map(|plane_spans| {
            let bands = plane_spans
                .par_iter()
                .map(|(params, data)| decode_one_band(params, data))
                .collect::<Result<Vec<_>>>()?;
            let plane = recompose(
                &bands,
                header.width,
                header.height,
                header.levels_h,
                header.levels_v,
            )?;
            Ok(plane
                .into_iter()
                .map(|c| (i64::from(c) + i64::from(offset)).clamp(0, i64::from(max)) as u16)
                .collect())
        })
        .collect::<Result<Vec<Vec<u16>>>>()?;
    PlanarImage::new(header.width, header.height, header.bit_depth, planes)
}

fn decode_one_band(params: &BandParams, data: &[u8]) -> Result<Band> {
    let mut r = BitReader::with_bit_limit(data, params.bit_len.into())?;
    let indices = read_band(&mut r, params.info.len(), params.mode, params.k.into())?;
    if r.remaining() != 0 {
        return Err(Error::CorruptPayload(format!(
            "band {}{} has {} unused bits",
            params.info.orientation.name(),
            params.info.level,
            r.remaining()
        )));
    }
    let step = u32::from(params.step);
    Ok(Band {
        info: params.info,
        coeffs: indices
            .into_iter()
            .map(|i| dequantize_deadzone(i, step))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rate::{rate_control, step_for_scale, MAX_PROBES};
    use crate::image::psnr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(w: usize, h: usize, depth: u8, seed: u64) -> PlanarImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max = (1u32 << depth) - 1;
        let plane = (0..w * h).map(|_| rng.gen_range(0..=max) as u16).collect();
        PlanarImage::new(w, h, depth, vec![plane]).unwrap()
    }

    fn smooth(w: usize, h: usize) -> PlanarImage {
        let plane = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                (128.0 + 60.0 * (x / 9.0).sin() * (y / 13.0).cos() + 0.3 * x) as u16
            })
            .collect();
        PlanarImage::new(w, h, 8, vec![plane]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(BaseConfig::default().validate().is_ok());
        let bad = |f: fn(&mut BaseConfig)| {
            let mut c = BaseConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.levels_h = 0));
        assert!(bad(|c| c.levels_h = 7));
        assert!(bad(|c| c.levels_v = 3));
        assert!(bad(|c| {
            c.levels_h = 1;
            c.levels_v = 2
        }));
        assert!(bad(|c| c.target = BaseTarget::Bpp(0.0)));
        assert!(bad(|c| c.target = BaseTarget::Bpp(f64::NAN)));
        assert!(bad(|c| c.rate_tolerance = -0.1));
    }

    #[test]
    fn lossless_base_is_exact() {
        for (img, name) in [(noise(37, 23, 10, 1), "noise"), (smooth(64, 40), "smooth")] {
            let stream = encode_base(&img, &BaseConfig::lossless()).unwrap();
            assert!(stream.header().bands.iter().flatten().all(|b| b.step == 1));
            assert_eq!(decode_base(stream.bytes()).unwrap(), img, "{name}");
        }
        let rgb = PlanarImage::new(
            5,
            3,
            16,
            vec![
                vec![65535; 15],
                (0..15).collect(),
                (0..15).map(|i| i * 4000).collect(),
            ],
        )
        .unwrap();
        let stream = encode_base(&rgb, &BaseConfig::lossless()).unwrap();
        assert_eq!(decode_base(stream.bytes()).unwrap(), rgb);
    }

    #[test]
    fn deterministic_payload() {
        let img = smooth(96, 64);
        let cfg = BaseConfig::with_bpp(1.5);
        assert_eq!(
            encode_base(&img, &cfg).unwrap().bytes(),
            encode_base(&img, &cfg).unwrap().bytes()
        );
    }

    #[test]
    fn header_describes_payload() {
        let img = smooth(50, 30);
        let stream = encode_base(&img, &BaseConfig::with_bpp(2.0)).unwrap();
        let parsed = BaseHeader::parse(stream.bytes()).unwrap();
        assert_eq!(&parsed, stream.header());
        assert_eq!(parsed.payload_len(), stream.bytes().len());
        assert_eq!(parsed.bands[0].len(), 10);
    }

    #[test]
    fn generous_budget_hits_finest_scale() {
        let img = smooth(32, 32);
        let cfg = BaseConfig::with_bpp(16.0);
        let decision = rate_control(&img, &cfg).unwrap();
        assert_eq!(decision.scale, 1);
        assert_eq!(decision.probes, 1);
        let layout = band_layout(32, 32, 5, 2).unwrap();
        let finest: Vec<u16> = layout.iter().map(|b| step_for_scale(b, 2, 1)).collect();
        assert_eq!(decision.steps, vec![finest]);
    }

    #[test]
    fn rate_is_met_on_noise() {
        let img = noise(256, 256, 8, 5);
        let stream = encode_base(&img, &BaseConfig::with_bpp(1.0)).unwrap();
        assert!(!stream.overshoot());
        assert!(stream.bpp() <= 1.02, "{}", stream.bpp());
        let decision = rate_control(&img, &BaseConfig::with_bpp(1.0)).unwrap();
        assert!(decision.probes <= MAX_PROBES);
        assert_eq!(decision.coded_bytes, stream.bytes().len());
    }

    #[test]
    fn impossible_budget_reports_overshoot() {
        let img = noise(16, 16, 8, 9);
        let stream = encode_base(&img, &BaseConfig::with_bpp(0.01)).unwrap();
        assert!(stream.overshoot());
        assert_eq!(stream.scale(), Some(crate::base::rate::MAX_SCALE));
        assert!(decode_base(stream.bytes()).is_ok());
    }

    #[test]
    fn psnr_grows_with_rate() {
        let img = smooth(128, 128);
        let mut last = 0.0;
        for bpp in [0.5, 1.0, 2.0, 4.0] {
            let decoded = decode_base(
                encode_base(&img, &BaseConfig::with_bpp(bpp))
                    .unwrap()
                    .bytes(),
            )
            .unwrap();
            let p = psnr(&img, &decoded).unwrap();
            assert!(p >= last, "{bpp}: {p} < {last}");
            last = p;
        }
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let img = smooth(40, 24);
        let bytes = encode_base(&img, &BaseConfig::with_bpp(2.0))
            .unwrap()
            .into_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'Y';
        assert!(matches!(decode_base(&bad), Err(Error::CorruptHeader(_))));
        assert!(matches!(
            decode_base(&bytes[..bytes.len() - 1]),
            Err(Error::TruncatedBitstream)
        ));
        assert!(matches!(
            decode_base(&bytes[..10]),
            Err(Error::TruncatedBitstream)
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_base(&long), Err(Error::CorruptPayload(_))));
        let mut bad = bytes.clone();
        bad[12] = 5; // components
        assert!(matches!(decode_base(&bad), Err(Error::CorruptHeader(_))));
        let mut bad = bytes;
        bad[14] = 0x72; // levels_h 7
        assert!(matches!(decode_base(&bad), Err(Error::CorruptHeader(_))));
    }

    #[test]
    fn byte_flips_never_panic() {
        let img = smooth(48, 20);
        let bytes = encode_base(&img, &BaseConfig::with_bpp(3.0))
            .unwrap()
            .into_bytes();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let mut mutated = bytes.clone();
            let i = rng.gen_range(0..mutated.len());
            mutated[i] ^= 1 << rng.gen_range(0..8);
            if let Ok(out) = decode_base(&mutated) {
                assert_eq!(out.width() * out.height(), 48 * 20);
            }
        }
    }
}
