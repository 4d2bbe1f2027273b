//! Extension layer: residual formation, DC offset and lossless coders.
//!
//! For an `N`-bit original `P` and decoded base image `P'`, the residual
//! `R = P - P'` lies in `[-(2^N - 1), 2^N - 1]`. Adding `2^N - 1` maps it
//! onto `[0, 2^(N+1) - 2]`, an unsigned `N+1`-bit plane that the lossless
//! coders consume.

mod predictive;
mod wavelet;

pub use predictive::{decode_predictive, encode_predictive, med_predict};
pub use wavelet::{decode_wavelet_lossless, encode_wavelet_lossless};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::PlanarImage;

pub const EXTENSION_MAGIC: [u8; 4] = *b"XSE1";

/// A single residual component.
///
/// `depth` is the number of bits the shifted form occupies (`N + 1` for a
/// residual). Unshifted planes hold signed values bounded by
/// `2^(depth-1) - 1` in magnitude; shifted planes hold values in
/// `[0, 2^depth - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualPlane {
    width: usize,
    height: usize,
    depth: u8,
    shifted: bool,
    samples: Vec<i32>,
}

impl ResidualPlane {
    fn validate(
        width: usize,
        height: usize,
        depth: u8,
        shifted: bool,
        samples: &[i32],
    ) -> Result<()> {
        if samples.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for {width}x{height}",
                samples.len()
            )));
        }
        if !(2..=17).contains(&depth) {
            return Err(Error::ResidualRange(format!(
                "depth {depth} outside 2..=17"
            )));
        }
        let (lo, hi) = if shifted {
            (0, (1i32 << depth) - 1)
        } else {
            let m = (1i32 << (depth - 1)) - 1;
            (-m, m)
        };
        if let Some(&s) = samples.iter().find(|&&s| s < lo || s > hi) {
            return Err(Error::ResidualRange(format!(
                "sample {s} outside [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// A signed residual of an `depth - 1`-bit image.
    pub fn unshifted(width: usize, height: usize, depth: u8, samples: Vec<i32>) -> Result<Self> {
        Self::validate(width, height, depth, false, &samples)?;
        Ok(Self {
            width,
            height,
            depth,
            shifted: false,
            samples,
        })
    }

    /// Any non-negative plane that fits in `depth` bits.
    pub fn shifted(width: usize, height: usize, depth: u8, samples: Vec<i32>) -> Result<Self> {
        Self::validate(width, height, depth, true, &samples)?;
        Ok(Self {
            width,
            height,
            depth,
            shifted: true,
            samples,
        })
    }

    /// An image component coded directly, with no base layer underneath.
    pub fn from_image_plane(image: &PlanarImage, component: usize) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            depth: image.bit_depth(),
            shifted: true,
            samples: image
                .plane(component)
                .iter()
                .map(|&s| i32::from(s))
                .collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    pub fn is_shifted(&self) -> bool {
        self.shifted
    }

    pub fn samples(&self) -> &[i32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<i32> {
        self.samples
    }

    pub fn min_max(&self) -> (i32, i32) {
        self.samples
            .iter()
            .fold((i32::MAX, i32::MIN), |(lo, hi), &s| (lo.min(s), hi.max(s)))
    }
}

/// `R = P - P'` per component, at depth `N + 1`.
pub fn compute_residual(
    original: &PlanarImage,
    decoded: &PlanarImage,
) -> Result<Vec<ResidualPlane>> {
    original.check_same_shape(decoded)?;
    let depth = original.bit_depth() + 1;
    Ok(original
        .planes()
        .iter()
        .zip(decoded.planes())
        .map(|(p, q)| ResidualPlane {
            width: original.width(),
            height: original.height(),
            depth,
            shifted: false,
            samples: p
                .iter()
                .zip(q)
                .map(|(&a, &b)| i32::from(a) - i32::from(b))
                .collect(),
        })
        .collect())
}

fn dc_offset(bit_depth: u8) -> i32 {
    (1i32 << bit_depth) - 1
}

fn check_depth(plane: &ResidualPlane, bit_depth: u8) -> Result<()> {
    if plane.depth != bit_depth + 1 {
        return Err(Error::ShapeMismatch(format!(
            "residual depth {} does not match N = {bit_depth}",
            plane.depth
        )));
    }
    Ok(())
}

/// `R' = R + (2^N - 1)`.
pub fn dc_shift(residual: &ResidualPlane, bit_depth: u8) -> Result<ResidualPlane> {
    if residual.shifted {
        return Err(Error::AlreadyShifted);
    }
    check_depth(residual, bit_depth)?;
    let offset = dc_offset(bit_depth);
    let max = 2 * offset;
    let samples = residual
        .samples
        .iter()
        .map(|&r| {
            let s = r + offset;
            if (0..=max).contains(&s) {
                Ok(s)
            } else {
                Err(Error::ResidualRange(format!(
                    "residual {r} does not fit N = {bit_depth}"
                )))
            }
        })
        .collect::<Result<_>>()?;
    Ok(ResidualPlane {
        width: residual.width,
        height: residual.height,
        depth: residual.depth,
        shifted: true,
        samples,
    })
}

/// `R = R' - (2^N - 1)`.
pub fn dc_unshift(shifted: &ResidualPlane, bit_depth: u8) -> Result<ResidualPlane> {
    if !shifted.shifted {
        return Err(Error::NotShifted);
    }
    check_depth(shifted, bit_depth)?;
    let offset = dc_offset(bit_depth);
    let samples = shifted
        .samples
        .iter()
        .map(|&s| {
            if (0..=2 * offset).contains(&s) {
                Ok(s - offset)
            } else {
                Err(Error::ResidualRange(format!(
                    "shifted sample {s} exceeds 2^(N+1) - 2"
                )))
            }
        })
        .collect::<Result<_>>()?;
    Ok(ResidualPlane {
        width: shifted.width,
        height: shifted.height,
        depth: shifted.depth,
        shifted: false,
        samples,
    })
}

/// `P' + R`, rejecting any sample that leaves `[0, 2^N - 1]`.
pub fn add_residual(decoded: &PlanarImage, residuals: &[ResidualPlane]) -> Result<PlanarImage> {
    if residuals.len() != decoded.components() {
        return Err(Error::ShapeMismatch(format!(
            "{} residual planes for {} components",
            residuals.len(),
            decoded.components()
        )));
    }
    let max = i32::from(decoded.max_value());
    let planes = decoded
        .planes()
        .iter()
        .zip(residuals)
        .map(|(plane, r)| {
            if r.shifted || r.width != decoded.width() || r.height != decoded.height() {
                return Err(Error::ShapeMismatch(
                    "residual does not match the base image".into(),
                ));
            }
            plane
                .iter()
                .zip(&r.samples)
                .map(|(&p, &d)| {
                    let s = i32::from(p) + d;
                    if (0..=max).contains(&s) {
                        Ok(s as u16)
                    } else {
                        Err(Error::ResidualRange(format!(
                            "reconstructed sample {s} outside [0, {max}]"
                        )))
                    }
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<u16>>>>()?;
    PlanarImage::new(
        decoded.width(),
        decoded.height(),
        decoded.bit_depth(),
        planes,
    )
}

/// Which lossless coder produced an extension payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LosslessCoderId {
    /// Median-edge-detector prediction with adaptive Rice codes.
    Predictive = 1,
    /// Reversible 5/3 wavelet with per-band Rice codes.
    Wavelet = 2,
}

impl LosslessCoderId {
    pub const ALL: [LosslessCoderId; 2] = [LosslessCoderId::Predictive, LosslessCoderId::Wavelet];

    pub fn from_u8(id: u8) -> Option<Self> {
        match id {
            1 => Some(Self::Predictive),
            2 => Some(Self::Wavelet),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Predictive => "predictive",
            Self::Wavelet => "wavelet",
        }
    }

    pub fn encode(self, plane: &ResidualPlane) -> Result<Vec<u8>> {
        match self {
            Self::Predictive => encode_predictive(plane),
            Self::Wavelet => encode_wavelet_lossless(plane),
        }
    }

    pub fn decode(
        self,
        data: &[u8],
        width: usize,
        height: usize,
        depth: u8,
    ) -> Result<ResidualPlane> {
        match self {
            Self::Predictive => decode_predictive(data, width, height, depth),
            Self::Wavelet => decode_wavelet_lossless(data, width, height, depth),
        }
    }
}

impl fmt::Display for LosslessCoderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LosslessCoderId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predictive" => Ok(Self::Predictive),
            "wavelet" => Ok(Self::Wavelet),
            other => Err(Error::InvalidConfig(format!(
                "unknown lossless coder `{other}`"
            ))),
        }
    }
}

/// Decoded extension layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub coder: LosslessCoderId,
    pub depth: u8,
    pub planes: Vec<ResidualPlane>,
}

/// Serializes shifted planes as
/// `"XSE1" | coder u8 | depth u8 | per component: length u32 | payload`.
pub fn encode_extension(planes: &[ResidualPlane], coder: LosslessCoderId) -> Result<Vec<u8>> {
    let depth = planes
        .first()
        .ok_or_else(|| Error::InvalidImage("no planes to encode".into()))?
        .depth;
    if planes.iter().any(|p| p.depth != depth) {
        return Err(Error::ShapeMismatch("planes differ in depth".into()));
    }
    let payloads = planes
        .par_iter()
        .map(|p| coder.encode(p))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(6 + payloads.iter().map(|p| p.len() + 4).sum::<usize>());
    out.extend_from_slice(&EXTENSION_MAGIC);
    out.push(coder.as_u8());
    out.push(depth);
    for payload in &payloads {
        let len = u32::try_from(payload.len())
            .map_err(|_| Error::InvalidImage("component payload too large".into()))?;
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(payload);
    }
    Ok(out)
}

/// Coder id and depth without decoding any samples.
pub fn extension_info(data: &[u8]) -> Result<(LosslessCoderId, u8)> {
    if data.len() < 6 {
        return Err(Error::TruncatedBitstream);
    }
    if data[..4] != EXTENSION_MAGIC {
        return Err(Error::CorruptHeader("bad extension magic".into()));
    }
    let coder = LosslessCoderId::from_u8(data[4])
        .ok_or_else(|| Error::CorruptHeader(format!("unknown coder id {}", data[4])))?;
    Ok((coder, data[5]))
}

/// Splits the per-component payloads without decoding them.
pub fn split_extension(
    data: &[u8],
    components: usize,
) -> Result<(LosslessCoderId, u8, Vec<&[u8]>)> {
    let (coder, depth) = extension_info(data)?;
    let mut pos = 6;
    let mut parts = Vec::with_capacity(components);
    for _ in 0..components {
        let len = data.get(pos..pos + 4).ok_or(Error::TruncatedBitstream)?;
        let len = u32::from_be_bytes([len[0], len[1], len[2], len[3]]) as usize;
        pos += 4;
        parts.push(data.get(pos..pos + len).ok_or(Error::TruncatedBitstream)?);
        pos += len;
    }
    if pos != data.len() {
        return Err(Error::CorruptPayload(format!(
            "{} trailing extension bytes",
            data.len() - pos
        )));
    }
    Ok((coder, depth, parts))
}

pub fn decode_extension(
    data: &[u8],
    width: usize,
    height: usize,
    components: usize,
) -> Result<Extension> {
    let (coder, depth, parts) = split_extension(data, components)?;
    if !(2..=17).contains(&depth) {
        return Err(Error::CorruptHeader(format!("extension depth {depth}")));
    }
    let planes = parts
        .par_iter()
        .map(|part| coder.decode(part, width, height, depth))
        .collect::<Result<Vec<_>>>()?;
    Ok(Extension {
        coder,
        depth,
        planes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn img(depth: u8, samples: Vec<u16>) -> PlanarImage {
        PlanarImage::new(samples.len(), 1, depth, vec![samples]).unwrap()
    }

    #[test]
    fn identical_images_give_zero_residual() {
        let p = img(8, vec![0, 17, 255, 3]);
        let r = compute_residual(&p, &p).unwrap();
        assert!(r[0].samples().iter().all(|&s| s == 0));
        assert_eq!(r[0].depth(), 9);
    }

    #[test]
    fn residual_extremes() {
        let r = compute_residual(&img(8, vec![255, 0]), &img(8, vec![0, 255])).unwrap();
        assert_eq!(r[0].samples(), &[255, -255]);
        let shifted = dc_shift(&r[0], 8).unwrap();
        assert_eq!(shifted.samples(), &[510, 0]);
        assert!(shifted.is_shifted());
    }

    #[test]
    fn zero_residual_maps_to_offset() {
        let r = ResidualPlane::unshifted(1, 1, 9, vec![0]).unwrap();
        assert_eq!(dc_shift(&r, 8).unwrap().samples(), &[255]);
    }

    #[test]
    fn shift_state_errors() {
        let r = ResidualPlane::unshifted(1, 1, 9, vec![0]).unwrap();
        let s = dc_shift(&r, 8).unwrap();
        assert!(matches!(dc_shift(&s, 8), Err(Error::AlreadyShifted)));
        assert!(matches!(dc_unshift(&r, 8), Err(Error::NotShifted)));
        assert!(dc_shift(&r, 10).is_err());
        assert!(ResidualPlane::unshifted(1, 1, 9, vec![256]).is_err());
        assert!(ResidualPlane::shifted(1, 1, 9, vec![-1]).is_err());
        // 511 fits 9 bits but is not a valid shifted residual of an 8-bit image.
        let odd = ResidualPlane::shifted(1, 1, 9, vec![511]).unwrap();
        assert!(matches!(dc_unshift(&odd, 8), Err(Error::ResidualRange(_))));
    }

    #[test]
    fn add_residual_rejects_overflow() {
        let base = img(8, vec![250]);
        let r = ResidualPlane::unshifted(1, 1, 9, vec![10]).unwrap();
        assert!(matches!(
            add_residual(&base, &[r]),
            Err(Error::ResidualRange(_))
        ));
    }

    #[test]
    fn coder_ids() {
        for id in LosslessCoderId::ALL {
            assert_eq!(LosslessCoderId::from_u8(id.as_u8()), Some(id));
            assert_eq!(id.name().parse::<LosslessCoderId>().unwrap(), id);
        }
        assert!(LosslessCoderId::from_u8(0).is_none());
        assert!("jpeg".parse::<LosslessCoderId>().is_err());
    }

    #[test]
    fn extension_round_trip_and_errors() {
        let planes: Vec<ResidualPlane> = (0..3)
            .map(|c| {
                ResidualPlane::shifted(4, 3, 11, (0..12).map(|i| i * 100 + c).collect()).unwrap()
            })
            .collect();
        for coder in LosslessCoderId::ALL {
            let bytes = encode_extension(&planes, coder).unwrap();
            assert_eq!(extension_info(&bytes).unwrap(), (coder, 11));
            let ext = decode_extension(&bytes, 4, 3, 3).unwrap();
            assert_eq!(ext.planes, planes);
            assert_eq!(ext.coder, coder);
            assert!(decode_extension(&bytes, 4, 3, 1).is_err());
            assert!(decode_extension(&bytes[..bytes.len() - 1], 4, 3, 3).is_err());
            let mut bad = bytes.clone();
            bad[4] = 9;
            assert!(matches!(
                decode_extension(&bad, 4, 3, 3),
                Err(Error::CorruptHeader(_))
            ));
        }
    }

    proptest! {
        #[test]
        fn residual_algebra(n in 8u8..=16, seed in any::<u64>(), w in 1usize..12, h in 1usize..12) {
            let max = (1u32 << n) - 1;
            let mut state = seed | 1;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                // Bias towards the range ends.
                match state % 4 {
                    0 => 0,
                    1 => max as u16,
                    _ => ((state >> 8) % (u64::from(max) + 1)) as u16,
                }
            };
            let p = PlanarImage::new(w, h, n, vec![(0..w * h).map(|_| next()).collect()]).unwrap();
            let q = PlanarImage::new(w, h, n, vec![(0..w * h).map(|_| next()).collect()]).unwrap();
            let r = compute_residual(&p, &q).unwrap();
            let shifted = dc_shift(&r[0], n).unwrap();
            let (lo, hi) = shifted.min_max();
            prop_assert!(lo >= 0);
            prop_assert!(i64::from(hi) <= (1i64 << (n + 1)) - 2);
            let back = dc_unshift(&shifted, n).unwrap();
            prop_assert_eq!(&back, &r[0]);
            prop_assert_eq!(add_residual(&q, &[back]).unwrap(), p);
        }
    }
}
