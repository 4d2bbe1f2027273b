//! Transform-based lossless coder: three levels of the reversible 5/3
//! wavelet in both directions, step 1 everywhere, one Rice parameter per
//! band.
//!
//! Payload: per band `k u8 | coded bits u32`, then each band's bits padded
//! to a byte, bands in canonical order.

use rayon::prelude::*;

use crate::base::{band_layout, decompose, recompose, Band};
use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::rice::{choose_rice_k, decode_band, encode_band, MAX_RICE_K};

use super::ResidualPlane;

pub const WAVELET_LEVELS: u8 = 3;
const BAND_ENTRY_LEN: usize = 5;

pub fn encode_wavelet_lossless(plane: &ResidualPlane) -> Result<Vec<u8>> {
    if !plane.is_shifted() {
        return Err(Error::NotShifted);
    }
    let offset = 1i32 << (plane.depth() - 1);
    let centred: Vec<i32> = plane.samples().iter().map(|&s| s - offset).collect();
    let bands = decompose(
        &centred,
        plane.width(),
        plane.height(),
        WAVELET_LEVELS,
        WAVELET_LEVELS,
    )?;
    let coded: Vec<(u8, u32, Vec<u8>)> = bands
        .par_iter()
        .map(|band| {
            let (k, bits) = choose_rice_k(&band.coeffs);
            let mut w = BitWriter::new();
            encode_band(&band.coeffs, k, &mut w);
            let bits = u32::try_from(bits)
                .map_err(|_| Error::InvalidImage("band too large to code".into()))?;
            Ok((k as u8, bits, w.finish()))
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(
        coded.len() * BAND_ENTRY_LEN + coded.iter().map(|c| c.2.len()).sum::<usize>(),
    );
    for (k, bits, _) in &coded {
        out.push(*k);
        out.extend_from_slice(&bits.to_be_bytes());
    }
    for (_, _, data) in &coded {
        out.extend_from_slice(data);
    }
    Ok(out)
}

pub fn decode_wavelet_lossless(
    data: &[u8],
    width: usize,
    height: usize,
    depth: u8,
) -> Result<ResidualPlane> {
    if !(2..=17).contains(&depth) {
        return Err(Error::CorruptHeader(format!("depth {depth}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::ZeroArea);
    }
    let layout = band_layout(width, height, WAVELET_LEVELS, WAVELET_LEVELS)?;
    let table_len = layout.len() * BAND_ENTRY_LEN;
    let table = data.get(..table_len).ok_or(Error::TruncatedBitstream)?;

    let mut offset = table_len;
    let mut spans = Vec::with_capacity(layout.len());
    for (info, entry) in layout.iter().zip(table.chunks_exact(BAND_ENTRY_LEN)) {
        let k = u32::from(entry[0]);
        let bits = u32::from_be_bytes([entry[1], entry[2], entry[3], entry[4]]);
        if k > MAX_RICE_K || (bits as usize) < info.len() {
            return Err(Error::CorruptHeader("invalid wavelet band entry".into()));
        }
        let len = (bits as usize).div_ceil(8);
        let span = data
            .get(offset..offset + len)
            .ok_or(Error::TruncatedBitstream)?;
        spans.push((*info, k, bits, span));
        offset += len;
    }
    if offset != data.len() {
        return Err(Error::CorruptPayload(
            "trailing wavelet payload bytes".into(),
        ));
    }

    let bands = spans
        .par_iter()
        .map(|&(info, k, bits, span)| {
            let mut r = BitReader::with_bit_limit(span, bits.into())?;
            let coeffs = decode_band(&mut r, info.len(), k)?;
            if r.remaining() != 0 {
                return Err(Error::CorruptPayload("unused bits in wavelet band".into()));
            }
            Ok(Band { info, coeffs })
        })
        .collect::<Result<Vec<_>>>()?;
    let centred = recompose(&bands, width, height, WAVELET_LEVELS, WAVELET_LEVELS)?;

    let shift = 1i64 << (depth - 1);
    let max = (1i64 << depth) - 1;
    let samples = centred
        .into_iter()
        .map(|c| {
            let s = i64::from(c) + shift;
            if (0..=max).contains(&s) {
                Ok(s as i32)
            } else {
                Err(Error::CorruptPayload(format!(
                    "decoded sample {s} outside [0, {max}]"
                )))
            }
        })
        .collect::<Result<_>>()?;
    ResidualPlane::shifted(width, height, depth, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_plane_costs_about_one_bit_per_sample() {
        let plane = ResidualPlane::shifted(64, 64, 9, vec![255; 64 * 64]).unwrap();
        let bytes = encode_wavelet_lossless(&plane).unwrap();
        // 4096 samples at one bit, plus the band table and per-band padding;
        // the low band's constant -1 costs two bits per sample.
        let low = 8 * 8;
        let table = 10 * 5;
        assert!(
            bytes.len() <= table + (4096 + low) / 8 + 10,
            "{}",
            bytes.len()
        );
        assert_eq!(decode_wavelet_lossless(&bytes, 64, 64, 9).unwrap(), plane);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [8u8, 10, 12] {
            for _ in 0..10 {
                let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
                let max = (1i32 << (n + 1)) - 2;
                let samples = (0..w * h).map(|_| rng.gen_range(0..=max)).collect();
                let plane = ResidualPlane::shifted(w, h, n + 1, samples).unwrap();
                let bytes = encode_wavelet_lossless(&plane).unwrap();
                assert_eq!(encode_wavelet_lossless(&plane).unwrap(), bytes);
                assert_eq!(decode_wavelet_lossless(&bytes, w, h, n + 1).unwrap(), plane);
            }
        }
    }

    #[test]
    fn corrupt_payloads() {
        let plane =
            ResidualPlane::shifted(16, 16, 9, (0..256).map(|i| i * 2 % 511).collect()).unwrap();
        let bytes = encode_wavelet_lossless(&plane).unwrap();
        assert!(decode_wavelet_lossless(&bytes[..bytes.len() - 1], 16, 16, 9).is_err());
        assert!(decode_wavelet_lossless(&bytes[..20], 16, 16, 9).is_err());
        let mut bad = bytes.clone();
        bad[0] = 30;
        assert!(matches!(
            decode_wavelet_lossless(&bad, 16, 16, 9),
            Err(Error::CorruptHeader(_))
        ));
        assert!(decode_wavelet_lossless(&bytes, 16, 15, 9).is_err());
    }
}
