//! Zigzag mapping and Golomb–Rice codes.
//!
//! A value `v` with parameter `k` is written as `v >> k` one bits, a
//! terminating zero, then the `k` low bits of `v`.

use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};

pub const MAX_RICE_K: u32 = 24;

/// 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ...
#[inline]
pub fn zigzag(v: i32) -> u32 {
    ((v << 1) ^ (v >> 31)) as u32
}

#[inline]
pub fn unzigzag(z: u32) -> i32 {
    ((z >> 1) as i32) ^ -((z & 1) as i32)
}

/// Coded length in bits of one value.
#[inline]
pub fn rice_len(value: u32, k: u32) -> u64 {
    u64::from(value >> k) + 1 + u64::from(k)
}

#[inline]
pub fn write_rice(w: &mut BitWriter, value: u32, k: u32) {
    w.write_ones(u64::from(value >> k));
    w.write_bit(false);
    w.write_bits(u64::from(value), k);
}

pub fn read_rice(r: &mut BitReader<'_>, k: u32) -> Result<u32> {
    let max_quotient = u64::from(u32::MAX >> k) + 1;
    let q = r.read_ones(max_quotient)?;
    if q == max_quotient {
        return Err(Error::CorruptPayload("rice quotient overflow".into()));
    }
    let rem = r.read_bits(k)?;
    Ok(((q << k) | rem) as u32)
}

/// Zigzag-maps each index and appends its Rice code to `w`.
pub fn encode_band(indices: &[i32], k: u32, w: &mut BitWriter) {
    debug_assert!(k <= MAX_RICE_K);
    for &v in indices {
        write_rice(w, zigzag(v), k);
    }
}

pub fn decode_band(r: &mut BitReader<'_>, count: usize, k: u32) -> Result<Vec<i32>> {
    if k > MAX_RICE_K {
        return Err(Error::CorruptPayload(format!(
            "rice parameter {k} out of range"
        )));
    }
    let mut out = Vec::with_capacity(count.min(r.remaining() as usize));
    for _ in 0..count {
        out.push(unzigzag(read_rice(r, k)?));
    }
    Ok(out)
}

/// Exact coded length of `indices` for every k in `0..=MAX_RICE_K`.
pub fn band_lengths(indices: &[i32]) -> [u64; MAX_RICE_K as usize + 1] {
    let mut quotients = [0u64; MAX_RICE_K as usize + 1];
    for &v in indices {
        let mut z = zigzag(v);
        for q in quotients.iter_mut() {
            if z == 0 {
                break;
            }
            *q += u64::from(z);
            z >>= 1;
        }
    }
    let n = indices.len() as u64;
    let mut lengths = [0u64; MAX_RICE_K as usize + 1];
    for (k, len) in lengths.iter_mut().enumerate() {
        *len = quotients[k] + n * (1 + k as u64);
    }
    lengths
}

/// The k minimizing the exact coded length, smallest k on ties, together
/// with that length in bits.
pub fn choose_rice_k(indices: &[i32]) -> (u32, u64) {
    let lengths = band_lengths(indices);
    let mut best = 0;
    for k in 1..lengths.len() {
        if lengths[k] < lengths[best] {
            best = k;
        }
    }
    (best as u32, lengths[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_to_bytes(values: &[i32], k: u32) -> (Vec<u8>, u64) {
        let mut w = BitWriter::new();
        encode_band(values, k, &mut w);
        let bits = w.bit_len();
        (w.finish(), bits)
    }

    #[test]
    fn zigzag_order() {
        let mapped: Vec<u32> = [0, -1, 1, -2, 2, -3].iter().map(|&v| zigzag(v)).collect();
        assert_eq!(mapped, vec![0, 1, 2, 3, 4, 5]);
        for v in [i32::MIN, -12345, 0, 77, i32::MAX] {
            assert_eq!(unzigzag(zigzag(v)), v);
        }
    }

    #[test]
    fn all_zero_band_is_one_bit_per_sample() {
        let (bytes, bits) = encode_to_bytes(&[0; 13], 0);
        assert_eq!(bits, 13);
        assert_eq!(bytes, vec![0, 0]);
    }

    #[test]
    fn minus_one_at_k0_is_one_zero() {
        let (bytes, bits) = encode_to_bytes(&[-1], 0);
        assert_eq!(bits, 2);
        assert_eq!(bytes, vec![0b1000_0000]);
        let mut r = BitReader::new(&bytes);
        assert_eq!(read_rice(&mut r, 0).unwrap(), 1);
    }

    #[test]
    fn exhaustive_round_trip_signed() {
        let values: Vec<i32> = (-512..=512).collect();
        for k in 0..=10 {
            let (bytes, bits) = encode_to_bytes(&values, k);
            let expected: u64 = values.iter().map(|&v| rice_len(zigzag(v), k)).sum();
            assert_eq!(bits, expected);
            let mut r = BitReader::with_bit_limit(&bytes, bits).unwrap();
            assert_eq!(decode_band(&mut r, values.len(), k).unwrap(), values);
            assert_eq!(r.remaining(), 0);
        }
    }

    #[test]
    fn lengths_match_measured() {
        let band: Vec<i32> = (0..200).map(|i| ((i * 37) % 61) - 30).collect();
        let lengths = band_lengths(&band);
        for k in 0..=MAX_RICE_K {
            let (_, bits) = encode_to_bytes(&band, k);
            assert_eq!(lengths[k as usize], bits, "k={k}");
        }
    }

    #[test]
    fn choose_k_cases() {
        assert_eq!(choose_rice_k(&[0; 64]).0, 0);
        assert_eq!(choose_rice_k(&[0]).0, 0);
        assert_eq!(choose_rice_k(&[]).0, 0);

        // Constant zigzag value 8 (index 4): measure every k directly.
        let band = vec![4i32; 50];
        let measured: Vec<u64> = (0..=MAX_RICE_K)
            .map(|k| encode_to_bytes(&band, k).1)
            .collect();
        let min = *measured.iter().min().unwrap();
        let argmin = measured.iter().position(|&l| l == min).unwrap() as u32;
        assert_eq!(choose_rice_k(&band), (argmin, min));
        // 8 costs 5 bits at k = 2, 3 and 4; ties go to the smallest.
        assert_eq!(argmin, 2);
    }

    #[test]
    fn truncated_band() {
        let (bytes, bits) = encode_to_bytes(&[5, -5, 100], 2);
        let mut r = BitReader::with_bit_limit(&bytes, bits - 1).unwrap();
        assert!(matches!(
            decode_band(&mut r, 3, 2),
            Err(Error::TruncatedBitstream)
        ));
    }
}
