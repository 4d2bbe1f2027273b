//! Low-complexity predictive lossless coder.
//!
//! Samples are visited in raster order and predicted by the median edge
//! detector from the west (`a`), north (`b`) and north-west (`c`)
//! neighbours. The first sample is predicted by `2^(depth-1) - 1`, the rest
//! of the first row by `a` and the rest of the first column by `b`.
//!
//! Prediction errors are zigzag mapped and Rice coded. The Rice parameter
//! is the MSB position of the running mean of mapped errors, and the
//! running sums are halved whenever their count reaches 64. Codes whose
//! quotient would reach [`ESCAPE_QUOTIENT`] are replaced by that many one
//! bits followed by the mapped error in `depth + 1` raw bits.

use crate::bitio::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::rice::{unzigzag, zigzag, MAX_RICE_K};

use super::ResidualPlane;

pub const ESCAPE_QUOTIENT: u32 = 32;
const RESET_COUNT: u32 = 64;

/// Median edge detector.
#[inline]
pub fn med_predict(a: i32, b: i32, c: i32) -> i32 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if c >= hi {
        lo
    } else if c <= lo {
        hi
    } else {
        a + b - c
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct AdaptiveK {
    sum: u64,
    count: u32,
}

impl AdaptiveK {
    fn k(&self) -> u32 {
        if self.count == 0 {
            return 0;
        }
        let mean = self.sum / u64::from(self.count);
        if mean == 0 {
            0
        } else {
            (63 - mean.leading_zeros()).min(MAX_RICE_K)
        }
    }

    fn update(&mut self, mapped: u32) {
        self.sum += u64::from(mapped);
        self.count += 1;
        if self.count == RESET_COUNT {
            self.sum >>= 1;
            self.count >>= 1;
        }
    }
}

#[inline]
fn prediction(samples: &[i32], width: usize, x: usize, y: usize, depth: u8) -> i32 {
    let i = y * width + x;
    match (x, y) {
        (0, 0) => (1 << (depth - 1)) - 1,
        (_, 0) => samples[i - 1],
        (0, _) => samples[i - width],
        _ => med_predict(samples[i - 1], samples[i - width], samples[i - width - 1]),
    }
}

pub fn encode_predictive(plane: &ResidualPlane) -> Result<Vec<u8>> {
    if !plane.is_shifted() {
        return Err(Error::NotShifted);
    }
    let (width, depth) = (plane.width(), plane.depth());
    let samples = plane.samples();
    let raw_bits = u32::from(depth) + 1;
    let mut state = AdaptiveK::default();
    let mut w = BitWriter::new();
    for y in 0..plane.height() {
        for x in 0..width {
            let pred = prediction(samples, width, x, y, depth);
            let mapped = zigzag(samples[y * width + x] - pred);
            let k = state.k();
            if mapped >> k >= ESCAPE_QUOTIENT {
                w.write_ones(ESCAPE_QUOTIENT.into());
                w.write_bits(mapped.into(), raw_bits);
            } else {
                w.write_ones(u64::from(mapped >> k));
                w.write_bit(false);
                w.write_bits(mapped.into(), k);
            }
            state.update(mapped);
        }
    }
    Ok(w.finish())
}

pub fn decode_predictive(
    data: &[u8],
    width: usize,
    height: usize,
    depth: u8,
) -> Result<ResidualPlane> {
    if !(2..=17).contains(&depth) {
        return Err(Error::CorruptHeader(format!("depth {depth}")));
    }
    let count = width.checked_mul(height).ok_or(Error::ZeroArea)?;
    // Every sample costs at least one bit.
    if count == 0 || count > data.len() * 8 {
        return Err(Error::TruncatedBitstream);
    }
    let raw_bits = u32::from(depth) + 1;
    let max = (1i32 << depth) - 1;
    let mut samples = vec![0i32; count];
    let mut state = AdaptiveK::default();
    let mut r = BitReader::new(data);
    for y in 0..height {
        for x in 0..width {
            let k = state.k();
            let q = r.read_ones(ESCAPE_QUOTIENT.into())? as u32;
            let mapped = if q == ESCAPE_QUOTIENT {
                r.read_bits(raw_bits)? as u32
            } else {
                (q << k) | r.read_bits(k)? as u32
            };
            let pred = prediction(&samples, width, x, y, depth);
            let s = pred + unzigzag(mapped);
            if !(0..=max).contains(&s) {
                return Err(Error::CorruptPayload(format!(
                    "decoded sample {s} outside [0, {max}]"
                )));
            }
            samples[y * width + x] = s;
            state.update(mapped);
        }
    }
    if r.position().div_ceil(8) as usize != data.len() {
        return Err(Error::CorruptPayload(
            "trailing predictive payload bytes".into(),
        ));
    }
    ResidualPlane::shifted(width, height, depth, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn branch_oracle(a: i32, b: i32, c: i32) -> i32 {
        if c >= a.max(b) {
            a.min(b)
        } else if c <= a.min(b) {
            a.max(b)
        } else {
            a + b - c
        }
    }

    #[test]
    fn med_points() {
        assert_eq!(med_predict(5, 5, 5), 5);
        assert_eq!(med_predict(10, 2, 12), 2);
        assert_eq!(med_predict(10, 2, 1), 10);
        assert_eq!(med_predict(10, 2, 4), 8);
    }

    #[test]
    fn med_exhaustive_cube() {
        for a in 0..16 {
            for b in 0..16 {
                for c in 0..16 {
                    assert_eq!(
                        med_predict(a, b, c),
                        branch_oracle(a, b, c),
                        "({a},{b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn flat_residual_costs_one_bit_per_sample() {
        let plane = ResidualPlane::shifted(64, 64, 9, vec![255; 64 * 64]).unwrap();
        let bytes = encode_predictive(&plane).unwrap();
        assert_eq!(bytes.len(), 64 * 64 / 8);
        assert!(bytes.len() < 600);
        assert_eq!(decode_predictive(&bytes, 64, 64, 9).unwrap(), plane);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [8u8, 10, 12] {
            for _ in 0..10 {
                let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
                let max = (1i32 << (n + 1)) - 2;
                let samples = (0..w * h).map(|_| rng.gen_range(0..=max)).collect();
                let plane = ResidualPlane::shifted(w, h, n + 1, samples).unwrap();
                let bytes = encode_predictive(&plane).unwrap();
                assert_eq!(decode_predictive(&bytes, w, h, n + 1).unwrap(), plane);
            }
        }
    }

    #[test]
    fn escape_path_round_trips() {
        // A flat run drives k to 0, then a full-scale jump needs the escape.
        let mut samples = vec![65535; 200];
        samples[150] = (1 << 17) - 1;
        samples[151] = 0;
        let plane = ResidualPlane::shifted(200, 1, 17, samples).unwrap();
        let bytes = encode_predictive(&plane).unwrap();
        // Without the escape the second jump alone would cost 2^17 bits.
        assert!(bytes.len() < 400, "{}", bytes.len());
        assert_eq!(decode_predictive(&bytes, 200, 1, 17).unwrap(), plane);
    }

    #[test]
    fn rejects_unshifted_and_corrupt_input() {
        let r = ResidualPlane::unshifted(2, 2, 9, vec![0, -1, 1, 0]).unwrap();
        assert!(matches!(encode_predictive(&r), Err(Error::NotShifted)));
        let plane = ResidualPlane::shifted(8, 8, 9, (0..64).map(|i| i * 7).collect()).unwrap();
        let bytes = encode_predictive(&plane).unwrap();
        assert!(decode_predictive(&bytes[..bytes.len() - 1], 8, 8, 9).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode_predictive(&long, 8, 8, 9).is_err());
        assert!(decode_predictive(&bytes, 8, 8, 1).is_err());
    }
}
