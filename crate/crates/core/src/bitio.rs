//! MSB-first bit serialization shared by every entropy coder in the crate.

use crate::error::{Error, Result};

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    filled: u32,
    bits_written: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far, not counting final padding.
    pub fn bit_len(&self) -> u64 {
        self.bits_written
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.write_bits(bit as u64, 1);
    }

    /// Writes the `count` low bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 57);
        if count == 0 {
            return;
        }
        let value = value & ((1u64 << count) - 1);
        self.acc = (self.acc << count) | value;
        self.filled += count;
        self.bits_written += u64::from(count);
        while self.filled >= 8 {
            self.filled -= 8;
            self.bytes.push((self.acc >> self.filled) as u8);
        }
        self.acc &= (1u64 << self.filled) - 1;
    }

    /// `count` one bits.
    pub fn write_ones(&mut self, mut count: u64) {
        while count >= 32 {
            self.write_bits(u64::from(u32::MAX), 32);
            count -= 32;
        }
        if count > 0 {
            self.write_bits((1u64 << count) - 1, count as u32);
        }
    }

    /// Pads with zero bits up to the next byte boundary.
    pub fn align(&mut self) {
        if self.filled > 0 {
            let pad = 8 - self.filled;
            self.write_bits(0, pad);
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.align();
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self {
            data,
            pos: 0,
            limit: data.len() as u64 * 8,
        }
    }

    /// A reader that refuses to go past `bits`, even if `data` is longer.
    pub fn with_bit_limit(data: &'a [u8], bits: u64) -> Result<Self> {
        if bits > data.len() as u64 * 8 {
            return Err(Error::TruncatedBitstream);
        }
        Ok(Self {
            data,
            pos: 0,
            limit: bits,
        })
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit {
            return Err(Error::TruncatedBitstream);
        }
        let byte = self.data[(self.pos >> 3) as usize];
        let bit = (byte >> (7 - (self.pos & 7))) & 1;
        self.pos += 1;
        Ok(bit == 1)
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u64> {
        debug_assert!(count <= 64);
        if u64::from(count) > self.remaining() {
            return Err(Error::TruncatedBitstream);
        }
        let mut value = 0u64;
        let mut left = count;
        while left > 0 {
            let byte = self.data[(self.pos >> 3) as usize];
            let offset = (self.pos & 7) as u32;
            let avail = 8 - offset;
            let take = avail.min(left);
            let chunk = (byte >> (avail - take)) & ((1u16 << take) - 1) as u8;
            value = (value << take) | u64::from(chunk);
            left -= take;
            self.pos += u64::from(take);
        }
        Ok(value)
    }

    /// Counts one bits up to (and consuming) the terminating zero, giving up
    /// after `max` ones. Returns the count of ones read.
    pub fn read_ones(&mut self, max: u64) -> Result<u64> {
        let mut count = 0;
        while count < max {
            if !self.read_bit()? {
                return Ok(count);
            }
            count += 1;
        }
        Ok(count)
    }

    pub fn align(&mut self) {
        self.pos = ((self.pos + 7) & !7).min(self.limit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.write_bits(0b101, 3);
        w.write_bits(0b1, 1);
        w.write_bits(0xF, 4);
        w.write_bit(true);
        assert_eq!(w.bit_len(), 9);
        assert_eq!(w.finish(), vec![0b1011_1111, 0b1000_0000]);
    }

    #[test]
    fn read_back_mixed_widths() {
        let mut w = BitWriter::new();
        let fields: Vec<(u64, u32)> = vec![
            (3, 2),
            (0x1234, 16),
            (0, 5),
            (1, 1),
            (0x1_ffff, 17),
            (7, 57),
        ];
        for &(v, n) in &fields {
            w.write_bits(v, n);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for &(v, n) in &fields {
            assert_eq!(r.read_bits(n).unwrap(), v);
        }
    }

    #[test]
    fn ones_run() {
        let mut w = BitWriter::new();
        w.write_ones(70);
        w.write_bit(false);
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_ones(1000).unwrap(), 70);
    }

    #[test]
    fn truncation_is_an_error() {
        let bytes = [0xFFu8];
        let mut r = BitReader::new(&bytes);
        assert!(r.read_bits(8).is_ok());
        assert!(matches!(r.read_bit(), Err(Error::TruncatedBitstream)));

        let mut r = BitReader::with_bit_limit(&bytes, 3).unwrap();
        assert!(matches!(r.read_bits(4), Err(Error::TruncatedBitstream)));
        assert!(BitReader::with_bit_limit(&bytes, 9).is_err());
    }
}
