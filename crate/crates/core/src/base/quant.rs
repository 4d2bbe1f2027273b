//! Dead-zone scalar quantizer with midpoint reconstruction.

/// `sign(c) * floor(|c| / step)`. A step of 1 is the identity.
#[inline]
pub fn quantize_deadzone(coeff: i32, step: u32) -> i32 {
    debug_assert!(step >= 1);
    let q = (i64::from(coeff).abs() / i64::from(step)) as i32;
    if coeff < 0 {
        -q
    } else {
        q
    }
}

/// `sign(i) * (|i| * step + floor(step / 2))`, and 0 for index 0.
#[inline]
pub fn dequantize_deadzone(index: i32, step: u32) -> i32 {
    if index == 0 {
        return 0;
    }
    let step = i64::from(step);
    let mag = i64::from(index).abs() * step + step / 2;
    let mag = mag.min(i64::from(i32::MAX)) as i32;
    if index < 0 {
        -mag
    } else {
        mag
    }
}
