//! Reversible LeGall 5/3 lifting with whole-sample symmetric extension.
//!
//! For a line `x` of length `n >= 2` the high band has `n / 2` samples and
//! the low band `(n + 1) / 2`:
//!
//! ```text
//! d[i] = x[2i+1] - floor((x[2i] + x[2i+2]) / 2)
//! s[i] = x[2i]   + floor((d[i-1] + d[i] + 2) / 4)
//! ```
//!
//! with `x[n] = x[n-2]`, `d[-1] = d[0]` and `d[n/2] = d[n/2 - 1]` at the
//! borders. A single sample passes through as the low band.

use crate::error::{Error, Result};

pub fn dwt_forward_53(line: &[i32]) -> Result<(Vec<i32>, Vec<i32>)> {
    if line.is_empty() {
        return Err(Error::EmptyLine);
    }
    let mut low = vec![0; line.len().div_ceil(2)];
    let mut high = vec![0; line.len() / 2];
    forward_line(line, &mut low, &mut high);
    Ok((low, high))
}

pub fn dwt_inverse_53(low: &[i32], high: &[i32]) -> Result<Vec<i32>> {
    if low.is_empty() || (low.len() != high.len() && low.len() != high.len() + 1) {
        return Err(Error::LiftingLengths {
            low: low.len(),
            high: high.len(),
        });
    }
    let mut line = vec![0; low.len() + high.len()];
    inverse_line(low, high, &mut line);
    Ok(line)
}

// Sums are formed in i64; the narrowing cast only matters for coefficients
// no valid image can produce.
#[inline]
fn predict(left: i32, right: i32) -> i32 {
    ((i64::from(left) + i64::from(right)) >> 1) as i32
}

#[inline]
fn update(left: i32, right: i32) -> i32 {
    ((i64::from(left) + i64::from(right) + 2) >> 2) as i32
}

pub(crate) fn forward_line(x: &[i32], low: &mut [i32], high: &mut [i32]) {
    let n = x.len();
    debug_assert_eq!(low.len(), n.div_ceil(2));
    debug_assert_eq!(high.len(), n / 2);
    if n == 1 {
        low[0] = x[0];
        return;
    }
    let nh = n / 2;
    for i in 0..nh {
        let right = if 2 * i + 2 < n {
            x[2 * i + 2]
        } else {
            x[2 * i]
        };
        high[i] = x[2 * i + 1].wrapping_sub(predict(x[2 * i], right));
    }
    for (i, s) in low.iter_mut().enumerate() {
        let d_left = high[i.saturating_sub(1)];
        let d_right = high[i.min(nh - 1)];
        *s = x[2 * i].wrapping_add(update(d_left, d_right));
    }
}

pub(crate) fn inverse_line(low: &[i32], high: &[i32], x: &mut [i32]) {
    let n = x.len();
    if n == 1 {
        x[0] = low[0];
        return;
    }
    let nh = high.len();
    for (i, &s) in low.iter().enumerate() {
        let d_left = high[i.saturating_sub(1)];
        let d_right = high[i.min(nh - 1)];
        x[2 * i] = s.wrapping_sub(update(d_left, d_right));
    }
    for i in 0..nh {
        let right = if 2 * i + 2 < n {
            x[2 * i + 2]
        } else {
            x[2 * i]
        };
        x[2 * i + 1] = high[i].wrapping_add(predict(x[2 * i], right));
    }
}
