//! Horizontal-dominant Mallat decomposition.
//!
//! Every level splits the current low band horizontally; the first
//! `levels_v` levels also split vertically. A level with a vertical stage
//! yields `HL`, `LH` and `HH` detail bands (first letter horizontal), a
//! horizontal-only level yields a single `H` band. Canonical band order is
//! the final low band, then detail bands from the coarsest level down to
//! level 1.

use super::dwt::{forward_line, inverse_line};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// The residual low-pass band after the last level.
    Low,
    H,
    HL,
    LH,
    HH,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Low => "LL",
            Orientation::H => "H",
            Orientation::HL => "HL",
            Orientation::LH => "LH",
            Orientation::HH => "HH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandInfo {
    pub orientation: Orientation,
    /// 1 is the finest level.
    pub level: u8,
    pub width: usize,
    pub height: usize,
}

impl BandInfo {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_detail(&self) -> bool {
        self.orientation != Orientation::Low
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub info: BandInfo,
    pub coeffs: Vec<i32>,
}

fn check_levels(levels_h: u8, levels_v: u8) -> Result<()> {
    if levels_v > levels_h {
        return Err(Error::InvalidConfig(format!(
            "levels_v {levels_v} exceeds levels_h {levels_h}"
        )));
    }
    Ok(())
}

/// Band geometry in canonical order.
pub fn band_layout(
    width: usize,
    height: usize,
    levels_h: u8,
    levels_v: u8,
) -> Result<Vec<BandInfo>> {
    check_levels(levels_h, levels_v)?;
    let (mut w, mut h) = (width, height);
    let mut per_level = Vec::with_capacity(levels_h as usize);
    for level in 1..=levels_h {
        let (wl, wh) = (w.div_ceil(2), w / 2);
        let band = |orientation, width, height| BandInfo {
            orientation,
            level,
            width,
            height,
        };
        if level <= levels_v {
            let (hl, hh) = (h.div_ceil(2), h / 2);
            per_level.push(vec![
                band(Orientation::HL, wh, hl),
                band(Orientation::LH, wl, hh),
                band(Orientation::HH, wh, hh),
            ]);
            h = hl;
        } else {
            per_level.push(vec![band(Orientation::H, wh, h)]);
        }
        w = wl;
    }
    let mut layout = vec![BandInfo {
        orientation: Orientation::Low,
        level: levels_h,
        width: w,
        height: h,
    }];
    layout.extend(per_level.into_iter().rev().flatten());
    Ok(layout)
}

fn split_rows(src: &[i32], w: usize, h: usize) -> (Vec<i32>, Vec<i32>) {
    let (wl, wh) = (w.div_ceil(2), w / 2);
    let mut lo = vec![0; wl * h];
    let mut hi = vec![0; wh * h];
    for y in 0..h {
        forward_line(
            &src[y * w..(y + 1) * w],
            &mut lo[y * wl..(y + 1) * wl],
            &mut hi[y * wh..(y + 1) * wh],
        );
    }
    (lo, hi)
}

fn merge_rows(lo: &[i32], hi: &[i32], w: usize, h: usize) -> Vec<i32> {
    let (wl, wh) = (w.div_ceil(2), w / 2);
    let mut out = vec![0; w * h];
    for y in 0..h {
        inverse_line(
            &lo[y * wl..(y + 1) * wl],
            &hi[y * wh..(y + 1) * wh],
            &mut out[y * w..(y + 1) * w],
        );
    }
    out
}

fn split_columns(src: &[i32], w: usize, h: usize) -> (Vec<i32>, Vec<i32>) {
    let (hl, hh) = (h.div_ceil(2), h / 2);
    let mut lo = vec![0; w * hl];
    let mut hi = vec![0; w * hh];
    let mut column = vec![0; h];
    let mut col_lo = vec![0; hl];
    let mut col_hi = vec![0; hh];
    for x in 0..w {
        for (y, c) in column.iter_mut().enumerate() {
            *c = src[y * w + x];
        }
        forward_line(&column, &mut col_lo, &mut col_hi);
        for (y, &c) in col_lo.iter().enumerate() {
            lo[y * w + x] = c;
        }
        for (y, &c) in col_hi.iter().enumerate() {
            hi[y * w + x] = c;
        }
    }
    (lo, hi)
}

fn merge_columns(lo: &[i32], hi: &[i32], w: usize, h: usize) -> Vec<i32> {
    let (hl, hh) = (h.div_ceil(2), h / 2);
    let mut out = vec![0; w * h];
    let mut column = vec![0; h];
    let mut col_lo = vec![0; hl];
    let mut col_hi = vec![0; hh];
    for x in 0..w {
        for (y, c) in col_lo.iter_mut().enumerate() {
            *c = lo[y * w + x];
        }
        for (y, c) in col_hi.iter_mut().enumerate() {
            *c = hi[y * w + x];
        }
        inverse_line(&col_lo, &col_hi, &mut column);
        for (y, &c) in column.iter().enumerate() {
            out[y * w + x] = c;
        }
    }
    out
}

pub fn decompose(
    plane: &[i32],
    width: usize,
    height: usize,
    levels_h: u8,
    levels_v: u8,
) -> Result<Vec<Band>> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroArea);
    }
    if plane.len() != width * height {
        return Err(Error::LayoutMismatch(format!(
            "plane has {} samples, expected {}",
            plane.len(),
            width * height
        )));
    }
    let layout = band_layout(width, height, levels_h, levels_v)?;

    let mut current = plane.to_vec();
    let (mut w, mut h) = (width, height);
    let mut details: Vec<Vec<Vec<i32>>> = Vec::with_capacity(levels_h as usize);
    for level in 1..=levels_h {
        let (lo, hi) = split_rows(&current, w, h);
        let (wl, wh) = (w.div_ceil(2), w / 2);
        if level <= levels_v {
            let (ll, lh) = split_columns(&lo, wl, h);
            let (hl, hh) = split_columns(&hi, wh, h);
            details.push(vec![hl, lh, hh]);
            current = ll;
            h = h.div_ceil(2);
        } else {
            details.push(vec![hi]);
            current = lo;
        }
        w = wl;
    }

    let coeffs = std::iter::once(current).chain(details.into_iter().rev().flatten());
    Ok(layout
        .into_iter()
        .zip(coeffs)
        .map(|(info, coeffs)| {
            debug_assert_eq!(info.len(), coeffs.len());
            Band { info, coeffs }
        })
        .collect())
}

pub fn recompose(
    bands: &[Band],
    width: usize,
    height: usize,
    levels_h: u8,
    levels_v: u8,
) -> Result<Vec<i32>> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroArea);
    }
    let layout = band_layout(width, height, levels_h, levels_v)?;
    if bands.len() != layout.len() {
        return Err(Error::LayoutMismatch(format!(
            "{} bands, expected {}",
            bands.len(),
            layout.len()
        )));
    }
    for (band, info) in bands.iter().zip(&layout) {
        if band.info != *info || band.coeffs.len() != info.len() {
            return Err(Error::LayoutMismatch(format!(
                "band {}{} does not match the canonical layout",
                band.info.orientation.name(),
                band.info.level
            )));
        }
    }

    // Sizes of the low band entering each level, finest first.
    let mut sizes = Vec::with_capacity(levels_h as usize);
    let (mut w, mut h) = (width, height);
    for level in 1..=levels_h {
        sizes.push((w, h));
        if level <= levels_v {
            h = h.div_ceil(2);
        }
        w = w.div_ceil(2);
    }

    let mut current = bands[0].coeffs.clone();
    let mut next = 1;
    for level in (1..=levels_h).rev() {
        let (w, h) = sizes[level as usize - 1];
        let (wl, wh) = (w.div_ceil(2), w / 2);
        if level <= levels_v {
            let (hl, lh, hh) = (
                &bands[next].coeffs,
                &bands[next + 1].coeffs,
                &bands[next + 2].coeffs,
            );
            next += 3;
            let lo = merge_columns(&current, lh, wl, h);
            let hi = merge_columns(hl, hh, wh, h);
            current = merge_rows(&lo, &hi, w, h);
        } else {
            current = merge_rows(&current, &bands[next].coeffs, w, h);
            next += 1;
        }
    }
    Ok(current)
}
