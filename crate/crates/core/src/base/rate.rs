//! Bisection over a global quantizer scale.
//!
//! Each band's step is `max(1, round(scale * gain))` with a gain fixed per
//! band (see [`band_gain`]). The search looks for the finest scale whose
//! payload fits `target_bpp * (1 + tolerance)` bits per pixel.

use rayon::prelude::*;

use super::bandcode::choose_band_coding;
use super::bands::{Band, BandInfo, Orientation};
use super::codec::{analyze, header_len, BaseConfig, BaseTarget};
use super::quant::quantize_deadzone;
use crate::error::{Error, Result};
use crate::image::PlanarImage;

pub const MIN_SCALE: u32 = 1;
pub const MAX_SCALE: u32 = 1 << 16;
pub const MAX_PROBES: usize = 20;

/// Steps are serialized as 16-bit values.
const MAX_STEP: f64 = u16::MAX as f64;

/// Squared norms of the 5/3 synthesis filters `[1/2, 1, 1/2]` and
/// `[-1/8, -1/4, 3/4, -1/4, -1/8]`.
const LOW_NORM2: f64 = 1.5;
const HIGH_NORM2: f64 = 0.71875;

/// Gain of the level-1 `HL` band; every other gain is relative to it.
const REFERENCE_GAIN: f64 = 2.0;

/// Approximate energy of a unit coefficient of this band after synthesis,
/// as a product of cascaded one-dimensional filter norms.
pub fn synthesis_weight(info: &BandInfo, levels_v: u8) -> f64 {
    let j = i32::from(info.level);
    let lv = i32::from(levels_v);
    let high = |stage: i32| LOW_NORM2.powi(stage - 1) * HIGH_NORM2;
    let (horizontal, vertical) = match info.orientation {
        Orientation::Low => (LOW_NORM2.powi(j), LOW_NORM2.powi(lv)),
        Orientation::H => (high(j), LOW_NORM2.powi(lv)),
        Orientation::HL => (high(j), LOW_NORM2.powi(j)),
        Orientation::LH => (LOW_NORM2.powi(j), high(j)),
        Orientation::HH => (high(j), high(j)),
    };
    horizontal * vertical
}

/// Relative step size of a band at a given scale.
///
/// Gains equalize the image-domain error contributed by each band, scaled
/// so that every level-1 detail band has a step of at least 2. A
/// rate-controlled stream therefore never becomes lossless.
pub fn band_gain(info: &BandInfo, levels_v: u8) -> f64 {
    let reference = HIGH_NORM2 * LOW_NORM2;
    REFERENCE_GAIN * (reference / synthesis_weight(info, levels_v)).sqrt()
}

pub fn step_for_scale(info: &BandInfo, levels_v: u8, scale: u32) -> u16 {
    (f64::from(scale) * band_gain(info, levels_v))
        .round()
        .clamp(1.0, MAX_STEP) as u16
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateDecision {
    pub scale: u32,
    /// Per component, per band in canonical order.
    pub steps: Vec<Vec<u16>>,
    /// Exact payload size at `scale`.
    pub coded_bytes: usize,
    /// The coarsest scale still exceeded the budget.
    pub overshoot: bool,
    pub probes: usize,
}

pub fn rate_control(image: &PlanarImage, config: &BaseConfig) -> Result<RateDecision> {
    config.validate()?;
    let BaseTarget::Bpp(target_bpp) = config.target else {
        return Err(Error::InvalidConfig(
            "rate control needs a bpp target".into(),
        ));
    };
    let bands = analyze(image, config.levels_h, config.levels_v)?;
    Ok(decide(
        &bands,
        config.levels_v,
        image.pixel_count(),
        target_bpp,
        config.rate_tolerance,
    ))
}

fn steps_at(bands: &[Vec<Band>], levels_v: u8, scale: u32) -> Vec<Vec<u16>> {
    bands
        .iter()
        .map(|plane| {
            plane
                .iter()
                .map(|b| step_for_scale(&b.info, levels_v, scale))
                .collect()
        })
        .collect()
}

/// Exact payload size for the given steps, without writing any bits.
pub(crate) fn coded_size(bands: &[Vec<Band>], steps: &[Vec<u16>]) -> usize {
    let body: usize = bands
        .par_iter()
        .zip(steps)
        .map(|(plane, plane_steps)| {
            plane
                .par_iter()
                .zip(plane_steps)
                .map(|(band, &step)| {
                    let indices: Vec<i32> = band
                        .coeffs
                        .iter()
                        .map(|&c| quantize_deadzone(c, step.into()))
                        .collect();
                    choose_band_coding(&indices).bits.div_ceil(8) as usize
                })
                .sum::<usize>()
        })
        .sum();
    header_len(bands.len(), bands.first().map_or(0, Vec::len)) + body
}

pub(crate) fn decide(
    bands: &[Vec<Band>],
    levels_v: u8,
    pixels: usize,
    target_bpp: f64,
    tolerance: f64,
) -> RateDecision {
    let budget_bits = target_bpp * (1.0 + tolerance) * pixels as f64;
    let fits = |bytes: usize| (bytes * 8) as f64 <= budget_bits;
    let probe = |scale: u32| {
        let steps = steps_at(bands, levels_v, scale);
        let size = coded_size(bands, &steps);
        (steps, size)
    };

    let mut probes = 1;
    let (steps, size) = probe(MIN_SCALE);
    if fits(size) {
        return RateDecision {
            scale: MIN_SCALE,
            steps,
            coded_bytes: size,
            overshoot: false,
            probes,
        };
    }
    probes += 1;
    let (steps, size) = probe(MAX_SCALE);
    if !fits(size) {
        return RateDecision {
            scale: MAX_SCALE,
            steps,
            coded_bytes: size,
            overshoot: true,
            probes,
        };
    }

    // Invariant: `lo` overshoots, `hi` fits.
    let (mut lo, mut hi) = (MIN_SCALE, MAX_SCALE);
    let mut best = (steps, size);
    while hi - lo > 1 && probes < MAX_PROBES {
        let mid = lo + (hi - lo) / 2;
        probes += 1;
        let (steps, size) = probe(mid);
        if fits(size) {
            hi = mid;
            best = (steps, size);
        } else {
            lo = mid;
        }
    }
    RateDecision {
        scale: hi,
        steps: best.0,
        coded_bytes: best.1,
        overshoot: false,
        probes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::band_layout;

    #[test]
    fn finest_detail_steps_never_reach_one() {
        for lh in 1..=6u8 {
            for lv in 0..=2u8.min(lh) {
                for info in band_layout(256, 256, lh, lv).unwrap() {
                    let step = step_for_scale(&info, lv, MIN_SCALE);
                    if info.level == 1 && info.orientation != Orientation::Low {
                        assert!(step >= 2, "{info:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn gains_fall_towards_coarse_bands() {
        let layout = band_layout(512, 512, 5, 2).unwrap();
        let gain = |o, level| {
            let info = layout
                .iter()
                .find(|b| b.orientation == o && b.level == level)
                .unwrap();
            band_gain(info, 2)
        };
        assert!((gain(Orientation::HL, 1) - 2.0).abs() < 1e-12);
        assert!(gain(Orientation::HH, 1) > gain(Orientation::HL, 1));
        assert!(gain(Orientation::HL, 2) < gain(Orientation::HL, 1));
        assert!(gain(Orientation::H, 5) < gain(Orientation::H, 3));
        assert!(gain(Orientation::Low, 5) < gain(Orientation::H, 5));
    }

    #[test]
    fn steps_are_monotone_in_scale() {
        let layout = band_layout(64, 64, 5, 2).unwrap();
        for info in &layout {
            let mut last = 0;
            for scale in [1, 2, 3, 10, 100, 1000, MAX_SCALE] {
                let step = step_for_scale(info, 2, scale);
                assert!(step >= last);
                last = step;
            }
        }
    }
}
