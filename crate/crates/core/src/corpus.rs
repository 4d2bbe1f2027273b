//! Deterministic test images.
//!
//! Every synthetic image is a pure function of its kind, size, depth,
//! component count and seed. Samples are generated on a `[0, 1]` scale and
//! quantized to the requested depth, so the same scene is available at
//! every `N`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{decode_pnm, PlanarImage};

const LENA_PGM: &[u8] = include_bytes!("../testdata/lena.pgm");

/// The standard 512x512 8-bit grayscale `lena` test image.
pub fn lena() -> PlanarImage {
    decode_pnm(LENA_PGM).expect("bundled image is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyntheticKind {
    Gradient,
    Noise,
    TextLike,
    Constant,
    Checkerboard,
    Natural,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 6] = [
        SyntheticKind::Gradient,
        SyntheticKind::Noise,
        SyntheticKind::TextLike,
        SyntheticKind::Constant,
        SyntheticKind::Checkerboard,
        SyntheticKind::Natural,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gradient => "gradient",
            Self::Noise => "noise",
            Self::TextLike => "text",
            Self::Constant => "constant",
            Self::Checkerboard => "checkerboard",
            Self::Natural => "natural",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown synthetic image `{s}`")))
    }
}

fn quantize(v: f64, max: f64) -> u16 {
    (v.clamp(0.0, 1.0) * max).round() as u16
}

/// Smooth random field: a sum of a few random plane waves.
struct Waves {
    terms: Vec<(f64, f64, f64, f64)>,
}

impl Waves {
    fn new(rng: &mut ChaCha8Rng, count: usize, max_freq: f64) -> Self {
        let terms = (0..count)
            .map(|i| {
                let f = max_freq / (1.0 + i as f64);
                (
                    rng.gen_range(-f..f),
                    rng.gen_range(-f..f),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    1.0 / (1.0 + i as f64),
                )
            })
            .collect();
        Self { terms }
    }

    /// Roughly in `[-1, 1]`.
    fn at(&self, x: f64, y: f64) -> f64 {
        let norm: f64 = self.terms.iter().map(|t| t.3).sum();
        self.terms
            .iter()
            .map(|&(fx, fy, phase, amp)| amp * (fx * x + fy * y + phase).sin())
            .sum::<f64>()
            / norm
    }
}

fn plane(
    kind: SyntheticKind,
    width: usize,
    height: usize,
    max: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<u16> {
    let mut out = Vec::with_capacity(width * height);
    match kind {
        SyntheticKind::Gradient => {
            let (ax, ay) = (rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7));
            let span = (ax * width as f64 + ay * height as f64).max(1.0);
            for y in 0..height {
                for x in 0..width {
                    out.push(quantize((ax * x as f64 + ay * y as f64) / span, max));
                }
            }
        }
        SyntheticKind::Noise => {
            let top = max as u16;
            out.extend((0..width * height).map(|_| rng.gen_range(0..=top)));
        }
        SyntheticKind::Constant => {
            let v = quantize(rng.gen_range(0.1..0.9), max);
            out.resize(width * height, v);
        }
        SyntheticKind::Checkerboard => {
            let cell = rng.gen_range(1..=8usize);
            let (lo, hi) = (quantize(0.1, max), quantize(0.9, max));
            for y in 0..height {
                for x in 0..width {
                    out.push(if (x / cell + y / cell) % 2 == 0 {
                        lo
                    } else {
                        hi
                    });
                }
            }
        }
        SyntheticKind::TextLike => {
            // Dark strokes on a light page, laid out as lines of glyph cells.
            let (page, ink) = (quantize(0.92, max), quantize(0.08, max));
            out.resize(width * height, page);
            let (cell_w, cell_h) = (6usize, 10usize);
            for row in 0..height / cell_h {
                for col in 0..width / cell_w {
                    if rng.gen_bool(0.15) {
                        continue;
                    }
                    let (x0, y0) = (col * cell_w + 1, row * cell_h + 2);
                    for _ in 0..rng.gen_range(2..5) {
                        let vertical = rng.gen_bool(0.5);
                        let (sx, sy) = (rng.gen_range(0..4), rng.gen_range(0..6));
                        let len = rng.gen_range(2..6);
                        for t in 0..len {
                            let (x, y) = if vertical {
                                (x0 + sx, y0 + sy + t)
                            } else {
                                (x0 + sx + t, y0 + sy)
                            };
                            if x < width
                                && y < height
                                && x < (col + 1) * cell_w
                                && y < (row + 1) * cell_h
                            {
                                out[y * width + x] = ink;
                            }
                        }
                    }
                }
            }
        }
        SyntheticKind::Natural => {
            // Smooth shading, a few soft-edged objects and mild sensor noise.
            let scale = 64.0 / width.max(height) as f64;
            let shading = Waves::new(rng, 6, 0.08 * scale.max(0.25));
            let texture = Waves::new(rng, 4, 0.9);
            let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
                .map(|_| {
                    (
                        rng.gen_range(0.0..width as f64),
                        rng.gen_range(0.0..height as f64),
                        rng.gen_range(0.05..0.25) * width.min(height) as f64,
                        rng.gen_range(-0.3..0.3),
                    )
                })
                .collect();
            for y in 0..height {
                for x in 0..width {
                    let (fx, fy) = (x as f64, y as f64);
                    let mut v = 0.5 + 0.25 * shading.at(fx, fy) + 0.03 * texture.at(fx, fy);
                    for &(cx, cy, r, level) in &blobs {
                        let d = ((fx - cx).powi(2) + (fy - cy).powi(2)).sqrt();
                        v += level / (1.0 + ((d - r) / 1.5).exp());
                    }
                    v += rng.gen_range(-0.01..0.01);
                    out.push(quantize(v, max));
                }
            }
        }
    }
    out
}

pub fn synthetic(
    kind: SyntheticKind,
    width: usize,
    height: usize,
    bit_depth: u8,
    components: usize,
    seed: u64,
) -> Result<PlanarImage> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroArea);
    }
    if !(8..=16).contains(&bit_depth) {
        return Err(Error::InvalidImage(format!("bit depth {bit_depth}")));
    }
    let max = f64::from((1u32 << bit_depth) - 1);
    let planes = (0..components)
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((kind as u64) << 32) ^ c as u64);
            plane(kind, width, height, max, &mut rng)
        })
        .collect();
    PlanarImage::new(width, height, bit_depth, planes)
}

/// One grayscale image of every kind.
pub fn synthetic_set(
    width: usize,
    height: usize,
    bit_depth: u8,
    seed: u64,
) -> Result<Vec<(SyntheticKind, PlanarImage)>> {
    SyntheticKind::ALL
        .into_iter()
        .map(|kind| Ok((kind, synthetic(kind, width, height, bit_depth, 1, seed)?)))
        .collect()
}
