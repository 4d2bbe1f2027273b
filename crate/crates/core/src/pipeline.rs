//! Two-layer encode and decode, and rate sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::base::{decode_base, encode_base, BaseConfig};
use crate::container::{demux, mux, ContainerMeta, HEADER_LEN};
use crate::error::{Error, Result};
use crate::image::{psnr, PlanarImage};
use crate::residual::{
    add_residual, compute_residual, dc_shift, dc_unshift, decode_extension, encode_extension,
    LosslessCoderId, ResidualPlane,
};

/// Output of [`encode_two_layer`].
#[derive(Debug, Clone)]
pub struct Encoded {
    pub file: Vec<u8>,
    pub base_len: usize,
    pub ext_len: usize,
    /// The encoder's own decode of the base layer.
    pub base_image: Option<PlanarImage>,
    /// Quantizer scale chosen by rate control.
    pub base_scale: Option<u32>,
    pub base_overshoot: bool,
}

impl Encoded {
    pub fn overhead_len(&self) -> usize {
        HEADER_LEN
    }
}

/// Output of [`decode_two_layer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub image: PlanarImage,
    /// False when the file carried no extension and `image` is the base.
    pub lossless: bool,
}

/// Codes `image` as a base layer plus a lossless extension. Without a base
/// configuration the image is coded losslessly on its own.
pub fn encode_two_layer(
    image: &PlanarImage,
    base: Option<&BaseConfig>,
    coder: LosslessCoderId,
) -> Result<Encoded> {
    let meta = ContainerMeta {
        width: image.width(),
        height: image.height(),
        components: image.components(),
        bit_depth: image.bit_depth(),
        coder: Some(coder),
    };
    let Some(config) = base else {
        let planes: Vec<ResidualPlane> = (0..image.components())
            .map(|c| ResidualPlane::from_image_plane(image, c))
            .collect();
        let ext = encode_extension(&planes, coder)?;
        return Ok(Encoded {
            file: mux(&[], &ext, &meta)?,
            base_len: 0,
            ext_len: ext.len(),
            base_image: None,
            base_scale: None,
            base_overshoot: false,
        });
    };

    let stream = encode_base(image, config)?;
    let base_image = decode_base(stream.bytes())?;
    let shifted = compute_residual(image, &base_image)?
        .iter()
        .map(|r| dc_shift(r, image.bit_depth()))
        .collect::<Result<Vec<_>>>()?;
    let ext = encode_extension(&shifted, coder)?;
    Ok(Encoded {
        file: mux(stream.bytes(), &ext, &meta)?,
        base_len: stream.bytes().len(),
        ext_len: ext.len(),
        base_image: Some(base_image),
        base_scale: stream.scale(),
        base_overshoot: stream.overshoot(),
    })
}

pub fn decode_two_layer(file: &[u8]) -> Result<Decoded> {
    let layered = demux(file)?;
    let meta = layered.meta;
    let base_image = if layered.has_base() {
        let img = decode_base(layered.base)?;
        if (img.width(), img.height(), img.components(), img.bit_depth())
            != (meta.width, meta.height, meta.components, meta.bit_depth)
        {
            return Err(Error::InconsistentMeta(
                "base layer describes a different image".into(),
            ));
        }
        Some(img)
    } else {
        None
    };
    if !layered.has_extension() {
        let image = base_image.ok_or(Error::MissingBaseLayer)?;
        return Ok(Decoded {
            image,
            lossless: false,
        });
    }

    let ext = decode_extension(layered.extension, meta.width, meta.height, meta.components)?;
    if Some(ext.coder) != meta.coder || ext.depth != meta.extension_depth(base_image.is_some()) {
        return Err(Error::InconsistentMeta(
            "extension header disagrees with the container".into(),
        ));
    }
    let image = match base_image {
        Some(base) => {
            let residuals = ext
                .planes
                .iter()
                .map(|p| dc_unshift(p, meta.bit_depth))
                .collect::<Result<Vec<_>>>()?;
            add_residual(&base, &residuals)?
        }
        None => {
            let planes = ext
                .planes
                .into_iter()
                .map(|p| p.into_samples().into_iter().map(|s| s as u16).collect())
                .collect();
            PlanarImage::new(meta.width, meta.height, meta.bit_depth, planes)?
        }
    };
    Ok(Decoded {
        image,
        lossless: true,
    })
}

/// One point of a rate sweep. Byte counts are exact; rates derive from them.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub coder: LosslessCoderId,
    /// 0 means no base layer.
    pub target_bpp: f64,
    pub base_bpp: f64,
    /// `None` without a base layer.
    pub base_psnr: Option<f64>,
    pub ext_bpp: f64,
    pub overhead_bpp: f64,
    pub total_bpp: f64,
    pub lossless: bool,
    pub base_bytes: usize,
    pub ext_bytes: usize,
    pub overhead_bytes: usize,
    pub total_bytes: usize,
}

pub const CSV_HEADER: &str =
    "coder,target_bpp,base_bpp,base_psnr,ext_bpp,overhead_bpp,total_bpp,lossless";

fn fmt4(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.coder,
            fmt4(self.target_bpp),
            fmt4(self.base_bpp),
            self.base_psnr.map_or(String::new(), fmt4),
            fmt4(self.ext_bpp),
            fmt4(self.overhead_bpp),
            fmt4(self.total_bpp),
            self.lossless
        )
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.csv_line());
    }
    out
}

fn bench_point(
    image: &PlanarImage,
    template: &BaseConfig,
    target: f64,
    coder: LosslessCoderId,
) -> Result<BenchRow> {
    let config = (target > 0.0).then_some(BaseConfig {
        target: crate::base::BaseTarget::Bpp(target),
        ..*template
    });
    let encoded = encode_two_layer(image, config.as_ref(), coder)?;
    let decoded = decode_two_layer(&encoded.file)?;
    let base_psnr = encoded
        .base_image
        .as_ref()
        .map(|b| psnr(image, b))
        .transpose()?;
    let bpp = |bytes: usize| (bytes * 8) as f64 / image.pixel_count() as f64;
    let total_bytes = encoded.file.len();
    Ok(BenchRow {
        coder,
        target_bpp: target,
        base_bpp: bpp(encoded.base_len),
        base_psnr,
        ext_bpp: bpp(encoded.ext_len),
        overhead_bpp: bpp(encoded.overhead_len()),
        total_bpp: bpp(total_bytes),
        lossless: decoded.lossless && decoded.image == *image,
        base_bytes: encoded.base_len,
        ext_bytes: encoded.ext_len,
        overhead_bytes: encoded.overhead_len(),
        total_bytes,
    })
}

/// Encodes and decodes `image` at every grid point with every coder. The
/// grid must contain 0, the point without a base layer. Rows are sorted by
/// coder, then target.
pub fn bench_sweep(
    image: &PlanarImage,
    grid: &[f64],
    coders: &[LosslessCoderId],
    template: &BaseConfig,
) -> Result<Vec<BenchRow>> {
    if grid.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(Error::InvalidConfig(
            "grid points must be finite and non-negative".into(),
        ));
    }
    if !grid.contains(&0.0) {
        return Err(Error::InvalidConfig("grid must contain 0".into()));
    }
    if coders.is_empty() {
        return Err(Error::InvalidConfig("no coders selected".into()));
    }
    template.validate()?;
    let mut points: Vec<(LosslessCoderId, f64)> = coders
        .iter()
        .flat_map(|&c| grid.iter().map(move |&b| (c, b)))
        .collect();
    points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points.dedup();
    points
        .par_iter()
        .map(|&(coder, target)| bench_point(image, template, target, coder))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthetic, SyntheticKind};

    #[test]
    fn round_trip_with_and_without_base() {
        let img = synthetic(SyntheticKind::Natural, 48, 40, 10, 3, 1).unwrap();
        for coder in LosslessCoderId::ALL {
            for config in [
                None,
                Some(BaseConfig::with_bpp(1.0)),
                Some(BaseConfig::lossless()),
            ] {
                let enc = encode_two_layer(&img, config.as_ref(), coder).unwrap();
                let dec = decode_two_layer(&enc.file).unwrap();
                assert!(dec.lossless);
                assert_eq!(dec.image, img);
                assert_eq!(enc.file.len(), HEADER_LEN + enc.base_len + enc.ext_len);
            }
        }
    }

    #[test]
    fn base_only_file_is_lossy() {
        let img = synthetic(SyntheticKind::Gradient, 32, 32, 8, 1, 1).unwrap();
        let enc = encode_two_layer(
            &img,
            Some(&BaseConfig::with_bpp(1.0)),
            LosslessCoderId::Predictive,
        )
        .unwrap();
        let layered = demux(&enc.file).unwrap();
        let meta = ContainerMeta {
            coder: None,
            ..layered.meta
        };
        let file = mux(layered.base, &[], &meta).unwrap();
        let dec = decode_two_layer(&file).unwrap();
        assert!(!dec.lossless);
        assert_eq!(Some(dec.image), enc.base_image);
    }

    #[test]
    fn sweep_rows_are_sorted_and_accounted() {
        let img = synthetic(SyntheticKind::Natural, 64, 64, 8, 1, 2).unwrap();
        let rows = bench_sweep(
            &img,
            &[2.0, 0.0, 1.0],
            &LosslessCoderId::ALL,
            &BaseConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 6);
        let keys: Vec<_> = rows.iter().map(|r| (r.coder, r.target_bpp)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        assert_eq!(keys, sorted);
        for r in &rows {
            assert!(r.lossless);
            assert_eq!(r.total_bytes, r.base_bytes + r.ext_bytes + r.overhead_bytes);
            assert_eq!(r.base_psnr.is_none(), r.target_bpp == 0.0);
        }
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("predictive,0.0000,0.0000,,"));
    }

    #[test]
    fn sweep_needs_zero_point() {
        let img = synthetic(SyntheticKind::Constant, 8, 8, 8, 1, 0).unwrap();
        let coders = [LosslessCoderId::Predictive];
        assert!(bench_sweep(&img, &[1.0], &coders, &BaseConfig::default()).is_err());
        assert!(bench_sweep(&img, &[0.0, -1.0], &coders, &BaseConfig::default()).is_err());
        assert!(bench_sweep(&img, &[0.0], &[], &BaseConfig::default()).is_err());
        assert_eq!(
            bench_sweep(&img, &[0.0], &coders, &BaseConfig::default())
                .unwrap()
                .len(),
            1
        );
    }
}
