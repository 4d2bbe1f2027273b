use super::PlanarImage;
use crate::error::{Error, Result};

/// One point on a rate–distortion curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `f64::INFINITY` exactly when the images are identical.
    pub psnr_db: f64,
    pub bpp: f64,
    pub byte_count: usize,
}

impl Metrics {
    pub fn measure(
        original: &PlanarImage,
        decoded: &PlanarImage,
        byte_count: usize,
    ) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(original, decoded)?,
            bpp: bits_per_pixel(byte_count, original.width(), original.height())?,
            byte_count,
        })
    }
}

/// Mean squared error over every sample of every component.
pub fn mse(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    a.check_same_shape(b)?;
    let mut sum: u128 = 0;
    for (pa, pb) in a.planes().iter().zip(b.planes()) {
        sum += pa
            .iter()
            .zip(pb)
            .map(|(&x, &y)| {
                let d = i64::from(x) - i64::from(y);
                (d * d) as u128
            })
            .sum::<u128>();
    }
    Ok(sum as f64 / (a.pixel_count() * a.components()) as f64)
}

/// PSNR with peak `2^N - 1`, MSE aggregated over all components.
pub fn psnr(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = f64::from(a.max_value());
    Ok(10.0 * (peak * peak / mse).log10())
}

pub fn bits_per_pixel(byte_count: usize, width: usize, height: usize) -> Result<f64> {
    let pixels = width
        .checked_mul(height)
        .filter(|&p| p > 0)
        .ok_or(Error::ZeroArea)?;
    Ok(8.0 * byte_count as f64 / pixels as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_images_are_infinite() {
        let img = PlanarImage::filled(4, 4, 3, 10, 100).unwrap();
        assert_eq!(psnr(&img, &img).unwrap(), f64::INFINITY);
    }

    #[test]
    fn maximal_error_is_zero_db() {
        let a = PlanarImage::filled(5, 3, 1, 8, 0).unwrap();
        let b = PlanarImage::filled(5, 3, 1, 8, 255).unwrap();
        assert_eq!(psnr(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn matches_scalar_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pa: Vec<u16> = (0..64).map(|_| rng.gen_range(0..=255)).collect();
            let pb: Vec<u16> = (0..64).map(|_| rng.gen_range(0..=255)).collect();
            let mut acc = 0.0f64;
            for i in 0..64 {
                let d = pa[i] as f64 - pb[i] as f64;
                acc += d * d;
            }
            let oracle = 10.0 * (255.0f64 * 255.0 / (acc / 64.0)).log10();
            let a = PlanarImage::new(8, 8, 8, vec![pa]).unwrap();
            let b = PlanarImage::new(8, 8, 8, vec![pb]).unwrap();
            assert!((psnr(&a, &b).unwrap() - oracle).abs() < 1e-9);
            assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        }
    }

    #[test]
    fn growing_error_never_raises_psnr() {
        let b = PlanarImage::filled(4, 4, 1, 8, 128).unwrap();
        let mut last = f64::INFINITY;
        for err in 0..=127u16 {
            let mut plane = vec![128u16; 16];
            plane[5] = 128 + err;
            let a = PlanarImage::new(4, 4, 8, vec![plane]).unwrap();
            let p = psnr(&a, &b).unwrap();
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = PlanarImage::filled(4, 4, 1, 8, 0).unwrap();
        let b = PlanarImage::filled(4, 4, 1, 10, 0).unwrap();
        assert!(matches!(psnr(&a, &b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn bpp_arithmetic() {
        assert_eq!(bits_per_pixel(100, 10, 10).unwrap(), 8.0);
        assert_eq!(bits_per_pixel(0, 10, 10).unwrap(), 0.0);
        assert_eq!(bits_per_pixel(3000, 100, 60).unwrap(), 4.0);
        assert!(matches!(bits_per_pixel(10, 0, 10), Err(Error::ZeroArea)));
    }
}
