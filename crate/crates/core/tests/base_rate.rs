use tlxs::base::{decode_base, encode_base, BaseConfig};
use tlxs::corpus::{lena, synthetic, SyntheticKind};
use tlxs::image::psnr;

#[test]
fn lena_meets_two_bpp_within_tolerance() {
    let img = lena();
    let stream = encode_base(&img, &BaseConfig::with_bpp(2.0)).unwrap();
    assert!(!stream.overshoot());
    assert!(stream.bpp() <= 2.0 * 1.02, "{}", stream.bpp());
}

#[test]
fn low_targets_are_reachable_on_lena() {
    let img = lena();
    for target in [0.1, 0.25, 0.5] {
        let stream = encode_base(&img, &BaseConfig::with_bpp(target)).unwrap();
        assert!(!stream.overshoot(), "{target}");
        assert!(stream.bpp() <= target * 1.02, "{target}: {}", stream.bpp());
    }
}

#[test]
fn psnr_is_monotone_and_bounded_on_natural_content() {
    let img = synthetic(SyntheticKind::Natural, 128, 128, 10, 1, 11).unwrap();
    let mut last = f64::NEG_INFINITY;
    for bpp in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let stream = encode_base(&img, &BaseConfig::with_bpp(bpp)).unwrap();
        let p = psnr(&img, &decode_base(stream.bytes()).unwrap()).unwrap();
        assert!(p >= last, "{bpp}: {p} < {last}");
        // Rate-controlled streams never become lossless.
        assert!(p.is_finite());
        last = p;
    }
}
