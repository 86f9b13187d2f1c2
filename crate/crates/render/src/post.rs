use image::RgbImage;

use crate::brdf::luminance;
use crate::profile::{RenderProfile, Tonemap};

/// One linear radiance value to an 8-bit display triple: exposure and white
/// balance, optional Reinhard on luminance, gamma, round-half-up.
pub fn display_pixel(c: [f32; 3], profile: &RenderProfile) -> [u8; 3] {
    let scale = profile.exposure_ev.exp2();
    let mut v = [0, 1, 2].map(|k| c[k] as f64 * scale * profile.white_balance_gains[k]);
    if profile.tonemap == Tonemap::Reinhard {
        let l = luminance(&v);
        v = v.map(|x| x / (1.0 + l));
    }
    v.map(|x| {
        let g = x.clamp(0.0, 1.0).powf(1.0 / profile.gamma);
        (g * 255.0 + 0.5).floor() as u8
    })
}

pub fn post_process(radiance: &[[f32; 3]], width: u32, height: u32, profile: &RenderProfile) -> RgbImage {
    assert_eq!(radiance.len(), width as usize * height as usize, "radiance buffer size");
    let mut img = RgbImage::new(width, height);
    for (px, c) in img.pixels_mut().zip(radiance) {
        px.0 = display_pixel(*c, profile);
    }
    img
}
