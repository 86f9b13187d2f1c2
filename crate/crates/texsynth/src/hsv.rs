use partsynth_core::texture::TextureMap;
use rayon::prelude::*;

fn rgb_to_hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta <= 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max > 0.0 { delta / max } else { 0.0 };
    [h, s, max]
}

fn hsv_to_rgb([h, s, v]: [f64; 3]) -> [f64; 3] {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

/// Shifts hue by `dh` degrees and saturation/value by `ds`/`dv` (clamped to
/// [0, 1]) on the stored color values. Alpha passes through unchanged.
///
/// # Panics
/// If the map has fewer than three channels.
pub fn hsv_shift(map: &TextureMap, dh: f64, ds: f64, dv: f64) -> TextureMap {
    assert!(map.channels() >= 3, "hsv_shift needs an RGB map");
    if dh == 0.0 && ds == 0.0 && dv == 0.0 {
        return map.clone();
    }
    let channels = map.channels();
    let mut out = map.clone();
    out.data_mut().par_chunks_mut(channels).for_each(|t| {
        let [h, s, v] = rgb_to_hsv([t[0] as f64, t[1] as f64, t[2] as f64]);
        let rgb = hsv_to_rgb([(h + dh).rem_euclid(360.0), (s + ds).clamp(0.0, 1.0), (v + dv).clamp(0.0, 1.0)]);
        for k in 0..3 {
            t[k] = rgb[k].clamp(0.0, 1.0) as f32;
        }
    });
    out
}
