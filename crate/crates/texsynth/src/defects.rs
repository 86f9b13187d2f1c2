//! Noise-driven surface imperfections.
//!
//! Every operator returns a modified copy; inputs are never mutated. An
//! operator whose mask, count or strength is zero returns a texel-exact copy.

use std::f64::consts::FRAC_PI_4;

use partsynth_core::material::MaterialMaps;
use partsynth_core::rng::RandomStream;
use partsynth_core::texture::{linear_to_srgb, ColorSpace, TextureMap, Wrap};
use rayon::prelude::*;

use crate::noise::{Fbm, NoiseParams};

/// Width of the smooth transition around the mask threshold.
pub const MASK_BAND: f64 = 0.05;
const RUST_ROUGHNESS: f32 = 0.95;
const SCRATCH_ROUGHNESS: f32 = 0.9;
/// Normal tilt at full scratch depth.
const SCRATCH_MAX_TILT: f64 = FRAC_PI_4;

fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[inline]
fn lerp(a: f32, b: f32, t: f32) -> f32 {
    let (a, b, t) = (a as f64, b as f64, t as f64);
    (a * (1.0 - t) + b * t) as f32
}

/// Single-channel mask marking where a defect appears: 0 below the
/// threshold, 1 above, with a smoothstep band of width [`MASK_BAND`].
pub fn defect_mask(width: u32, height: u32, params: &NoiseParams) -> TextureMap {
    let noise = Fbm::new(*params);
    let mut data = vec![0.0f32; width as usize * height as usize];
    data.par_chunks_mut(width as usize).enumerate().for_each(|(y, row)| {
        let v = (y as f64 + 0.5) / height as f64;
        for (x, out) in row.iter_mut().enumerate() {
            let u = (x as f64 + 0.5) / width as f64;
            let n = noise.sample(u, v);
            *out = smoothstep(-0.5 * MASK_BAND, 0.5 * MASK_BAND, n - params.threshold) as f32;
        }
    });
    TextureMap::new(width, height, 1, data, ColorSpace::Linear, Wrap::Repeat).expect("mask shape")
}

/// Color of a linear RGB value in `space`.
fn encode(rgb: [f64; 3], space: ColorSpace) -> [f32; 3] {
    let c = rgb.map(|v| v as f32);
    match space {
        ColorSpace::Linear => c,
        ColorSpace::Srgb => c.map(linear_to_srgb),
    }
}

/// Blends rust into the material wherever `mask > 0`.
///
/// Albedo moves toward a rust color chosen between `color_a` and
/// `color_b` by `color_noise`; roughness moves toward 0.95 and metallic
/// toward 0, all weighted by the mask value. Normals are left untouched.
pub fn apply_rust(
    mat: &MaterialMaps,
    mask: &TextureMap,
    color_a: [f64; 3],
    color_b: [f64; 3],
    color_noise: &NoiseParams,
) -> MaterialMaps {
    if mask.data().iter().all(|&m| m <= 0.0) {
        return mat.clone();
    }
    let (w, h) = mat.albedo.dimensions();
    let mask = mask.resized(w, h);
    let mut out = mat.clone();
    out.roughness = mat.roughness.resized(w, h);
    out.metallic = mat.metallic.resized(w, h);
    let space = mat.albedo.color_space;
    let noise = Fbm::new(*color_noise);
    let channels = out.albedo.channels();

    let albedo = out.albedo.data_mut();
    albedo
        .par_chunks_mut(w as usize * channels)
        .enumerate()
        .for_each(|(y, row)| {
            let v = (y as f64 + 0.5) / h as f64;
            for x in 0..w as usize {
                let m = mask.texel(x as u32, y as u32)[0];
                if m <= 0.0 {
                    continue;
                }
                let u = (x as f64 + 0.5) / w as f64;
                let t = 0.5 * (noise.sample(u, v) + 1.0);
                let rust = encode(
                    [0, 1, 2].map(|k| color_a[k] * (1.0 - t) + color_b[k] * t),
                    space,
                );
                let texel = &mut row[x * channels..x * channels + 3];
                for (c, r) in texel.iter_mut().zip(rust) {
                    *c = lerp(*c, r, m);
                }
            }
        });
    for (i, m) in mask.data().iter().enumerate() {
        if *m > 0.0 {
            let r = &mut out.roughness.data_mut()[i];
            *r = lerp(*r, RUST_ROUGHNESS, *m);
            let k = &mut out.metallic.data_mut()[i];
            *k = lerp(*k, 0.0, *m);
        }
    }
    out
}

/// A straight scratch in UV space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scratch {
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Full width in albedo pixels.
    pub width_px: f64,
    /// Darkening factor and tilt scale in [0, 1].
    pub depth: f64,
}

/// Draws `count` random scratches and applies them.
///
/// Segments start uniformly in UV space with a uniform direction and a
/// length uniform in [0.05, 0.5] UV units.
pub fn apply_scratches(
    mat: &MaterialMaps,
    count: u32,
    width_px_range: [f64; 2],
    depth_range: [f64; 2],
    rng: &mut RandomStream,
) -> MaterialMaps {
    let scratches: Vec<Scratch> = (0..count)
        .map(|_| {
            let start = [rng.next_f64(), rng.next_f64()];
            let angle = rng.uniform(0.0, std::f64::consts::TAU);
            let len = rng.uniform(0.05, 0.5);
            let width_px = rng.uniform_range(width_px_range);
            let depth = rng.uniform_range(depth_range);
            Scratch {
                start,
                end: [start[0] + len * angle.cos(), start[1] + len * angle.sin()],
                width_px,
                depth,
            }
        })
        .collect();
    apply_scratch_segments(mat, &scratches)
}

/// Rasterizes anti-aliased scratches into the albedo, roughness and normal
/// maps. Segments wrap around the map edges when the albedo wraps.
pub fn apply_scratch_segments(mat: &MaterialMaps, scratches: &[Scratch]) -> MaterialMaps {
    if scratches.is_empty() {
        return mat.clone();
    }
    let (w, h) = mat.albedo.dimensions();
    let mut out = mat.clone();
    out.roughness = mat.roughness.resized(w, h);
    out.normal = mat.normal.resized(w, h);
    let repeat = mat.albedo.wrap == Wrap::Repeat;

    for s in scratches {
        let (coverage, tilt) = rasterize_segment(s, w, h, repeat);
        let ac = out.albedo.channels();
        let nc = out.normal.channels();
        for (i, (&cov, &t)) in coverage.iter().zip(&tilt).enumerate() {
            if cov <= 0.0 {
                continue;
            }
            let darken = (1.0 - s.depth * cov as f64) as f32;
            for c in &mut out.albedo.data_mut()[i * ac..i * ac + 3] {
                *c *= darken;
            }
            let r = &mut out.roughness.data_mut()[i];
            *r = lerp(*r, SCRATCH_ROUGHNESS, cov);

            let angle = s.depth * cov as f64 * SCRATCH_MAX_TILT;
            let n = &mut out.normal.data_mut()[i * nc..i * nc + 3];
            let mut v = [0, 1, 2].map(|k| 2.0 * n[k] as f64 - 1.0);
            let k = angle.tan();
            v[0] += k * t[0];
            v[1] += k * t[1];
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            for k in 0..3 {
                n[k] = (0.5 * v[k] / len + 0.5).clamp(0.0, 1.0) as f32;
            }
        }
    }
    out
}

/// Per-texel coverage in [0, 1] and in-plane tilt direction (toward the
/// scratch center line) for one segment.
fn rasterize_segment(s: &Scratch, w: u32, h: u32, repeat: bool) -> (Vec<f32>, Vec<[f64; 2]>) {
    let n = w as usize * h as usize;
    let mut coverage = vec![0.0f32; n];
    let mut tilt = vec![[0.0f64; 2]; n];
    let p0 = [s.start[0] * w as f64, s.start[1] * h as f64];
    let p1 = [s.end[0] * w as f64, s.end[1] * h as f64];
    let half = 0.5 * s.width_px.max(0.0);
    let reach = half + 0.5;
    let d = [p1[0] - p0[0], p1[1] - p0[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];

    let x_lo = (p0[0].min(p1[0]) - reach).floor() as i64;
    let x_hi = (p0[0].max(p1[0]) + reach).ceil() as i64;
    let y_lo = (p0[1].min(p1[1]) - reach).floor() as i64;
    let y_hi = (p0[1].max(p1[1]) + reach).ceil() as i64;
    for py in y_lo..=y_hi {
        for px in x_lo..=x_hi {
            let (x, y) = if repeat {
                (px.rem_euclid(w as i64), py.rem_euclid(h as i64))
            } else if px < 0 || py < 0 || px >= w as i64 || py >= h as i64 {
                continue;
            } else {
                (px, py)
            };
            let c = [px as f64 + 0.5, py as f64 + 0.5];
            let t = if len2 > 0.0 {
                (((c[0] - p0[0]) * d[0] + (c[1] - p0[1]) * d[1]) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let closest = [p0[0] + t * d[0], p0[1] + t * d[1]];
            let off = [c[0] - closest[0], c[1] - closest[1]];
            let dist = (off[0] * off[0] + off[1] * off[1]).sqrt();
            let cov = (reach - dist).clamp(0.0, 1.0) as f32;
            let i = y as usize * w as usize + x as usize;
            if cov > coverage[i] {
                coverage[i] = cov;
                tilt[i] = if dist > 0.0 { [-off[0] / dist, -off[1] / dist] } else { [0.0, 0.0] };
            }
        }
    }
    (coverage, tilt)
}

/// Streaky roughness variation along `direction` (radians in UV space).
///
/// Noise coordinates are rotated into the streak frame and the across-
/// streak axis is scaled by `anisotropy`, so features stretch along the
/// direction. Roughness changes by `strength · fbm` and is clamped to [0, 1].
pub fn apply_polish_lines(
    mat: &MaterialMaps,
    direction: f64,
    anisotropy: f64,
    params: &NoiseParams,
    strength: f64,
) -> MaterialMaps {
    if strength == 0.0 {
        return mat.clone();
    }
    let anisotropy = anisotropy.max(1.0);
    let (w, h) = mat.albedo.dimensions();
    let mut out = mat.clone();
    out.roughness = mat.roughness.resized(w, h);
    let noise = Fbm::new(*params);
    let (sd, cd) = direction.sin_cos();
    out.roughness
        .data_mut()
        .par_chunks_mut(w as usize)
        .enumerate()
        .for_each(|(y, row)| {
            let v = (y as f64 + 0.5) / h as f64;
            for (x, r) in row.iter_mut().enumerate() {
                let u = (x as f64 + 0.5) / w as f64;
                let along = u * cd + v * sd;
                let across = -u * sd + v * cd;
                let delta = strength * noise.sample(along, across * anisotropy);
                *r = (*r as f64 + delta).clamp(0.0, 1.0) as f32;
            }
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::fbm;
    use partsynth_core::texture::srgb_to_linear;

    fn textured(w: u32, h: u32) -> MaterialMaps {
        let mut m = MaterialMaps::uniform([0.5; 3], 0.4, 0.8);
        m.albedo = TextureMap::from_fn(w, h, 3, ColorSpace::Srgb, |x, y, o| {
            o.copy_from_slice(&[x as f32 / w as f32, y as f32 / h as f32, 0.5])
        });
        m.roughness = TextureMap::filled(w, h, &[0.4], ColorSpace::Linear);
        m.metallic = TextureMap::filled(w, h, &[0.8], ColorSpace::Linear);
        m.normal = TextureMap::filled(w, h, &[0.5, 0.5, 1.0], ColorSpace::Linear);
        m
    }

    #[test]
    fn mask_extremes() {
        let p = NoiseParams { threshold: 1.1, ..Default::default() };
        assert!(defect_mask(32, 32, &p).data().iter().all(|&v| v == 0.0));
        let p = NoiseParams { threshold: -1.1, ..Default::default() };
        assert!(defect_mask(32, 32, &p).data().iter().all(|&v| v == 1.0));
    }

    /// Coverage fraction vs. a brute-force count of `fbm > threshold`.
    #[test]
    fn mask_coverage_matches_pixel_count() {
        let p = NoiseParams { seed: 3, threshold: 0.0, ..Default::default() };
        let mask = defect_mask(256, 256, &p);
        let coverage = mask.data().iter().map(|&v| v as f64).sum::<f64>() / 65536.0;
        let mut above = 0;
        for y in 0..256 {
            for x in 0..256 {
                if fbm((x as f64 + 0.5) / 256.0, (y as f64 + 0.5) / 256.0, &p) > 0.0 {
                    above += 1;
                }
            }
        }
        assert!((coverage - above as f64 / 65536.0).abs() <= 0.01);
    }

    #[test]
    fn rust_zero_mask_identity() {
        let m = textured(16, 16);
        let mask = TextureMap::filled(16, 16, &[0.0], ColorSpace::Linear);
        let out = apply_rust(&m, &mask, [0.4, 0.1, 0.0], [0.2, 0.05, 0.0], &NoiseParams::default());
        assert_eq!(out, m);
    }

    #[test]
    fn rust_full_mask_saturates() {
        let m = textured(16, 16);
        let mask = TextureMap::filled(16, 16, &[1.0], ColorSpace::Linear);
        let c = [0.3, 0.1, 0.02];
        let out = apply_rust(&m, &mask, c, c, &NoiseParams::default());
        for t in out.albedo.data().chunks(3) {
            for k in 0..3 {
                assert!((srgb_to_linear(t[k]) as f64 - c[k]).abs() < 1e-5);
            }
        }
        assert!(out.roughness.data().iter().all(|&r| r == 0.95));
        assert!(out.metallic.data().iter().all(|&r| r == 0.0));
        assert_eq!(out.normal, m.normal);
    }

    /// Per-pixel diff: only the masked half may change.
    #[test]
    fn rust_half_plane_mask() {
        let m = textured(16, 16);
        let mask = TextureMap::from_fn(16, 16, 1, ColorSpace::Linear, |x, _, o| o[0] = if x < 8 { 1.0 } else { 0.0 });
        let out = apply_rust(&m, &mask, [0.4, 0.1, 0.0], [0.2, 0.05, 0.0], &NoiseParams::default());
        for y in 0..16 {
            for x in 0..16 {
                let changed = out.albedo.texel(x, y) != m.albedo.texel(x, y);
                assert_eq!(changed, x < 8, "({x}, {y})");
                assert_eq!(out.roughness.texel(x, y) != m.roughness.texel(x, y), x < 8);
            }
        }
    }

    #[test]
    fn scratches_zero_count_identity() {
        let m = textured(16, 16);
        let mut rng = RandomStream::new(1);
        assert_eq!(apply_scratches(&m, 0, [1.0, 3.0], [0.2, 0.5], &mut rng), m);
    }

    /// Changed rows of a full-width horizontal 3 px scratch stay within a 5 px band.
    #[test]
    fn horizontal_scratch_band() {
        let m = textured(64, 64);
        let s = Scratch {
            start: [0.0, 0.5],
            end: [1.0, 0.5],
            width_px: 3.0,
            depth: 0.5,
        };
        let out = apply_scratch_segments(&m, &[s]);
        let mut rows = Vec::new();
        for y in 0..64 {
            if (0..64).any(|x| out.albedo.texel(x, y) != m.albedo.texel(x, y)) {
                rows.push(y);
            }
        }
        assert!(!rows.is_empty());
        assert!(rows.last().unwrap() - rows.first().unwrap() + 1 <= 5, "{rows:?}");
        // Every column is touched.
        assert!((0..64).all(|x| out.albedo.texel(x, 32) != m.albedo.texel(x, 32)));
    }

    #[test]
    fn scratches_deterministic() {
        let m = textured(32, 32);
        let a = apply_scratches(&m, 4, [1.0, 4.0], [0.2, 0.6], &mut RandomStream::new(9));
        let b = apply_scratches(&m, 4, [1.0, 4.0], [0.2, 0.6], &mut RandomStream::new(9));
        assert_eq!(a, b);
        assert_ne!(a, m);
        for n in a.normal.data().chunks(3) {
            let v = n.iter().map(|c| (2.0 * c - 1.0) as f64).collect::<Vec<_>>();
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((len - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn polish_zero_strength_identity() {
        let m = textured(16, 16);
        assert_eq!(apply_polish_lines(&m, 0.3, 4.0, &NoiseParams::default(), 0.0), m);
    }

    #[test]
    fn polish_isotropic_limit() {
        let m = textured(32, 32);
        let p = NoiseParams { seed: 5, ..Default::default() };
        let out = apply_polish_lines(&m, 0.0, 1.0, &p, 0.3);
        for y in 0..32 {
            for x in 0..32 {
                let (u, v) = ((x as f64 + 0.5) / 32.0, (y as f64 + 0.5) / 32.0);
                let expected = (0.4f32 as f64 + 0.3 * fbm(u, v, &p)).clamp(0.0, 1.0) as f32;
                assert_eq!(out.roughness.texel(x, y)[0], expected);
            }
        }
    }

    fn autocorrelation(delta: &[f64], w: usize, h: usize, dx: usize, dy: usize) -> f64 {
        let mean = delta.iter().sum::<f64>() / delta.len() as f64;
        let var = delta.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / delta.len() as f64;
        let mut acc = 0.0;
        let mut n = 0.0;
        for y in 0..h - dy {
            for x in 0..w - dx {
                acc += (delta[y * w + x] - mean) * (delta[(y + dy) * w + x + dx] - mean);
                n += 1.0;
            }
        }
        acc / n / var
    }

    #[test]
    fn polish_streaks_follow_direction() {
        let m = textured(128, 128);
        let p = NoiseParams { seed: 8, frequency: 6.0, ..Default::default() };
        let out = apply_polish_lines(&m, 0.0, 8.0, &p, 0.2);
        let delta: Vec<f64> = out
            .roughness
            .data()
            .iter()
            .zip(m.roughness.resized(128, 128).data())
            .map(|(a, b)| (*a - *b) as f64)
            .collect();
        let along = autocorrelation(&delta, 128, 128, 4, 0);
        let across = autocorrelation(&delta, 128, 128, 0, 4);
        assert!(along > across, "along {along} across {across}");
    }

    #[test]
    fn polish_clamps() {
        let m = textured(32, 32);
        let out = apply_polish_lines(&m, 1.0, 3.0, &NoiseParams::default(), 10.0);
        assert!(out.roughness.data().iter().all(|r| (0.0..=1.0).contains(r)));
    }
}
