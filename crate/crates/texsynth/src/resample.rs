//! Exemplar resampling.
//!
//! The output is described by a source field: every output pixel holds an
//! integer coordinate into the exemplar. Initialization copies random
//! patches; each iteration lets every pixel adopt the source suggested by a
//! neighbor (shifted by the neighbor's offset) when that candidate's
//! neighborhood matches the current output better. Realized textures only
//! ever contain exemplar texels.

use std::collections::HashSet;
use std::sync::Arc;

use partsynth_core::material::MaterialMaps;
use partsynth_core::rng::RandomStream;
use partsynth_core::texture::TextureMap;
use rayon::prelude::*;

use crate::TexsynthError;

pub const DEFAULT_ITERATIONS: u32 = 15;
pub const DEFAULT_PATCH_SIZE: u32 = 32;
pub const DEFAULT_RADIUS: u32 = 8;

/// Neighborhood radius per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusSchedule {
    /// `max(1, round(radius0 · 2^(−i/3)))`: halves every three iterations.
    Geometric { radius0: u32 },
    Fixed(u32),
}

impl RadiusSchedule {
    pub fn radius_at(&self, iteration: u32) -> u32 {
        match *self {
            RadiusSchedule::Geometric { radius0 } => {
                let r = (radius0 as f64 * (-(iteration as f64) / 3.0).exp2()).round();
                (r as u32).max(1)
            }
            RadiusSchedule::Fixed(r) => r.max(1),
        }
    }
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        RadiusSchedule::Geometric { radius0: DEFAULT_RADIUS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResampleConfig {
    pub iterations: u32,
    pub patch_size: u32,
    pub schedule: RadiusSchedule,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            patch_size: DEFAULT_PATCH_SIZE,
            schedule: RadiusSchedule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResampleState {
    pub exemplar: Arc<TextureMap>,
    pub width: u32,
    pub height: u32,
    /// Row-major `[x, y]` exemplar coordinates, one per output pixel.
    pub source: Vec<[u32; 2]>,
    pub iteration: u32,
    /// Radius used by the next iteration.
    pub radius: u32,
    pub schedule: RadiusSchedule,
}

/// First three channels of every exemplar texel (a single channel is
/// replicated).
fn exemplar_colors(ex: &TextureMap) -> Vec<[f32; 3]> {
    ex.data()
        .chunks(ex.channels())
        .map(|t| match t.len() {
            1 | 2 => [t[0]; 3],
            _ => [t[0], t[1], t[2]],
        })
        .collect()
}

#[inline]
fn wrap(v: i64, n: u32) -> u32 {
    v.rem_euclid(n as i64) as u32
}

/// Patch initialization with explicit per-block exemplar offsets, given in
/// row-major block order. Missing offsets default to `(0, 0)`.
pub fn resample_init_with_offsets(
    exemplar: Arc<TextureMap>,
    out_w: u32,
    out_h: u32,
    patch_size: u32,
    offsets: &[[u32; 2]],
    schedule: RadiusSchedule,
) -> Result<ResampleState, TexsynthError> {
    if exemplar.width() == 0 || exemplar.height() == 0 || out_w == 0 || out_h == 0 {
        return Err(TexsynthError::InvalidResample("empty exemplar or output".into()));
    }
    if patch_size == 0 {
        return Err(TexsynthError::InvalidResample("patch size must be at least 1".into()));
    }
    let (ew, eh) = exemplar.dimensions();
    let blocks_x = out_w.div_ceil(patch_size);
    let mut source = Vec::with_capacity(out_w as usize * out_h as usize);
    for y in 0..out_h {
        for x in 0..out_w {
            let block = (y / patch_size) * blocks_x + x / patch_size;
            let [ox, oy] = offsets.get(block as usize).copied().unwrap_or([0, 0]);
            source.push([
                wrap(ox as i64 + (x % patch_size) as i64, ew),
                wrap(oy as i64 + (y % patch_size) as i64, eh),
            ]);
        }
    }
    Ok(ResampleState {
        exemplar,
        width: out_w,
        height: out_h,
        source,
        iteration: 0,
        radius: schedule.radius_at(0),
        schedule,
    })
}

/// Tiles the output with `patch_size` blocks, each copied from a uniformly
/// random exemplar offset.
pub fn resample_init(
    exemplar: Arc<TextureMap>,
    out_w: u32,
    out_h: u32,
    patch_size: u32,
    schedule: RadiusSchedule,
    rng: &mut RandomStream,
) -> Result<ResampleState, TexsynthError> {
    let blocks = out_w.div_ceil(patch_size.max(1)) as usize * out_h.div_ceil(patch_size.max(1)) as usize;
    let (ew, eh) = exemplar.dimensions();
    let offsets: Vec<[u32; 2]> = (0..blocks)
        .map(|_| [rng.below(ew.max(1) as u64) as u32, rng.below(eh.max(1) as u64) as u32])
        .collect();
    resample_init_with_offsets(exemplar, out_w, out_h, patch_size, &offsets, schedule)
}

/// Read-only view of one state used while evaluating candidates.
struct Frame<'a> {
    ex: &'a [[f32; 3]],
    ew: u32,
    eh: u32,
    out: Vec<[f32; 3]>,
    w: u32,
    h: u32,
}

impl<'a> Frame<'a> {
    fn new(state: &ResampleState, ex: &'a [[f32; 3]]) -> Self {
        let ew = state.exemplar.width();
        let out = state
            .source
            .iter()
            .map(|&[sx, sy]| ex[(sy * ew + sx) as usize])
            .collect();
        Self {
            ex,
            ew,
            eh: state.exemplar.height(),
            out,
            w: state.width,
            h: state.height,
        }
    }

    /// Sum of squared RGB differences over the square neighborhood, in
    /// fixed (dy, dx, channel) order. Stops early once the partial sum
    /// reaches `bound`, returning the partial sum.
    fn difference(&self, p: [u32; 2], candidate: [u32; 2], radius: u32, bound: f64) -> f64 {
        let r = radius as i64;
        let mut sum = 0.0f64;
        for dy in -r..=r {
            let oy = wrap(p[1] as i64 + dy, self.h) as usize * self.w as usize;
            let ey = wrap(candidate[1] as i64 + dy, self.eh) as usize * self.ew as usize;
            for dx in -r..=r {
                let a = self.out[oy + wrap(p[0] as i64 + dx, self.w) as usize];
                let b = self.ex[ey + wrap(candidate[0] as i64 + dx, self.ew) as usize];
                for k in 0..3 {
                    let d = a[k] as f64 - b[k] as f64;
                    sum += d * d;
                }
            }
            if sum >= bound {
                return sum;
            }
        }
        sum
    }
}

/// Neighborhood mismatch between output pixel `p` and exemplar coordinate
/// `candidate` (both addressed toroidally).
pub fn neighborhood_difference(state: &ResampleState, p: [u32; 2], candidate: [u32; 2], radius: u32) -> f64 {
    let ex = exemplar_colors(&state.exemplar);
    Frame::new(state, &ex).difference(p, candidate, radius.max(1), f64::INFINITY)
}

impl ResampleState {
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Difference of every pixel against its own source at `radius`.
    pub fn pixel_differences(&self, radius: u32) -> Vec<f64> {
        let ex = exemplar_colors(&self.exemplar);
        let frame = Frame::new(self, &ex);
        (0..self.pixel_count())
            .into_par_iter()
            .map(|i| {
                let p = [i as u32 % self.width, i as u32 / self.width];
                frame.difference(p, self.source[i], radius.max(1), f64::INFINITY)
            })
            .collect()
    }

    /// One synchronous update; also returns each pixel's chosen difference
    /// (measured against the previous state).
    pub fn iterate_with_energy(&self) -> (ResampleState, Vec<f64>) {
        let ex = exemplar_colors(&self.exemplar);
        let frame = Frame::new(self, &ex);
        let r = self.radius.max(1) as i64;
        let (w, h) = (self.width, self.height);
        let (ew, eh) = (frame.ew, frame.eh);

        let rows: Vec<Vec<([u32; 2], f64)>> = (0..h)
            .into_par_iter()
            .map_init(HashSet::<[u32; 2]>::new, |seen, y| {
                (0..w)
                    .map(|x| {
                        let p = [x, y];
                        let current = self.source[(y * w + x) as usize];
                        seen.clear();
                        seen.insert(current);
                        let mut best = current;
                        let mut best_d = frame.difference(p, current, r as u32, f64::INFINITY);
                        for dy in -r..=r {
                            let qy = wrap(y as i64 + dy, h);
                            for dx in -r..=r {
                                let qx = wrap(x as i64 + dx, w);
                                let s = self.source[(qy * w + qx) as usize];
                                let c = [wrap(s[0] as i64 - dx, ew), wrap(s[1] as i64 - dy, eh)];
                                if !seen.insert(c) {
                                    continue;
                                }
                                let d = frame.difference(p, c, r as u32, best_d);
                                if d < best_d {
                                    best = c;
                                    best_d = d;
                                }
                            }
                        }
                        (best, best_d)
                    })
                    .collect()
            })
            .collect();

        let mut source = Vec::with_capacity(self.pixel_count());
        let mut energy = Vec::with_capacity(self.pixel_count());
        for (s, d) in rows.into_iter().flatten() {
            source.push(s);
            energy.push(d);
        }
        let iteration = self.iteration + 1;
        let next = ResampleState {
            exemplar: Arc::clone(&self.exemplar),
            width: w,
            height: h,
            source,
            iteration,
            radius: self.schedule.radius_at(iteration),
            schedule: self.schedule,
        };
        (next, energy)
    }

    /// Gathers `map` through the source field. `map` must have the
    /// exemplar's dimensions.
    pub fn apply_to(&self, map: &TextureMap) -> Result<TextureMap, TexsynthError> {
        if map.dimensions() != self.exemplar.dimensions() {
            return Err(TexsynthError::InvalidResample(format!(
                "map is {}x{}, exemplar is {}x{}",
                map.width(),
                map.height(),
                self.exemplar.width(),
                self.exemplar.height()
            )));
        }
        let c = map.channels();
        let mut data = Vec::with_capacity(self.pixel_count() * c);
        for &[sx, sy] in &self.source {
            data.extend_from_slice(map.texel(sx, sy));
        }
        Ok(TextureMap::new(self.width, self.height, c, data, map.color_space, map.wrap).expect("gathered shape"))
    }

    /// Output texture: exemplar texel at every source coordinate.
    pub fn realize(&self) -> TextureMap {
        self.apply_to(&self.exemplar).expect("exemplar matches itself")
    }
}

pub fn resample_iterate(state: &ResampleState) -> ResampleState {
    state.iterate_with_energy().0
}

fn run(
    exemplar: Arc<TextureMap>,
    out_w: u32,
    out_h: u32,
    config: &ResampleConfig,
    rng: &mut RandomStream,
) -> Result<ResampleState, TexsynthError> {
    let mut state = resample_init(exemplar, out_w, out_h, config.patch_size, config.schedule, rng)?;
    for _ in 0..config.iterations {
        state = resample_iterate(&state);
    }
    Ok(state)
}

/// Synthesizes an `out_w × out_h` texture by rearranging exemplar texels.
pub fn resample(
    exemplar: &TextureMap,
    out_w: u32,
    out_h: u32,
    config: &ResampleConfig,
    rng: &mut RandomStream,
) -> Result<TextureMap, TexsynthError> {
    Ok(run(Arc::new(exemplar.clone()), out_w, out_h, config, rng)?.realize())
}

/// Resamples all maps of a material with one source field driven by the
/// albedo, so the maps stay registered. Maps are first brought to the
/// albedo's size.
pub fn resample_material(
    mat: &MaterialMaps,
    out_w: u32,
    out_h: u32,
    config: &ResampleConfig,
    rng: &mut RandomStream,
) -> Result<MaterialMaps, TexsynthError> {
    let (w, h) = mat.albedo.dimensions();
    let full = mat.expanded_to(w, h);
    let state = run(Arc::new(full.albedo.clone()), out_w, out_h, config, rng)?;
    Ok(MaterialMaps {
        albedo: state.apply_to(&full.albedo)?,
        normal: state.apply_to(&full.normal)?,
        roughness: state.apply_to(&full.roughness)?,
        metallic: state.apply_to(&full.metallic)?,
        displacement: state.apply_to(&full.displacement)?,
        specular: mat.specular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use partsynth_core::texture::ColorSpace;

    fn random_texture(w: u32, h: u32, seed: u64) -> TextureMap {
        let mut rng = RandomStream::new(seed);
        TextureMap::from_fn(w, h, 3, ColorSpace::Srgb, |_, _, o| {
            for c in o.iter_mut() {
                *c = rng.next_f64() as f32;
            }
        })
    }

    /// Direct transcription of the neighborhood sum with independent
    /// toroidal indexing.
    fn brute_force(ex: &TextureMap, state: &ResampleState, p: [u32; 2], cand: [u32; 2], r: i64) -> f64 {
        let (ew, eh) = (ex.width() as i64, ex.height() as i64);
        let (w, h) = (state.width as i64, state.height as i64);
        let mut sum = 0.0;
        for oy in -r..=r {
            for ox in -r..=r {
                let qx = ((p[0] as i64 + ox) % w + w) % w;
                let qy = ((p[1] as i64 + oy) % h + h) % h;
                let s = state.source[(qy * w + qx) as usize];
                let out = ex.texel(s[0], s[1]);
                let cx = ((cand[0] as i64 + ox) % ew + ew) % ew;
                let cy = ((cand[1] as i64 + oy) % eh + eh) % eh;
                let e = ex.texel(cx as u32, cy as u32);
                for k in 0..3 {
                    sum += (out[k] as f64 - e[k] as f64).powi(2);
                }
            }
        }
        sum
    }

    #[test]
    fn schedule_values() {
        let s = RadiusSchedule::Geometric { radius0: 8 };
        let r: Vec<u32> = (0..15).map(|i| s.radius_at(i)).collect();
        assert_eq!(r, vec![8, 6, 5, 4, 3, 3, 2, 2, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(RadiusSchedule::Fixed(0).radius_at(4), 1);
        assert_eq!(ResampleConfig::default().iterations, 15);
    }

    #[test]
    fn difference_matches_brute_force() {
        let ex = Arc::new(random_texture(8, 8, 3));
        let mut rng = RandomStream::new(4);
        let state = resample_init(Arc::clone(&ex), 8, 8, 3, RadiusSchedule::Fixed(2), &mut rng).unwrap();
        for r in 1..=3u32 {
            for i in 0..64u32 {
                let p = [i % 8, i / 8];
                let cand = [(i * 5) % 8, (i * 3 + 1) % 8];
                assert_eq!(
                    neighborhood_difference(&state, p, cand, r),
                    brute_force(&ex, &state, p, cand, r as i64)
                );
            }
        }
    }

    #[test]
    fn identity_init_self_consistent() {
        let ex = Arc::new(random_texture(16, 16, 1));
        let state = resample_init_with_offsets(Arc::clone(&ex), 16, 16, 16, &[[0, 0]], RadiusSchedule::Fixed(2)).unwrap();
        assert!(state.source.iter().enumerate().all(|(i, s)| *s == [i as u32 % 16, i as u32 / 16]));
        assert_eq!(state.realize(), *ex);
        assert!(state.pixel_differences(2).iter().all(|&d| d == 0.0));
        // The identity field is a fixed point.
        let next = resample_iterate(&state);
        assert_eq!(next.source, state.source);
        assert_eq!(next.iteration, 1);
    }

    #[test]
    fn constant_exemplar_zero_difference() {
        let ex = Arc::new(TextureMap::filled(8, 8, &[0.3, 0.2, 0.1], ColorSpace::Linear));
        let mut rng = RandomStream::new(2);
        let state = resample_init(ex, 12, 12, 4, RadiusSchedule::Fixed(1), &mut rng).unwrap();
        assert_eq!(neighborhood_difference(&state, [3, 5], [7, 1], 2), 0.0);
    }

    #[test]
    fn blocks_are_coherent() {
        let ex = Arc::new(random_texture(20, 20, 7));
        let mut rng = RandomStream::new(8);
        let patch = 8;
        let state = resample_init(ex, 32, 32, patch, RadiusSchedule::default(), &mut rng).unwrap();
        for y in 0..32u32 {
            for x in 0..32u32 {
                let s = state.source[(y * 32 + x) as usize];
                assert!(s[0] < 20 && s[1] < 20);
                let (bx, by) = (x - x % patch, y - y % patch);
                let origin = state.source[(by * 32 + bx) as usize];
                assert_eq!(s, [(origin[0] + x - bx) % 20, (origin[1] + y - by) % 20]);
            }
        }
    }

    #[test]
    fn chosen_difference_never_exceeds_current() {
        for seed in 0..10 {
            let ex = Arc::new(random_texture(16, 16, seed));
            let mut rng = RandomStream::new(seed + 100);
            let state = resample_init(ex, 16, 16, 4, RadiusSchedule::Fixed(2), &mut rng).unwrap();
            let before = state.pixel_differences(2);
            let (_, chosen) = state.iterate_with_energy();
            for (c, b) in chosen.iter().zip(&before) {
                assert!(c <= b);
            }
        }
    }

    #[test]
    fn output_is_pure_rearrangement() {
        let ex = random_texture(24, 24, 5);
        let cfg = ResampleConfig {
            iterations: 3,
            patch_size: 8,
            schedule: RadiusSchedule::Geometric { radius0: 3 },
        };
        let out = resample(&ex, 40, 30, &cfg, &mut RandomStream::new(6)).unwrap();
        let texels: HashSet<Vec<u32>> = ex.data().chunks(3).map(|t| t.iter().map(|v| v.to_bits()).collect()).collect();
        assert!(out
            .data()
            .chunks(3)
            .all(|t| texels.contains(&t.iter().map(|v| v.to_bits()).collect::<Vec<_>>())));
    }

    #[test]
    fn deterministic_across_pools() {
        let ex = random_texture(32, 32, 9);
        let cfg = ResampleConfig {
            iterations: 4,
            patch_size: 8,
            schedule: RadiusSchedule::Geometric { radius0: 4 },
        };
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| resample(&ex, 32, 32, &cfg, &mut RandomStream::new(10)).unwrap())
        };
        assert_eq!(run_with(1), run_with(3));
    }

    #[test]
    fn material_maps_stay_registered() {
        let mut mat = MaterialMaps::uniform([0.5; 3], 0.5, 0.0);
        mat.albedo = random_texture(16, 16, 11);
        mat.roughness = TextureMap::from_fn(16, 16, 1, ColorSpace::Linear, |x, y, o| o[0] = (y * 16 + x) as f32 / 256.0);
        let cfg = ResampleConfig {
            iterations: 2,
            patch_size: 4,
            schedule: RadiusSchedule::Fixed(1),
        };
        let out = resample_material(&mat, 16, 16, &cfg, &mut RandomStream::new(12)).unwrap();
        // Roughness encodes the source index, so it must select the same albedo texel.
        for y in 0..16 {
            for x in 0..16 {
                let idx = (out.roughness.texel(x, y)[0] * 256.0).round() as u32;
                assert_eq!(out.albedo.texel(x, y), mat.albedo.texel(idx % 16, idx / 16));
            }
        }
        assert_eq!(out.metallic.dimensions(), (16, 16));
    }
}
