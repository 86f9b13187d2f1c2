use partsynth_core::rng::RandomStream;
use partsynth_core::scene::Scene;
use rayon::prelude::*;

use crate::profile::{RenderMode, RenderProfile};
use crate::tracer::RenderScene;
use crate::RenderError;

/// Per-pixel render outputs, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBuffers {
    pub width: u32,
    pub height: u32,
    /// Linear RGB radiance.
    pub radiance: Vec<[f32; 3]>,
    /// `Scene::instance_id` of the primary hit, 0 for background.
    pub instance_id: Vec<u32>,
    /// Camera-space z of the primary hit in meters, 0 for background.
    pub depth_z: Vec<f64>,
    /// Non-finite samples dropped from the pixel means.
    pub rejected_samples: u64,
}

impl FrameBuffers {
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }
}

/// Renders one frame with a fresh acceleration structure.
pub fn render_frame(scene: &Scene, profile: &RenderProfile, frame_index: u64, seed: u64) -> Result<FrameBuffers, RenderError> {
    render_prepared(&RenderScene::new(scene), profile, frame_index, seed)
}

struct PixelResult {
    radiance: [f32; 3],
    id: u32,
    depth: f64,
    rejected: u64,
}

/// Renders with an already built [`RenderScene`].
///
/// Sample `s` of pixel `(x, y)` draws from the stream
/// `(seed, [frame_index, x, y, s])`, so the result does not depend on how
/// rows are distributed across threads.
pub fn render_prepared(rs: &RenderScene, profile: &RenderProfile, frame_index: u64, seed: u64) -> Result<FrameBuffers, RenderError> {
    profile.validate()?;
    let camera = &rs.scene.camera;
    let (w, h) = (camera.intrinsics.width, camera.intrinsics.height);

    let rows: Vec<Result<Vec<PixelResult>, RenderError>> = (0..h)
        .into_par_iter()
        .map(|y| (0..w).map(|x| render_pixel(rs, profile, frame_index, seed, x, y)).collect())
        .collect();

    let n = w as usize * h as usize;
    let mut out = FrameBuffers {
        width: w,
        height: h,
        radiance: Vec::with_capacity(n),
        instance_id: Vec::with_capacity(n),
        depth_z: Vec::with_capacity(n),
        rejected_samples: 0,
    };
    for row in rows {
        for p in row? {
            out.radiance.push(p.radiance);
            out.instance_id.push(p.id);
            out.depth_z.push(p.depth);
            out.rejected_samples += p.rejected;
        }
    }
    if out.rejected_samples > 0 {
        log::warn!("frame {frame_index}: rejected {} non-finite samples", out.rejected_samples);
    }
    Ok(out)
}

fn render_pixel(
    rs: &RenderScene,
    profile: &RenderProfile,
    frame_index: u64,
    seed: u64,
    x: u32,
    y: u32,
) -> Result<PixelResult, RenderError> {
    let camera = &rs.scene.camera;
    let (center, z_scale) = camera.ray(x as f64, y as f64);
    let (id, depth) = match rs.intersect(&center.origin, &center.dir, f64::INFINITY) {
        Some(hit) => match hit.instance() {
            Some(i) => (Scene::instance_id(i), hit.t() * z_scale),
            None => (0, 0.0),
        },
        None => (0, 0.0),
    };

    let mut sum = [0.0f64; 3];
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    for s in 0..profile.spp {
        let mut rng = RandomStream::with_path(seed, &[frame_index, x as u64, y as u64, s as u64]);
        let jitter = profile.mode == RenderMode::PathTraced || profile.spp > 1;
        let (u, v) = if jitter {
            (x as f64 + rng.next_f64() - 0.5, y as f64 + rng.next_f64() - 0.5)
        } else {
            (x as f64, y as f64)
        };
        let (ray, _) = camera.ray(u, v);
        let l = match profile.mode {
            RenderMode::PathTraced => rs.trace_path(&ray, profile, &mut rng),
            RenderMode::Preview => rs.shade_preview(&ray, &mut rng),
        };
        if l.iter().all(|c| c.is_finite() && *c >= 0.0) {
            for k in 0..3 {
                sum[k] += l[k];
            }
            accepted += 1;
        } else {
            rejected += 1;
        }
    }
    if accepted == 0 {
        return Err(RenderError::AllSamplesRejected { x, y });
    }
    Ok(PixelResult {
        radiance: sum.map(|c| (c / accepted as f64) as f32),
        id,
        depth,
        rejected,
    })
}
