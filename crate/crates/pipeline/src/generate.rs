//! Frame generation: randomize, synthesize textures, render, annotate,
//! export. Frames run in chunks of `workers`; each stage of a chunk runs in
//! parallel and stage wall times are accumulated for the report.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use image::RgbImage;
use partsynth_annotate::{annotate_frame_with_masks, AnnotatedInstance};
use partsynth_bop::{write_frame_images, BopFrame, BopWriter};
use partsynth_core::camera::Camera;
use partsynth_core::light::{EnvironmentLight, PointLight};
use partsynth_core::math::RigidTransform;
use partsynth_core::rng::RandomStream;
use partsynth_core::scene::{Instance, Scene};
use partsynth_randomize::{assign_materials, sample_camera_pose, sample_lights, spawn_objects, MaterialAssignment, Placement};
use partsynth_render::{post_process, render_frame, FrameBuffers};
use rayon::prelude::*;
use serde::Serialize;

use crate::assets::Assets;
use crate::config::DatasetConfig;
use crate::PipelineError;

pub const WORKERS_ENV: &str = "PARTSYNTH_WORKERS";

/// Worker count from `PARTSYNTH_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Randomized content of one frame, before texture synthesis.
#[derive(Clone, Debug)]
pub struct SampledFrame {
    pub world_to_camera: RigidTransform,
    pub placements: Vec<Placement>,
    pub environment: EnvironmentLight,
    pub point_lights: Vec<PointLight>,
}

/// Frame `k` draws from `RandomStream(seed, [k])`, split by purpose.
pub fn frame_stream(seed: u64, frame: u64) -> RandomStream {
    RandomStream::with_path(seed, &[frame])
}

pub fn sample_frame(assets: &Assets, seed: u64, frame: u64) -> Result<SampledFrame, PipelineError> {
    let rng = frame_stream(seed, frame);
    let fail = |e: partsynth_randomize::RandomizeError| PipelineError::frame(frame, "sample", e);
    let (world_to_camera, _) = sample_camera_pose(&assets.camera, &mut rng.derive_tag("camera")).map_err(fail)?;
    let placements = spawn_objects(&assets.spawn, &mut rng.derive_tag("objects")).map_err(fail)?;
    let (environment, point_lights) = sample_lights(&assets.lights, &mut rng.derive_tag("lights")).map_err(fail)?;
    Ok(SampledFrame {
        world_to_camera,
        placements,
        environment,
        point_lights,
    })
}

pub fn synthesize_materials(assets: &Assets, seed: u64, frame: u64, count: usize) -> Result<Vec<MaterialAssignment>, PipelineError> {
    let rng = frame_stream(seed, frame).derive_tag("materials");
    assign_materials(count, &assets.materials, &rng).map_err(|e| PipelineError::frame(frame, "textures", e))
}

pub fn build_scene(assets: &Assets, sampled: &SampledFrame, materials: &[MaterialAssignment]) -> Scene {
    let mut scene = Scene::new(Camera::new(assets.intrinsics, sampled.world_to_camera), sampled.environment.clone());
    scene.point_lights = sampled.point_lights.clone();
    scene.support_plane = assets.support_plane;
    scene.instances = sampled
        .placements
        .iter()
        .zip(materials)
        .map(|(p, m)| Instance {
            mesh: Arc::clone(&p.mesh),
            model_to_world: p.model_to_world,
            material: Arc::clone(&m.maps),
        })
        .collect();
    scene
}

/// Per-stage wall-clock seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageTimes {
    pub load_assets: f64,
    pub sample: f64,
    pub textures: f64,
    pub render: f64,
    pub annotate: f64,
    pub export: f64,
    pub finalize: f64,
}

impl StageTimes {
    pub fn sum(&self) -> f64 {
        self.load_assets + self.sample + self.textures + self.render + self.annotate + self.export + self.finalize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameReport {
    pub image_id: u32,
    pub instances: usize,
    pub rejected_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub num_images: u32,
    pub workers: usize,
    pub spp: u32,
    pub total_seconds: f64,
    pub stage_seconds: StageTimes,
    pub rejected_samples: u64,
    pub frames: Vec<FrameReport>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    complete: bool,
    num_images: u32,
    frames_written: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

fn write_manifest(root: &Path, num_images: u32, written: u32, error: Option<&str>) -> Result<(), PipelineError> {
    let m = Manifest {
        complete: error.is_none() && written == num_images,
        num_images,
        frames_written: written,
        error,
    };
    write_json(&root.join("MANIFEST.json"), &m)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *slot += t.elapsed().as_secs_f64();
    out
}

/// Keeps the results before the first failure. The failure, if any, is
/// stored in `error` unless an earlier one is already there.
fn keep_prefix<T>(results: Vec<Result<T, PipelineError>>, error: &mut Option<PipelineError>) -> Vec<T> {
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                error.get_or_insert(e);
                break;
            }
        }
    }
    out
}

struct Rendered {
    index: u64,
    scene: Scene,
    buffers: FrameBuffers,
    rgb: RgbImage,
}

/// Generates `config.num_images` frames into a BOP tree under
/// `config.output_root` and writes `report.json` there.
///
/// A failing frame stops the run; frames before it are written completely
/// and `MANIFEST.json` records the failure.
pub fn run_generate(config: &DatasetConfig, workers: usize) -> Result<RunReport, PipelineError> {
    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Asset(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(config, workers))
}

fn run_in_pool(config: &DatasetConfig, workers: usize) -> Result<RunReport, PipelineError> {
    let start = Instant::now();
    let mut times = StageTimes::default();
    let root = &config.output_root;
    let seed = config.seed;

    let (assets, mut writer) = timed(&mut times.load_assets, || -> Result<_, PipelineError> {
        let assets = Assets::load(config)?;
        std::fs::create_dir_all(root).map_err(|source| PipelineError::Io {
            path: root.clone(),
            source,
        })?;
        write_manifest(root, config.num_images, 0, Some("run in progress"))?;
        let writer = BopWriter::create(
            root,
            config.scene_id,
            &assets.intrinsics,
            config.depth_scale,
            assets.spawn.model_catalog.iter().map(|m| m.as_ref()),
        )?;
        Ok((assets, writer))
    })?;

    let mut frames = Vec::with_capacity(config.num_images as usize);
    let mut error: Option<PipelineError> = None;
    let indices: Vec<u64> = (0..config.num_images as u64).collect();
    for chunk in indices.chunks(workers) {
        let sampled = timed(&mut times.sample, || {
            chunk.par_iter().map(|&k| sample_frame(&assets, seed, k).map(|s| (k, s))).collect::<Vec<_>>()
        });
        let sampled = keep_prefix(sampled, &mut error);

        let scenes = timed(&mut times.textures, || {
            sampled
                .par_iter()
                .map(|(k, s)| {
                    let m = synthesize_materials(&assets, seed, *k, s.placements.len())?;
                    Ok((*k, build_scene(&assets, s, &m)))
                })
                .collect::<Vec<_>>()
        });
        let scenes = keep_prefix(scenes, &mut error);

        let rendered = timed(&mut times.render, || {
            scenes
                .into_par_iter()
                .map(|(k, scene)| {
                    let buffers = render_frame(&scene, &assets.profile, k, seed).map_err(|e| PipelineError::frame(k, "render", e))?;
                    let rgb = post_process(&buffers.radiance, buffers.width, buffers.height, &assets.profile);
                    Ok(Rendered {
                        index: k,
                        scene,
                        buffers,
                        rgb,
                    })
                })
                .collect::<Vec<_>>()
        });
        let rendered = keep_prefix(rendered, &mut error);

        let annotated: Vec<(Rendered, Vec<AnnotatedInstance>)> = timed(&mut times.annotate, || {
            rendered
                .into_par_iter()
                .map(|r| {
                    let a = annotate_frame_with_masks(&r.scene, &r.buffers);
                    (r, a)
                })
                .collect()
        });

        let exported = timed(&mut times.export, || {
            let frames: Vec<_> = annotated
                .into_par_iter()
                .map(|(r, a)| {
                    let frame = BopFrame::from_render(
                        assets.intrinsics,
                        r.scene.camera.world_to_camera,
                        &a,
                        r.rgb,
                        &r.buffers.depth_z,
                        config.depth_scale,
                    )
                    .map_err(|e| PipelineError::frame(r.index, "export", e))?;
                    write_frame_images(writer.scene_dir(), r.index as u32, &frame).map_err(|e| PipelineError::frame(r.index, "export", e))?;
                    Ok((r.index, frame, r.buffers.rejected_samples))
                })
                .collect();
            let frames = keep_prefix(frames, &mut error);
            for (k, frame, _) in &frames {
                writer.record(*k as u32, frame);
            }
            frames
        });
        for (k, frame, rejected) in exported {
            frames.push(FrameReport {
                image_id: k as u32,
                instances: frame.annotations.len(),
                rejected_samples: rejected,
            });
        }
        if error.is_some() {
            break;
        }
    }

    timed(&mut times.finalize, || -> Result<(), PipelineError> {
        writer.finish()?;
        let msg = error.as_ref().map(|e| e.to_string());
        write_manifest(root, config.num_images, frames.len() as u32, msg.as_deref())
    })?;
    if let Some(e) = error {
        return Err(e);
    }

    let report = RunReport {
        seed,
        num_images: config.num_images,
        workers,
        spp: assets.profile.spp,
        total_seconds: start.elapsed().as_secs_f64(),
        stage_seconds: times,
        rejected_samples: frames.iter().map(|f| f.rejected_samples).sum(),
        frames,
    };
    write_json(&root.join("report.json"), &report)?;
    log::info!(
        "wrote {} frames to {} in {:.2} s",
        report.num_images,
        root.display(),
        report.total_seconds
    );
    Ok(report)
}
