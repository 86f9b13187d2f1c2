use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use partsynth::{default_workers, run_generate, run_import_digital_twin, validate_config, PipelineError, TwinOptions};
use partsynth_core::material::MaterialMaps;
use partsynth_core::rng::RandomStream;
use partsynth_core::texture::{ColorSpace, TextureMap};
use partsynth_render::{RenderMode, RenderProfile};
use partsynth_texsynth::{resample, ResampleConfig};

#[derive(Parser)]
#[command(name = "partsynth", version, about = "Synthetic BOP datasets from CAD models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a config file.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        num_images: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        profile: Option<RenderMode>,
    },
    /// Re-render the poses of an existing BOP scene.
    ImportTwin {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        scene: u32,
        /// Output root; defaults to `<root>_twin`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode, default_value = "preview")]
        profile: RenderMode,
        #[arg(long)]
        spp: Option<u32>,
        /// Texture-set directory applied to every object.
        #[arg(long)]
        material: Option<PathBuf>,
    },
    /// Synthesize a texture of a new size from an exemplar.
    ResampleTexture {
        #[arg(long)]
        exemplar: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `WIDTHxHEIGHT`.
        #[arg(long, value_parser = parse_size)]
        size: (u32, u32),
        #[arg(long, default_value_t = partsynth_texsynth::resample::DEFAULT_ITERATIONS)]
        iterations: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a config file and list every problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<RenderMode, String> {
    match s {
        "path_traced" => Ok(RenderMode::PathTraced),
        "preview" => Ok(RenderMode::Preview),
        _ => Err(format!("unknown profile `{s}`; expected path_traced or preview")),
    }
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("size `{s}` is not WIDTHxHEIGHT"))?;
    let p = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("size `{s}`: {e}"));
    let (w, h) = (p(w)?, p(h)?);
    if w == 0 || h == 0 {
        return Err(format!("size `{s}` has a zero side"));
    }
    Ok((w, h))
}

fn generate(
    config: PathBuf,
    seed: Option<u64>,
    num_images: Option<u32>,
    out: Option<PathBuf>,
    profile: Option<RenderMode>,
) -> Result<(), PipelineError> {
    let mut cfg = validate_config(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = num_images {
        cfg.num_images = n;
    }
    if let Some(o) = out {
        cfg.output_root = o;
    }
    if let Some(m) = profile {
        // A different mode brings its own defaults unless the file set them.
        if cfg.profile.mode != Some(m) && cfg.profile.mode.is_some() {
            cfg.profile.spp = None;
        }
        cfg.profile.mode = Some(m);
    }
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(partsynth::ConfigError::Invalid { path: config, problems }.into());
    }
    let report = run_generate(&cfg, default_workers())?;
    println!(
        "{} images in {:.2} s ({} rejected samples) -> {}",
        report.num_images,
        report.total_seconds,
        report.rejected_samples,
        cfg.output_root.display()
    );
    Ok(())
}

fn import_twin(
    root: PathBuf,
    scene: u32,
    out: Option<PathBuf>,
    mode: RenderMode,
    spp: Option<u32>,
    material: Option<PathBuf>,
) -> anyhow::Result<()> {
    let mut options = TwinOptions {
        profile: RenderProfile::for_mode(mode),
        ..TwinOptions::default()
    };
    if let Some(s) = spp {
        options.profile.spp = s;
    }
    if let Some(dir) = material {
        let maps = MaterialMaps::load_dir(&dir).with_context(|| format!("loading {}", dir.display()))?;
        options.material = Arc::new(maps);
    }
    let out = out.unwrap_or_else(|| {
        let mut s = root.clone().into_os_string();
        s.push("_twin");
        PathBuf::from(s)
    });
    let pool = rayon::ThreadPoolBuilder::new().num_threads(default_workers()).build()?;
    let n = pool.install(|| run_import_digital_twin(&root, scene, &out, &options))?;
    println!("{n} images -> {}", out.display());
    Ok(())
}

fn resample_texture(exemplar: PathBuf, out: PathBuf, size: (u32, u32), iterations: u32, seed: u64) -> anyhow::Result<()> {
    let ex = TextureMap::load(&exemplar, ColorSpace::Srgb)?;
    let config = ResampleConfig {
        iterations,
        ..ResampleConfig::default()
    };
    let mut rng = RandomStream::new(seed);
    let result = resample(&ex, size.0, size.1, &config, &mut rng)?;
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("hdr")) {
        result.to_linear().save_hdr(&out)?;
    } else {
        result.save_png(&out, false)?;
    }
    println!("{}x{} texture -> {}", size.0, size.1, out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result: Result<(), (i32, String)> = match cli.command {
        Command::Generate {
            config,
            seed,
            num_images,
            out,
            profile,
        } => generate(config, seed, num_images, out, profile).map_err(|e| (e.exit_code(), e.to_string())),
        Command::Validate { config } => match validate_config(&config) {
            Ok(c) => {
                println!(
                    "{}: ok ({} images, {}x{}, spp {}, resampler iterations {})",
                    config.display(),
                    c.num_images,
                    c.resolution[0],
                    c.resolution[1],
                    c.profile().spp,
                    c.materials.defect_parameter_ranges.resample.iterations
                );
                Ok(())
            }
            Err(e) => Err((1, e.to_string())),
        },
        Command::ImportTwin {
            root,
            scene,
            out,
            profile,
            spp,
            material,
        } => import_twin(root, scene, out, profile, spp, material).map_err(|e| (2, format!("{e:#}"))),
        Command::ResampleTexture {
            exemplar,
            out,
            size,
            iterations,
            seed,
        } => resample_texture(exemplar, out, size, iterations, seed).map_err(|e| (2, format!("{e:#}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
