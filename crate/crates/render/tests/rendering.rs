use std::f64::consts::PI;
use std::sync::Arc;

use partsynth_core::camera::{Camera, CameraIntrinsics};
use partsynth_core::light::{EnvironmentLight, PointLight};
use partsynth_core::material::MaterialMaps;
use partsynth_core::math::{look_at, RigidTransform, Vec3};
use partsynth_core::mesh::Mesh;
use partsynth_core::rng::RandomStream;
use partsynth_core::scene::{Instance, Scene};
use partsynth_core::texture::{ColorSpace, TextureMap};
use partsynth_render::bvh::intersect_triangle;
use partsynth_render::{render_frame, Bvh, BvhTriangle, RenderProfile};

fn camera(eye: Vec3, target: Vec3, size: u32, fov: f64) -> Camera {
    Camera::new(
        CameraIntrinsics::from_fov(size, size, fov).unwrap(),
        look_at(&eye, &target, &Vec3::y()).unwrap(),
    )
}

fn instance(mesh: Mesh, at: Vec3, material: MaterialMaps) -> Instance {
    Instance {
        mesh: Arc::new(mesh),
        model_to_world: RigidTransform::from_translation(at),
        material: Arc::new(material),
    }
}

fn pt(spp: u32) -> RenderProfile {
    RenderProfile::path_traced().with_spp(spp)
}

fn mean_over(buf: &[[f32; 3]], ids: &[u32], id: u32) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut n = 0.0;
    for (c, &i) in buf.iter().zip(ids) {
        if i == id {
            for k in 0..3 {
                sum[k] += c[k] as f64;
            }
            n += 1.0;
        }
    }
    sum.map(|s| s / n)
}

#[test]
fn empty_scene_shows_environment() {
    let scene = Scene::new(
        camera(Vec3::new(0.0, 0.0, -1.0), Vec3::zeros(), 8, 1.0),
        EnvironmentLight::constant([0.5; 3]),
    );
    for profile in [pt(4), RenderProfile::preview()] {
        let out = render_frame(&scene, &profile, 0, 1).unwrap();
        assert!(out.radiance.iter().all(|c| *c == [0.5; 3]));
        assert!(out.instance_id.iter().all(|&i| i == 0));
        assert!(out.depth_z.iter().all(|&d| d == 0.0));
    }
}

#[test]
fn white_furnace() {
    let mut scene = Scene::new(
        camera(Vec3::new(0.0, 0.0, -3.0), Vec3::zeros(), 32, 0.8),
        EnvironmentLight::constant([0.5; 3]),
    );
    scene.instances.push(instance(Mesh::uv_sphere(1.0, 32, 64, 1), Vec3::zeros(), MaterialMaps::diffuse([1.0; 3])));
    let out = render_frame(&scene, &pt(512), 0, 3).unwrap();
    let m = mean_over(&out.radiance, &out.instance_id, 1);
    for c in m {
        assert!((c - 0.5).abs() <= 0.5 * 0.015, "{m:?}");
    }
}

#[test]
fn furnace_never_gains_energy() {
    for (roughness, metallic) in [(0.05, 0.0), (0.5, 0.0), (1.0, 0.0), (0.05, 1.0), (0.5, 1.0), (0.5, 0.5)] {
        let mut scene = Scene::new(
            camera(Vec3::new(0.0, 0.0, -3.0), Vec3::zeros(), 16, 0.8),
            EnvironmentLight::constant([1.0; 3]),
        );
        let mat = MaterialMaps::uniform([1.0; 3], roughness, metallic);
        scene.instances.push(instance(Mesh::uv_sphere(1.0, 24, 48, 1), Vec3::zeros(), mat));
        let out = render_frame(&scene, &pt(256), 0, 5).unwrap();
        let m = mean_over(&out.radiance, &out.instance_id, 1);
        for c in m {
            assert!(c <= 1.02, "roughness {roughness} metallic {metallic}: {m:?}");
            assert!(c > 0.6, "roughness {roughness} metallic {metallic}: {m:?}");
        }
    }
}

#[test]
fn lambert_point_light() {
    let albedo = 0.6;
    let intensity = 3.0;
    let theta = PI / 6.0;
    let d = 1.0;
    let mut scene = Scene::new(
        camera(Vec3::new(0.0, 2.0, -2.0), Vec3::zeros(), 33, 0.05),
        EnvironmentLight::black(),
    );
    scene.instances.push(instance(Mesh::quad(4.0, 1), Vec3::zeros(), MaterialMaps::diffuse([albedo as f32; 3])));
    scene.point_lights.push(PointLight {
        position: Vec3::new(d * theta.sin(), d * theta.cos(), 0.0),
        intensity: [intensity; 3],
        radius: 0.0,
    });
    let out = render_frame(&scene, &pt(256), 0, 9).unwrap();
    let expected = albedo / PI * intensity * theta.cos() / (d * d);
    let c = out.radiance[out.index(16, 16)];
    for v in c {
        assert!((v as f64 - expected).abs() <= 0.02 * expected, "{c:?} vs {expected}");
    }
}

#[test]
fn center_depth_of_sphere() {
    let mut scene = Scene::new(
        Camera::new(CameraIntrinsics::from_fov(33, 33, 0.6).unwrap(), RigidTransform::identity()),
        EnvironmentLight::black(),
    );
    scene.instances.push(instance(Mesh::uv_sphere(1.0, 32, 64, 1), Vec3::new(0.0, 0.0, 3.0), MaterialMaps::diffuse([0.5; 3])));
    let out = render_frame(&scene, &RenderProfile::preview(), 0, 0).unwrap();
    let i = out.index(16, 16);
    assert_eq!(out.instance_id[i], 1);
    assert!((out.depth_z[i] - 2.0).abs() < 1e-4, "{}", out.depth_z[i]);
    for (id, z) in out.instance_id.iter().zip(&out.depth_z) {
        assert_eq!(*id == 0, *z == 0.0);
    }
}

fn cluttered_scene() -> Scene {
    let mut scene = Scene::new(
        camera(Vec3::new(0.6, 0.8, -1.2), Vec3::new(0.0, 0.1, 0.0), 24, 0.9),
        EnvironmentLight::constant([0.4, 0.45, 0.5]),
    );
    scene.support_plane = Some(0.0);
    scene.instances.push(instance(Mesh::cube(0.2, 1), Vec3::new(0.0, 0.1, 0.0), MaterialMaps::uniform([0.8, 0.2, 0.1], 0.3, 0.0)));
    scene.instances.push(instance(Mesh::uv_sphere(0.1, 12, 24, 2), Vec3::new(0.25, 0.1, 0.1), MaterialMaps::uniform([0.9; 3], 0.1, 1.0)));
    scene.point_lights.push(PointLight {
        position: Vec3::new(0.5, 1.5, -0.5),
        intensity: [2.0; 3],
        radius: 0.05,
    });
    scene
}

#[test]
fn thread_count_does_not_change_pixels() {
    let scene = cluttered_scene();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| render_frame(&scene, &pt(8), 3, 11).unwrap())
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn annotations_independent_of_spp_and_mode() {
    let scene = cluttered_scene();
    let a = render_frame(&scene, &pt(1), 0, 1).unwrap();
    let b = render_frame(&scene, &pt(16), 0, 2).unwrap();
    let c = render_frame(&scene, &RenderProfile::preview(), 0, 3).unwrap();
    assert_eq!(a.instance_id, b.instance_id);
    assert_eq!(a.instance_id, c.instance_id);
    assert_eq!(a.depth_z, b.depth_z);
    assert_eq!(a.depth_z, c.depth_z);
    assert!(a.instance_id.contains(&1) && a.instance_id.contains(&2));
}

#[test]
fn occluded_point_gets_no_direct_light() {
    let mut scene = Scene::new(
        camera(Vec3::new(2.0, 0.5, 0.0), Vec3::zeros(), 17, 0.2),
        EnvironmentLight::black(),
    );
    scene.instances.push(instance(Mesh::quad(6.0, 1), Vec3::zeros(), MaterialMaps::diffuse([0.8; 3])));
    scene.instances.push(instance(Mesh::cube(0.5, 2), Vec3::new(0.0, 1.0, 0.0), MaterialMaps::diffuse([0.8; 3])));
    scene.point_lights.push(PointLight {
        position: Vec3::new(0.0, 2.0, 0.0),
        intensity: [5.0; 3],
        radius: 0.0,
    });
    let out = render_frame(&scene, &RenderProfile::preview(), 0, 0).unwrap();
    let i = out.index(8, 8);
    assert_eq!(out.instance_id[i], 1);
    assert_eq!(out.radiance[i], [0.0; 3]);
    // A lit point on the plane away from the cube is not black.
    scene.instances.pop();
    let lit = render_frame(&scene, &RenderProfile::preview(), 0, 0).unwrap();
    assert!(lit.radiance[i][0] > 0.0);
}

/// Mean per-pixel variance across independent seeds, for a rough plane
/// under a non-uniform sky.
fn pixel_variance(spp: u32) -> f64 {
    let sky = TextureMap::from_fn(32, 16, 3, ColorSpace::Linear, |x, y, o| {
        let v = if y < 6 { 2.0 + (x % 5) as f32 } else { 0.2 };
        o.copy_from_slice(&[v, v, v]);
    });
    let mut scene = Scene::new(
        camera(Vec3::new(0.0, 1.0, -0.3), Vec3::zeros(), 12, 0.4),
        EnvironmentLight::new(Arc::new(sky), 0.0, 0.0).unwrap(),
    );
    scene.instances.push(instance(Mesh::quad(4.0, 1), Vec3::zeros(), MaterialMaps::uniform([0.6; 3], 0.5, 0.0)));
    let seeds = 8;
    let renders: Vec<_> = (0..seeds).map(|s| render_frame(&scene, &pt(spp), 0, 100 + s).unwrap()).collect();
    let n = renders[0].radiance.len();
    let mut total = 0.0;
    for p in 0..n {
        let vals: Vec<f64> = renders.iter().map(|r| r.radiance[p][1] as f64).collect();
        let mean = vals.iter().sum::<f64>() / seeds as f64;
        total += vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
    }
    total / n as f64
}

#[test]
fn variance_falls_as_one_over_spp() {
    let v16 = pixel_variance(16);
    let v64 = pixel_variance(64);
    let v256 = pixel_variance(256);
    for (ratio, name) in [(v16 / v64, "16/64"), (v64 / v256, "64/256")] {
        assert!((ratio / 4.0 - 1.0).abs() <= 0.2, "{name}: {ratio}");
    }
}

#[test]
fn bvh_matches_brute_force() {
    let mut rng = RandomStream::new(2718);
    let tris: Vec<BvhTriangle> = (0..500)
        .map(|i| {
            let c = Vec3::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            let mut r = || Vec3::new(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
            BvhTriangle {
                v: [c + r(), c + r(), c + r()],
                instance: i / 50,
                local: i % 50,
            }
        })
        .collect();
    let bvh = Bvh::from_triangles(tris.clone());
    let mut hits = 0;
    for _ in 0..1000 {
        let o = Vec3::new(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        let target = Vec3::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        let d = (target - o).normalize();
        let mut oracle: Option<(f64, usize)> = None;
        for (i, t) in tris.iter().enumerate() {
            if let Some((dist, _, _)) = intersect_triangle(&t.v, &o, &d, 0.0, f64::INFINITY) {
                if oracle.map_or(true, |(b, _)| dist < b) {
                    oracle = Some((dist, i));
                }
            }
        }
        let got = bvh.intersect(&o, &d, 0.0, f64::INFINITY);
        match (oracle, got) {
            (None, None) => {}
            (Some((t, i)), Some(h)) => {
                hits += 1;
                assert_eq!(h.instance, tris[i].instance);
                assert_eq!(h.local, tris[i].local);
                assert!((h.t - t).abs() < 1e-6);
            }
            other => panic!("mismatch {other:?}"),
        }
    }
    assert!(hits > 300, "{hits}");
}
