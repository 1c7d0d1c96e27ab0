use std::io::Write;
use std::path::Path;

use viewcurate::clustering::{cluster as run_clustering, cluster_quality, group_quality, shared_point_similarity, Method};
use viewcurate::export::{combine_trees, export_dtu as write_dtu, Manifest, ViewSource, MANIFEST_FILE};
use viewcurate::render::{render_depth_file_name, render_file_name, splat_render, write_image, ImageKind};
use viewcurate::sampling::{grid_sampling, sample_domes, semantic_sampling, write_boxes_json, DomeSpec};
use viewcurate::scene::{parse_ply, read_sfm_dir, scene_bounds};
use viewcurate::synth::{generate_scene, write_synth_dir};
use viewcurate::{Error, Intrinsics, Point3D, Result, SceneModel, UpAxis};

use crate::config::{echo_config, PipelineConfig};
use crate::{ensure_exists, AugmentMode};

/// First image id for synthetic poses when no real scene is given.
const SYNTHETIC_FIRST_ID: u32 = 100_000;
const SYNTHETIC_INTRINSICS_ID: u32 = 1;

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_points(path: &Path) -> Result<Vec<Point3D>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&bytes)
}

fn read_scene(dir: &Path) -> Result<SceneModel> {
    ensure_exists(dir, "scene directory")?;
    read_sfm_dir(dir)
}

fn checked_intrinsics(i: &Intrinsics) -> Result<Intrinsics> {
    Intrinsics::new(i.fx, i.fy, i.cx, i.cy, i.width, i.height)
}

pub fn synth(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let intr = checked_intrinsics(&cfg.intrinsics)?;
    let generated = generate_scene(&cfg.synth, &intr)?;
    create_dir(out)?;
    write_synth_dir(&generated, out)?;
    echo_config(out, "synth", cfg)
}

pub fn cluster(cfg: &PipelineConfig, scene: &Path, method: Method, up: UpAxis, out: &Path) -> Result<()> {
    let scene = read_scene(scene)?.with_up_axis(up).z_up();
    let cs = run_clustering(&scene, method, &cfg.clustering)?;
    let sim = shared_point_similarity(&scene);
    let report = cluster_quality(&scene, &sim, &cs)?;
    let manifest = Manifest::from_cluster_set(&cs);
    create_dir(out)?;
    manifest.write(&out.join(MANIFEST_FILE))?;
    write_json(&out.join("quality.json"), &report)?;
    echo_config(out, "cluster", cfg)
}

pub fn augment(
    cfg: &PipelineConfig,
    points: &Path,
    mode: AugmentMode,
    scene: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let points = read_points(points)?;
    let (first_id, intr) = match scene {
        Some(dir) => {
            let real = read_scene(dir)?;
            let last = *real.cameras().keys().next_back().expect("scene has cameras");
            let intr = *real.intrinsics().values().next().expect("scene has intrinsics");
            (last + 1, intr)
        }
        None => (SYNTHETIC_FIRST_ID, checked_intrinsics(&cfg.intrinsics)?),
    };
    let s = &cfg.sampling;
    s.validate()?;
    let (label, domes, semantic): (&str, Vec<DomeSpec>, _) = match mode {
        AugmentMode::Grid => ("dome_grid", grid_sampling(&points, s)?.1, None),
        AugmentMode::Semantic => {
            let sem = semantic_sampling(&points, s)?;
            ("dome_semantic", sem.domes.clone(), Some(sem))
        }
    };
    if domes.is_empty() {
        return Err(Error::EmptyResult("no sampling domes were placed".into()));
    }
    let sampled = sample_domes(&domes, s, SYNTHETIC_INTRINSICS_ID, first_id)?;
    let poses: Vec<_> = sampled.into_iter().map(|p| p.pose).collect();
    let groups: Vec<Vec<u32>> = poses
        .chunks(s.poses_per_dome)
        .map(|c| c.iter().map(|p| p.image_id).collect())
        .collect();
    let synthetic = SceneModel::new(poses, [(SYNTHETIC_INTRINSICS_ID, intr)].into_iter().collect(), Vec::new())?;
    let manifest = Manifest::from_groups(label, s.poses_per_dome, &groups, ViewSource::Synthetic);

    create_dir(out)?;
    viewcurate::scene::write_sfm_dir(&synthetic, &out.join("sparse"))?;
    manifest.write(&out.join(MANIFEST_FILE))?;
    write_json(&out.join("domes.json"), &domes)?;
    if let Some(sem) = semantic {
        write_boxes_json(&sem.boxes, &out.join("boxes.json"))?;
        let path = out.join("mask.pgm");
        let mut bytes = Vec::new();
        sem.mask.write_pgm(&mut bytes).map_err(|e| Error::io(&path, e))?;
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    echo_config(out, "augment", cfg)
}

pub fn render(cfg: &PipelineConfig, points: &Path, poses: &Path, out: &Path) -> Result<()> {
    let points = read_points(points)?;
    let poses = read_scene(poses)?;
    create_dir(out)?;
    for (id, pose) in poses.cameras() {
        let buf = splat_render(&points, pose, poses.intrinsics_for(pose), cfg.render.splat_radius);
        write_image(&buf, ImageKind::Rgb, &out.join(render_file_name(*id)))?;
        write_image(&buf, ImageKind::Depth, &out.join(render_depth_file_name(*id)))?;
    }
    echo_config(out, "render", cfg)
}

pub fn export_dtu(
    cfg: &PipelineConfig,
    manifest: &Path,
    scene: &Path,
    points: Option<&Path>,
    renders: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let manifest = Manifest::read(manifest)?;
    let scene = read_scene(scene)?;
    let bounds = match points {
        Some(p) => scene_bounds(&read_points(p)?)?,
        None => scene_bounds(scene.points())?,
    };
    if let Some(dir) = renders {
        ensure_exists(dir, "renders directory")?;
    }
    write_dtu(&scene, &manifest, &bounds, renders, out)?;
    echo_config(out, "export-dtu", cfg)
}

pub fn eval(cfg: &PipelineConfig, manifest: &Path, scene: &Path, out: Option<&Path>) -> Result<()> {
    let manifest = Manifest::read(manifest)?;
    let scene = read_scene(scene)?;
    let sim = shared_point_similarity(&scene);
    // Synthetic views carry no tracks; score the real members of each scan.
    let groups: Vec<(usize, Vec<u32>)> = manifest
        .scans
        .iter()
        .map(|s| {
            let real = s
                .views
                .iter()
                .filter(|v| v.source == ViewSource::Real)
                .map(|v| v.image_id)
                .collect();
            (s.id, real)
        })
        .filter(|(_, m): &(usize, Vec<u32>)| !m.is_empty())
        .collect();
    let refs: Vec<(usize, &[u32])> = groups.iter().map(|(i, m)| (*i, m.as_slice())).collect();
    let report = group_quality(&sim, &refs)?;
    let text = serde_json::to_string_pretty(&report)?;
    // A closed stdout (e.g. piped into `head`) is not an error.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(out) = out {
        create_dir(out)?;
        write_json(&out.join("quality.json"), &report)?;
        echo_config(out, "eval", cfg)?;
    }
    Ok(())
}

pub fn combine(cfg: &PipelineConfig, real: &Path, synthetic: &Path, out: &Path) -> Result<()> {
    ensure_exists(real, "real scan tree")?;
    ensure_exists(synthetic, "synthetic scan tree")?;
    combine_trees(real, synthetic, out)?;
    echo_config(out, "combine", cfg)
}
