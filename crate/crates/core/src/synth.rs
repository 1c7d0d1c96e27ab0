//! Procedural cities and drone survey trajectories with known ground truth.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::NEAR_PLANE;
use crate::rng::{derive_seed, seeded, uniform, SeededRng};
use crate::sampling::{write_boxes_json, Box2D};
use crate::scene::{
    look_at_rotation, write_ply, write_sfm_dir, AxisAlignedBounds, CameraPose, Intrinsics, Point3D,
    SceneModel,
};

pub const GROUND_COLOR: [u8; 3] = [96, 112, 72];
pub const WALL_COLOR: [u8; 3] = [176, 168, 160];
pub const ROOF_COLOR: [u8; 3] = [200, 56, 48];

/// Intrinsics id used for every synthetic scan camera.
pub const SCAN_INTRINSICS_ID: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_buildings: usize,
    /// XY extent `[min_x, min_y]` .. `[max_x, max_y]`; the ground sits at z = 0.
    pub bounds_min: [f64; 2],
    pub bounds_max: [f64; 2],
    /// Footprint side length range in meters.
    pub building_size: [f64; 2],
    pub building_height: [f64; 2],
    /// Minimum clearance between footprints.
    pub building_gap: f64,
    /// Surface samples per building, split evenly between roof and walls.
    pub points_per_building: usize,
    /// Ground samples; `None` means twice the building point total (at least 1000).
    pub ground_points: Option<usize>,
    pub altitude: f64,
    pub line_spacing: f64,
    pub shot_spacing: f64,
    /// Forward tilt away from nadir along the heading.
    pub pitch_deg: f64,
    pub abrupt_turns: bool,
    /// Shots per constant-heading segment when `abrupt_turns` is set.
    pub turn_every: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            n_buildings: 10,
            bounds_min: [0.0, 0.0],
            bounds_max: [300.0, 300.0],
            building_size: [10.0, 30.0],
            building_height: [12.0, 45.0],
            building_gap: 4.0,
            points_per_building: 3000,
            ground_points: None,
            altitude: 80.0,
            line_spacing: 40.0,
            shot_spacing: 20.0,
            pitch_deg: 40.0,
            abrupt_turns: false,
            turn_every: 3,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let [w, l] = [
            self.bounds_max[0] - self.bounds_min[0],
            self.bounds_max[1] - self.bounds_min[1],
        ];
        if !(w > 0.0 && l > 0.0) {
            return bad(format!("empty bounds {:?}..{:?}", self.bounds_min, self.bounds_max));
        }
        let [s0, s1] = self.building_size;
        if !(s0 > 0.0 && s0 <= s1) {
            return bad(format!("building size range {:?}", self.building_size));
        }
        let [h0, h1] = self.building_height;
        if !(h0 > 0.0 && h0 <= h1) {
            return bad(format!("building height range {:?}", self.building_height));
        }
        if !(self.altitude > h1) {
            return bad(format!("altitude {} not above tallest building {h1}", self.altitude));
        }
        if !(self.line_spacing > 0.0 && self.shot_spacing > 0.0) {
            return bad("scan spacings must be positive".into());
        }
        if !(0.0..90.0).contains(&self.pitch_deg) {
            return bad(format!("pitch {} outside [0, 90)", self.pitch_deg));
        }
        if self.building_gap < 0.0 {
            return bad(format!("negative building gap {}", self.building_gap));
        }
        if self.abrupt_turns && self.turn_every == 0 {
            return bad("turn_every must be positive".into());
        }
        Ok(())
    }

    /// Scene extent including the tallest possible building.
    pub fn bounds(&self) -> AxisAlignedBounds {
        AxisAlignedBounds {
            min: Vector3::new(self.bounds_min[0], self.bounds_min[1], 0.0),
            max: Vector3::new(self.bounds_max[0], self.bounds_max[1], self.building_height[1]),
        }
    }

    pub fn ground_point_count(&self) -> usize {
        self.ground_points
            .unwrap_or_else(|| (2 * self.n_buildings * self.points_per_building).max(1000))
    }
}

/// 640x480 pinhole with a 500 px focal length.
pub fn default_intrinsics() -> Intrinsics {
    Intrinsics {
        fx: 500.0,
        fy: 500.0,
        cx: 320.0,
        cy: 240.0,
        width: 640,
        height: 480,
    }
}

/// `n` points spread over the rectangle by jittered stratification, so no
/// region is left much sparser than the mean density.
fn stratified(rng: &mut SeededRng, n: usize, origin: [f64; 2], size: [f64; 2]) -> Vec<[f64; 2]> {
    if n == 0 {
        return Vec::new();
    }
    let nx = ((n as f64 * size[0] / size[1]).sqrt().round() as usize).max(1);
    let ny = n.div_ceil(nx);
    let cells = nx * ny;
    let (cw, ch) = (size[0] / nx as f64, size[1] / ny as f64);
    (0..n)
        .map(|i| {
            let c = i * cells / n;
            let (cx, cy) = ((c % nx) as f64, (c / nx) as f64);
            [
                origin[0] + (cx + rng.random_unit()) * cw,
                origin[1] + (cy + rng.random_unit()) * ch,
            ]
        })
        .collect()
}

trait UnitDraw {
    fn random_unit(&mut self) -> f64;
}

impl UnitDraw for SeededRng {
    fn random_unit(&mut self) -> f64 {
        uniform(self, 0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Building {
    min: [f64; 2],
    max: [f64; 2],
    height: f64,
}

fn place_buildings(spec: &SynthSpec) -> Result<Vec<Building>> {
    let mut rng = seeded(derive_seed(spec.seed, "buildings"));
    let attempts = 1000 * spec.n_buildings;
    let gap = spec.building_gap;
    let mut placed: Vec<Building> = Vec::with_capacity(spec.n_buildings);
    for _ in 0..attempts {
        if placed.len() == spec.n_buildings {
            break;
        }
        let w = uniform(&mut rng, spec.building_size[0], spec.building_size[1]);
        let l = uniform(&mut rng, spec.building_size[0], spec.building_size[1]);
        let height = uniform(&mut rng, spec.building_height[0], spec.building_height[1]);
        let max_x = spec.bounds_max[0] - w;
        let max_y = spec.bounds_max[1] - l;
        if max_x < spec.bounds_min[0] || max_y < spec.bounds_min[1] {
            continue;
        }
        let x = uniform(&mut rng, spec.bounds_min[0], max_x);
        let y = uniform(&mut rng, spec.bounds_min[1], max_y);
        let b = Building {
            min: [x, y],
            max: [x + w, y + l],
            height,
        };
        let clear = placed.iter().all(|o| {
            b.min[0] >= o.max[0] + gap
                || o.min[0] >= b.max[0] + gap
                || b.min[1] >= o.max[1] + gap
                || o.min[1] >= b.max[1] + gap
        });
        if clear {
            placed.push(b);
        }
    }
    if placed.len() < spec.n_buildings {
        return Err(Error::Placement {
            requested: spec.n_buildings,
            attempts,
        });
    }
    Ok(placed)
}

/// Ground layer followed by each building's roof and walls; point ids are
/// consecutive from 0. `gt_boxes` are the exact footprints in placement order.
pub fn generate_city(spec: &SynthSpec) -> Result<(Vec<Point3D>, Vec<Box2D>)> {
    spec.validate()?;
    let buildings = place_buildings(spec)?;
    let mut points = Vec::new();
    let push = |pos: Vector3<f64>, color: [u8; 3], points: &mut Vec<Point3D>| {
        let mut p = Point3D::new(points.len() as u64, pos);
        p.color = color;
        points.push(p);
    };

    let mut rng = seeded(derive_seed(spec.seed, "ground"));
    let size = [
        spec.bounds_max[0] - spec.bounds_min[0],
        spec.bounds_max[1] - spec.bounds_min[1],
    ];
    for [x, y] in stratified(&mut rng, spec.ground_point_count(), spec.bounds_min, size) {
        push(Vector3::new(x, y, 0.0), GROUND_COLOR, &mut points);
    }

    let mut gt_boxes = Vec::with_capacity(buildings.len());
    for (i, b) in buildings.iter().enumerate() {
        let mut rng = seeded(derive_seed(spec.seed, &format!("building_{i}")));
        let (w, l) = (b.max[0] - b.min[0], b.max[1] - b.min[1]);
        let n_roof = spec.points_per_building / 2;
        let n_wall = spec.points_per_building - n_roof;
        for [x, y] in stratified(&mut rng, n_roof, b.min, [w, l]) {
            push(Vector3::new(x, y, b.height), ROOF_COLOR, &mut points);
        }
        // Walls unrolled into one strip of length equal to the perimeter.
        let perimeter = 2.0 * (w + l);
        for [s, z] in stratified(&mut rng, n_wall, [0.0, 0.0], [perimeter, b.height]) {
            let (x, y) = if s < w {
                (b.min[0] + s, b.min[1])
            } else if s < w + l {
                (b.max[0], b.min[1] + (s - w))
            } else if s < 2.0 * w + l {
                (b.max[0] - (s - w - l), b.max[1])
            } else {
                (b.min[0], b.max[1] - (s - 2.0 * w - l))
            };
            push(Vector3::new(x, y, z), WALL_COLOR, &mut points);
        }
        gt_boxes.push(Box2D::new(b.min, b.max, i));
    }
    Ok((points, gt_boxes))
}

/// Serpentine survey at constant altitude. Lines run along X at
/// `min_y + j * line_spacing`; shots along each line are `shot_spacing` apart.
/// Cameras tilt forward along their heading by `pitch_deg`, with the heading
/// towards the top of the image. With `abrupt_turns`, every other run of
/// `turn_every` shots is yawed 90 degrees to the left.
pub fn generate_grid_scan(spec: &SynthSpec, _intr: &Intrinsics) -> Result<Vec<CameraPose>> {
    spec.validate()?;
    let [x0, y0] = spec.bounds_min;
    let [x1, y1] = spec.bounds_max;
    let (w, l) = (x1 - x0, y1 - y0);
    if spec.line_spacing > l {
        log::warn!("line spacing {} exceeds extent {l}; single scan line", spec.line_spacing);
    }
    let n_lines = (l / spec.line_spacing + 1e-9).floor() as usize + 1;
    let n_shots = (w / spec.shot_spacing + 1e-9).floor() as usize + 1;
    let pitch = spec.pitch_deg.to_radians();
    let mut poses = Vec::with_capacity(n_lines * n_shots);
    for line in 0..n_lines {
        let y = y0 + line as f64 * spec.line_spacing;
        let forward_x = line % 2 == 0;
        for step in 0..n_shots {
            let i = if forward_x { step } else { n_shots - 1 - step };
            let x = x0 + i as f64 * spec.shot_spacing;
            let mut yaw: f64 = if forward_x { 0.0 } else { std::f64::consts::PI };
            if spec.abrupt_turns && (step / spec.turn_every) % 2 == 1 {
                yaw += std::f64::consts::FRAC_PI_2;
            }
            let heading = Vector3::new(yaw.cos(), yaw.sin(), 0.0);
            let forward = heading * pitch.sin() - Vector3::z() * pitch.cos();
            let rotation = look_at_rotation(&forward, &heading);
            let seq = poses.len();
            poses.push(CameraPose::from_center(
                seq as u32 + 1,
                rotation,
                Vector3::new(x, y, spec.altitude),
                SCAN_INTRINSICS_ID,
                format!("scan_{seq:05}.png"),
                seq,
            ));
        }
    }
    Ok(poses)
}

/// Sets each point's track to the images whose frustum contains it (in front
/// of the near plane and projecting inside the image), ascending by image id.
/// Occlusion is ignored.
pub fn synth_tracks(points: &[Point3D], poses: &[CameraPose], intr: &Intrinsics) -> Vec<Point3D> {
    let mut order: Vec<&CameraPose> = poses.iter().collect();
    order.sort_by_key(|p| p.image_id);
    let cams: Vec<(u32, nalgebra::Matrix3<f64>, Vector3<f64>)> = order
        .iter()
        .map(|p| (p.image_id, p.rotation_matrix(), p.translation))
        .collect();
    points
        .iter()
        .map(|p| {
            let mut out = p.clone();
            out.track = cams
                .iter()
                .filter(|(_, r, t)| {
                    let c = r * p.position + t;
                    if !(c.z > NEAR_PLANE) {
                        return false;
                    }
                    let (u, v) = intr.project(&c);
                    intr.contains(u, v)
                })
                .map(|(id, _, _)| *id)
                .collect();
            out
        })
        .collect()
}

/// A generated city, its survey, and the tracked reconstruction.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub scene: SceneModel,
    pub gt_boxes: Vec<Box2D>,
}

pub fn generate_scene(spec: &SynthSpec, intr: &Intrinsics) -> Result<SynthScene> {
    let (points, gt_boxes) = generate_city(spec)?;
    let poses = generate_grid_scan(spec, intr)?;
    let points = synth_tracks(&points, &poses, intr);
    let scene = SceneModel::new(
        poses,
        [(SCAN_INTRINSICS_ID, *intr)].into_iter().collect(),
        points,
    )?;
    Ok(SynthScene { scene, gt_boxes })
}

/// Writes `points.ply`, `sparse/{cameras,images,points3D}.txt` and
/// `gt_boxes.json` under `dir`.
pub fn write_synth_dir(synth: &SynthScene, dir: &Path) -> Result<()> {
    let sparse = dir.join("sparse");
    std::fs::create_dir_all(&sparse).map_err(|e| Error::io(&sparse, e))?;
    let ply = dir.join("points.ply");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&ply).map_err(|e| Error::io(&ply, e))?);
    write_ply(synth.scene.points(), &mut f).map_err(|e| Error::io(&ply, e))?;
    std::io::Write::flush(&mut f).map_err(|e| Error::io(&ply, e))?;
    write_sfm_dir(&synth.scene, &sparse)?;
    write_boxes_json(&synth.gt_boxes, &dir.join("gt_boxes.json"))
}
