//! Seeded random scenes, masks and point sets for oracle tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use viewcurate::rng::{seeded, uniform, SeededRng};
use viewcurate::sampling::BinaryMask;
use viewcurate::scene::look_at_rotation;
use viewcurate::{CameraPose, Intrinsics, Point3D, SceneModel, Vector3};

pub fn index(rng: &mut SeededRng, n: usize) -> usize {
    ((uniform(rng, 0.0, 1.0) * n as f64) as usize).min(n - 1)
}

/// Integer-snapped coordinates so distance ties actually occur.
fn snapped(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo, hi).round()
}

pub fn intrinsics() -> Intrinsics {
    Intrinsics::new(300.0, 300.0, 160.0, 120.0, 320, 240).unwrap()
}

/// Up to 50 cameras and 500 points with random tracks. Some cameras look
/// sideways or upward so angle filters and missed ground hits are exercised.
pub fn random_scene(seed: u64) -> SceneModel {
    let mut rng = seeded(seed);
    let n_cams = 5 + index(&mut rng, 46);
    let n_pts = 20 + index(&mut rng, 481);
    let mut seq: Vec<usize> = (0..n_cams).collect();
    for i in (1..n_cams).rev() {
        let j = index(&mut rng, i + 1);
        seq.swap(i, j);
    }
    let cams: Vec<CameraPose> = (0..n_cams)
        .map(|i| {
            let center = Vector3::new(
                snapped(&mut rng, 0.0, 20.0),
                snapped(&mut rng, 0.0, 20.0),
                snapped(&mut rng, 10.0, 14.0),
            );
            let kind = uniform(&mut rng, 0.0, 1.0);
            let forward = if kind < 0.6 {
                Vector3::new(0.0, 0.0, -1.0)
            } else if kind < 0.9 {
                let t = Vector3::new(snapped(&mut rng, 0.0, 20.0), snapped(&mut rng, 0.0, 20.0), 0.0);
                let d = t - center;
                if d.norm() > 0.0 { d } else { -Vector3::z() }
            } else {
                Vector3::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0), 0.3)
            };
            let rot = look_at_rotation(&forward, &Vector3::x());
            CameraPose::from_center(3 * i as u32 + 1, rot, center, 1, format!("c{i}"), seq[i])
        })
        .collect();
    let ids: Vec<u32> = cams.iter().map(|c| c.image_id).collect();
    let points = (0..n_pts)
        .map(|i| {
            let mut p = Point3D::new(
                i as u64,
                Vector3::new(
                    uniform(&mut rng, 0.0, 20.0),
                    uniform(&mut rng, 0.0, 20.0),
                    snapped(&mut rng, -2.0, 3.0) * 0.5,
                ),
            );
            let density = uniform(&mut rng, 0.0, 0.4);
            p.track = ids.iter().copied().filter(|_| uniform(&mut rng, 0.0, 1.0) < density).collect();
            p
        })
        .collect();
    SceneModel::new(cams, BTreeMap::from([(1, intrinsics())]), points).unwrap()
}

pub fn random_mask(seed: u64) -> BinaryMask {
    let mut rng = seeded(seed ^ 0x5eed);
    let w = 4 + index(&mut rng, 37);
    let h = 4 + index(&mut rng, 37);
    let density = uniform(&mut rng, 0.2, 0.6);
    let mut mask = BinaryMask::new(w, h, [uniform(&mut rng, -5.0, 5.0), uniform(&mut rng, -5.0, 5.0)], 0.5);
    for i in 0..w * h {
        mask.bits[i] = uniform(&mut rng, 0.0, 1.0) < density;
    }
    mask
}

/// Points with many repeated heights.
pub fn random_points(seed: u64) -> Vec<Point3D> {
    let mut rng = seeded(seed ^ 0xface);
    let n = 1 + index(&mut rng, 500);
    (0..n)
        .map(|i| {
            Point3D::new(
                i as u64,
                Vector3::new(uniform(&mut rng, 0.0, 9.0), uniform(&mut rng, 0.0, 9.0), snapped(&mut rng, 0.0, 30.0)),
            )
        })
        .collect()
}
