use nalgebra::Vector3;

use super::{DomeSpec, PoseMode, SampledPose, SamplingConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, uniform};
use crate::scene::{look_at_rotation, CameraPose};

/// Azimuth turns of the spiral over a full dome traversal.
const SPIRAL_TURNS: f64 = 3.0;

/// Samples `n` camera poses on `dome`, each looking at the dome center with
/// world +Z as the image-up hint.
///
/// Random mode draws azimuth and elevation uniformly from the dome ranges
/// using a stream derived from `seed` and the dome tag. Spiral mode winds
/// three turns in azimuth while elevation descends linearly from the top of
/// the range to the bottom.
pub fn dome_poses(
    dome: &DomeSpec,
    n: usize,
    mode: PoseMode,
    seed: u64,
    intrinsics_id: u32,
    first_image_id: u32,
) -> Result<Vec<SampledPose>> {
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    let [az0, az1] = dome.az_range;
    let [el0, el1] = dome.el_range;
    let angles: Vec<(f64, f64)> = match mode {
        PoseMode::Random => {
            let mut rng = seeded(derive_seed(seed, &dome.tag.label()));
            (0..n)
                .map(|_| {
                    let az = uniform(&mut rng, az0, az1);
                    let el = uniform(&mut rng, el0, el1);
                    (az, el)
                })
                .collect()
        }
        PoseMode::Spiral => (0..n)
            .map(|i| {
                let turn = (i as f64 * SPIRAL_TURNS / n as f64).fract();
                let az = az0 + (az1 - az0) * turn;
                let u = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                // Exact at both ends of the range.
                let el = el1 * (1.0 - u) + el0 * u;
                (az, el)
            })
            .collect(),
    };

    let center = dome.center();
    let label = dome.tag.label();
    Ok(angles
        .into_iter()
        .enumerate()
        .map(|(i, (az, el))| {
            let dir = Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
            let position = center + dir * dome.radius;
            let rotation = look_at_rotation(&(center - position), &Vector3::z());
            let image_id = first_image_id + i as u32;
            SampledPose {
                pose: CameraPose::from_center(
                    image_id,
                    rotation,
                    position,
                    intrinsics_id,
                    format!("{label}_{i:03}"),
                    i,
                ),
                source_dome: dome.tag.clone(),
                azimuth: az,
                elevation: el,
                synthetic: true,
            }
        })
        .collect())
}

/// Samples `cfg.poses_per_dome` poses on every dome, numbering image ids and
/// capture indices consecutively from `first_image_id` in dome order.
pub fn sample_domes(
    domes: &[DomeSpec],
    cfg: &SamplingConfig,
    intrinsics_id: u32,
    first_image_id: u32,
) -> Result<Vec<SampledPose>> {
    let mut out = Vec::with_capacity(domes.len() * cfg.poses_per_dome);
    for dome in domes {
        let next = first_image_id + out.len() as u32;
        for mut p in dome_poses(dome, cfg.poses_per_dome, cfg.pose_mode, cfg.seed, intrinsics_id, next)? {
            p.pose.seq_index = out.len();
            out.push(p);
        }
    }
    Ok(out)
}
