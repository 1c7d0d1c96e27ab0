use nalgebra::Vector3;

use super::{farthest_point_sampling, nearest_by, ClusterSet, ClusteringConfig, GroundHeight, Method};
use crate::error::{Error, Result};
use crate::scene::{lowest_fraction, ray_plane_intersect, Plane, Point3D, SceneModel};

/// Median Z of the lowest 5% of points (at least one point).
pub fn estimate_ground_height(points: &[Point3D]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("ground height estimate needs scene points"));
    }
    let low = lowest_fraction(points, 0.05);
    let n = low.len();
    let mid = n / 2;
    Ok(if n % 2 == 1 {
        low[mid].position.z
    } else {
        0.5 * (low[mid - 1].position.z + low[mid].position.z)
    })
}

/// Clusters by the ground footprint of each camera's optical axis.
///
/// Centers are chosen by farthest-point sampling over footprints, seeded with
/// the lowest image id that hits the ground. Each cluster is the center plus
/// the `k - 1` cameras whose footprints lie nearest to it.
pub fn ray_ground_clusters(scene: &SceneModel, cfg: &ClusteringConfig) -> Result<ClusterSet> {
    cfg.validate()?;
    super::require_views(scene, cfg.k)?;
    let height = match cfg.ground_height {
        GroundHeight::Fixed(h) => h,
        GroundHeight::Estimate => estimate_ground_height(scene.points())?,
    };
    let ground = Plane::horizontal(height);
    let footprints: Vec<(u32, Vector3<f64>)> = scene
        .cameras()
        .values()
        .filter_map(|c| ray_plane_intersect(&c.optical_axis_ray(), &ground).map(|p| (c.image_id, p)))
        .collect();
    if footprints.len() < cfg.k {
        return Err(Error::InsufficientViews {
            needed: cfg.k,
            available: footprints.len(),
        });
    }

    let count = cfg.cluster_count(scene.num_cameras());
    let groups = farthest_point_sampling(&footprints, count)
        .into_iter()
        .map(|ci| {
            let (center_id, center) = footprints[ci];
            let others: Vec<(u32, Vector3<f64>)> = footprints
                .iter()
                .filter(|(id, _)| *id != center_id)
                .cloned()
                .collect();
            let mut members = vec![center_id];
            members.extend(nearest_by(&others, cfg.k - 1, |p| (p - center).norm_squared()));
            members
        })
        .collect();
    Ok(ClusterSet::from_groups(Method::Ray, cfg, groups))
}
