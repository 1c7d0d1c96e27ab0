use nalgebra::Vector3;

use super::{farthest_point_sampling, require_views, ClusterSet, ClusteringConfig, Method, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::scene::SceneModel;

/// Clusters by shared 3D points.
///
/// Centers are spread over the scene by farthest-point sampling of camera
/// centers (seeded with the lowest image id). Each cluster is the center plus
/// the `k - 1` images sharing the most points with it, ties by ascending id.
pub fn sfm_clusters(
    scene: &SceneModel,
    sim: &SimilarityMatrix,
    cfg: &ClusteringConfig,
) -> Result<ClusterSet> {
    cfg.validate()?;
    require_views(scene, cfg.k)?;
    if !sim.ids.iter().copied().eq(scene.cameras().keys().copied()) {
        return Err(Error::Reference(
            "similarity matrix does not cover the scene's images".into(),
        ));
    }
    let sites: Vec<(u32, Vector3<f64>)> = scene
        .cameras()
        .values()
        .map(|c| (c.image_id, c.center()))
        .collect();
    let count = cfg.cluster_count(scene.num_cameras());
    let groups = farthest_point_sampling(&sites, count)
        .into_iter()
        .map(|ci| {
            // sites and sim rows share the ascending-id order.
            let row = sim.row(ci);
            let mut others: Vec<usize> = (0..sites.len()).filter(|&j| j != ci).collect();
            others.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
            let mut members = vec![sites[ci].0];
            members.extend(others.into_iter().take(cfg.k - 1).map(|j| sim.ids[j]));
            members
        })
        .collect();
    Ok(ClusterSet::from_groups(Method::Sfm, cfg, groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::shared_point_similarity;
    use crate::clustering::test_support::{nadir, scene_with, tracked};

    fn three_image_scene(shared_01: u64, shared_02: u64) -> SceneModel {
        let cams = (0..3)
            .map(|i| nadir(i, Vector3::new(f64::from(i) * 10.0, 0.0, 50.0), i as usize))
            .collect();
        let mut pts = Vec::new();
        for _ in 0..shared_01 {
            pts.push(tracked(pts.len() as u64, &[0, 1]));
        }
        for _ in 0..shared_02 {
            pts.push(tracked(pts.len() as u64, &[0, 2]));
        }
        scene_with(cams, pts)
    }

    fn first_cluster(scene: &SceneModel) -> Vec<u32> {
        let sim = shared_point_similarity(scene);
        let mut cfg = ClusteringConfig::with_k(2);
        cfg.num_clusters = Some(1);
        sfm_clusters(scene, &sim, &cfg).unwrap().clusters[0].members.clone()
    }

    #[test]
    fn picks_argmax_of_row() {
        assert_eq!(first_cluster(&three_image_scene(5, 1)), vec![0, 1]);
        assert_eq!(first_cluster(&three_image_scene(1, 5)), vec![0, 2]);
    }

    #[test]
    fn ties_break_by_lower_id() {
        assert_eq!(first_cluster(&three_image_scene(4, 4)), vec![0, 1]);
    }

    #[test]
    fn rejects_mismatched_matrix() {
        let scene = three_image_scene(1, 1);
        let other = scene_with(vec![nadir(0, Vector3::zeros(), 0), nadir(1, Vector3::zeros(), 1)], vec![]);
        let sim = shared_point_similarity(&other);
        assert!(matches!(
            sfm_clusters(&scene, &sim, &ClusteringConfig::with_k(2)),
            Err(Error::Reference(_))
        ));
    }
}
