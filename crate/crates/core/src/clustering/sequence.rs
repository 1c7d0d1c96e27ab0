use super::{require_views, ClusterSet, ClusteringConfig, Method};
use crate::error::Result;
use crate::scene::SceneModel;

/// Consecutive disjoint groups of `k` images in capture order. A trailing
/// remainder shorter than `k` is dropped.
pub fn sequence_clusters(scene: &SceneModel, cfg: &ClusteringConfig) -> Result<ClusterSet> {
    cfg.validate()?;
    require_views(scene, cfg.k)?;
    let mut ordered: Vec<(usize, u32)> = scene
        .cameras()
        .values()
        .map(|c| (c.seq_index, c.image_id))
        .collect();
    ordered.sort_unstable();
    let groups = ordered
        .chunks_exact(cfg.k)
        .map(|chunk| chunk.iter().map(|&(_, id)| id).collect())
        .collect();
    Ok(ClusterSet::from_groups(Method::Sequence, cfg, groups))
}
