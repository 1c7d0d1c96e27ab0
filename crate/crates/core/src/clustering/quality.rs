use serde::{Deserialize, Serialize};

use super::{ClusterSet, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::scene::SceneModel;

/// Intra-cluster overlap measured in shared 3D points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Mean shared points over all unordered member pairs, per cluster.
    pub per_cluster_mean: Vec<f64>,
    /// Average of `per_cluster_mean`.
    pub global_mean: f64,
    /// Smallest entry of `per_cluster_mean`.
    pub global_min: f64,
    /// Fraction of all member pairs sharing no point.
    pub zero_pair_fraction: f64,
    /// Clusters containing a member that shares no point with the center.
    pub flagged_clusters: Vec<usize>,
}

pub fn cluster_quality(
    _scene: &SceneModel,
    sim: &SimilarityMatrix,
    cs: &ClusterSet,
) -> Result<QualityReport> {
    let groups: Vec<(usize, &[u32])> = cs
        .clusters
        .iter()
        .map(|c| (c.cluster_id, c.members.as_slice()))
        .collect();
    group_quality(sim, &groups)
}

/// [`cluster_quality`] over arbitrary `(id, members)` groups, first member
/// taken as the center. Groups must be non-empty.
pub fn group_quality(sim: &SimilarityMatrix, groups: &[(usize, &[u32])]) -> Result<QualityReport> {
    let mut per_cluster_mean = Vec::with_capacity(groups.len());
    let mut flagged_clusters = Vec::new();
    let (mut pairs, mut zero_pairs) = (0usize, 0usize);
    for &(cluster_id, members) in groups {
        if members.is_empty() {
            return Err(Error::EmptyResult(format!("group {cluster_id} has no members")));
        }
        let idx = members
            .iter()
            .map(|&id| {
                sim.index_of(id).ok_or_else(|| {
                    Error::Reference(format!("cluster {cluster_id} member {id} not in similarity matrix"))
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        let (mut sum, mut n) = (0u64, 0usize);
        for a in 0..idx.len() {
            for b in (a + 1)..idx.len() {
                let s = sim.at(idx[a], idx[b]);
                sum += u64::from(s);
                n += 1;
                if s == 0 {
                    zero_pairs += 1;
                }
            }
        }
        pairs += n;
        per_cluster_mean.push(if n == 0 { 0.0 } else { sum as f64 / n as f64 });
        if idx[1..].iter().any(|&j| sim.at(idx[0], j) == 0) {
            flagged_clusters.push(cluster_id);
        }
    }
    let count = per_cluster_mean.len();
    let global_mean = if count == 0 {
        0.0
    } else {
        per_cluster_mean.iter().sum::<f64>() / count as f64
    };
    let global_min = per_cluster_mean.iter().cloned().reduce(f64::min).unwrap_or(0.0);
    let zero_pair_fraction = if pairs == 0 { 0.0 } else { zero_pairs as f64 / pairs as f64 };
    Ok(QualityReport {
        per_cluster_mean,
        global_mean,
        global_min,
        zero_pair_fraction,
        flagged_clusters,
    })
}
