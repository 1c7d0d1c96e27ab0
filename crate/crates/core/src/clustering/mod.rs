//! Fixed-size view clustering.
//!
//! Four strategies group the images of a scene into clusters of exactly `k`
//! views: capture order, XY grid cells with an optical-axis agreement filter,
//! ground footprints of the optical axis, and shared 3D points. Every method
//! is deterministic; all ties resolve by ascending image id.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::SceneModel;

mod grid;
mod quality;
mod ray;
mod sequence;
mod sfm;
mod similarity;

pub(crate) use grid::cells_along;
pub use grid::grid_clusters;
pub use quality::{cluster_quality, group_quality, QualityReport};
pub use ray::{estimate_ground_height, ray_ground_clusters};
pub use sequence::sequence_clusters;
pub use sfm::sfm_clusters;
pub use similarity::{shared_point_similarity, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sequence,
    Grid,
    Ray,
    Sfm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sequence, Method::Grid, Method::Ray, Method::Sfm];

    /// Label used in cluster manifests.
    pub fn manifest_label(self) -> &'static str {
        match self {
            Method::Sequence => "sequence",
            Method::Grid => "grid",
            Method::Ray => "ray_ground",
            Method::Sfm => "sfm_shared",
        }
    }

    pub fn from_manifest_label(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.manifest_label() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sequence => "sequence",
            Method::Grid => "grid",
            Method::Ray => "ray",
            Method::Sfm => "sfm",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequence" => Ok(Method::Sequence),
            "grid" => Ok(Method::Grid),
            "ray" | "ray_ground" => Ok(Method::Ray),
            "sfm" | "sfm_shared" => Ok(Method::Sfm),
            other => Err(Error::InvalidConfig(format!("unknown clustering method `{other}`"))),
        }
    }
}

/// Height of the flat ground plane used by ray clustering.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "GroundHeightRepr", try_from = "GroundHeightRepr")]
pub enum GroundHeight {
    Fixed(f64),
    /// Median height of the lowest 5% of scene points.
    #[default]
    Estimate,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GroundHeightRepr {
    Number(f64),
    Keyword(String),
}

impl From<GroundHeight> for GroundHeightRepr {
    fn from(g: GroundHeight) -> Self {
        match g {
            GroundHeight::Fixed(h) => GroundHeightRepr::Number(h),
            GroundHeight::Estimate => GroundHeightRepr::Keyword("estimate".into()),
        }
    }
}

impl TryFrom<GroundHeightRepr> for GroundHeight {
    type Error = String;

    fn try_from(r: GroundHeightRepr) -> std::result::Result<Self, String> {
        match r {
            GroundHeightRepr::Number(h) => Ok(GroundHeight::Fixed(h)),
            GroundHeightRepr::Keyword(k) if k == "estimate" => Ok(GroundHeight::Estimate),
            GroundHeightRepr::Keyword(k) => Err(format!("ground height must be a number or \"estimate\", got `{k}`")),
        }
    }
}

impl FromStr for GroundHeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "estimate" {
            return Ok(GroundHeight::Estimate);
        }
        s.parse()
            .map(GroundHeight::Fixed)
            .map_err(|_| Error::InvalidConfig(format!("bad ground height `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    /// Images per cluster.
    pub k: usize,
    /// Number of clusters for the center-based methods; `None` means
    /// `floor(n_images / k)`.
    pub num_clusters: Option<usize>,
    pub angle_threshold_deg: f64,
    pub ground_height: GroundHeight,
    /// Grid spacing in meters; `None` means a tenth of the camera XY extent.
    pub grid_cell_size: Option<f64>,
    pub seed: u64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            k: 20,
            num_clusters: None,
            angle_threshold_deg: 45.0,
            ground_height: GroundHeight::Estimate,
            grid_cell_size: None,
            seed: 0,
        }
    }
}

impl ClusteringConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!("k must be >= 2, got {}", self.k)));
        }
        if self.num_clusters == Some(0) {
            return Err(Error::InvalidConfig("num_clusters must be >= 1".into()));
        }
        if !(self.angle_threshold_deg > 0.0 && self.angle_threshold_deg <= 180.0) {
            return Err(Error::InvalidConfig(format!(
                "angle threshold {} outside (0, 180]",
                self.angle_threshold_deg
            )));
        }
        if let Some(s) = self.grid_cell_size {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig(format!("grid cell size {s} must be > 0")));
            }
        }
        Ok(())
    }

    /// Requested cluster count for a scene with `n_images` images.
    pub fn cluster_count(&self, n_images: usize) -> usize {
        self.num_clusters.unwrap_or((n_images / self.k).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: usize,
    pub center_image: u32,
    /// Exactly `k` distinct image ids, center first.
    pub members: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub method: Method,
    pub config: ClusteringConfig,
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    /// Numbers clusters consecutively from 0 in the given order.
    pub(crate) fn from_groups(
        method: Method,
        config: &ClusteringConfig,
        groups: Vec<Vec<u32>>,
    ) -> Self {
        let clusters = groups
            .into_iter()
            .enumerate()
            .map(|(cluster_id, members)| Cluster {
                cluster_id,
                center_image: members[0],
                members,
            })
            .collect();
        Self {
            method,
            config: config.clone(),
            clusters,
        }
    }
}

/// Runs `method` on `scene`, computing the similarity matrix when needed.
pub fn cluster(scene: &SceneModel, method: Method, cfg: &ClusteringConfig) -> Result<ClusterSet> {
    match method {
        Method::Sequence => sequence_clusters(scene, cfg),
        Method::Grid => grid_clusters(scene, cfg),
        Method::Ray => ray_ground_clusters(scene, cfg),
        Method::Sfm => {
            let sim = shared_point_similarity(scene);
            sfm_clusters(scene, &sim, cfg)
        }
    }
}

pub(crate) fn require_views(scene: &SceneModel, k: usize) -> Result<()> {
    let n = scene.num_cameras();
    if n < k {
        return Err(Error::InsufficientViews {
            needed: k,
            available: n,
        });
    }
    Ok(())
}

/// Greedy farthest-point order over `sites` (sorted by ascending id), starting
/// from the first site. Ties pick the lowest id. Returns at most `count`
/// indices into `sites`.
pub(crate) fn farthest_point_sampling(sites: &[(u32, Vector3<f64>)], count: usize) -> Vec<usize> {
    let count = count.min(sites.len());
    if count == 0 {
        return Vec::new();
    }
    let mut chosen = vec![false; sites.len()];
    let mut min_dist = vec![f64::INFINITY; sites.len()];
    let mut order = Vec::with_capacity(count);
    let mut next = 0;
    loop {
        chosen[next] = true;
        order.push(next);
        if order.len() == count {
            return order;
        }
        let c = sites[next].1;
        let mut best: Option<usize> = None;
        for (i, (_, p)) in sites.iter().enumerate() {
            if chosen[i] {
                continue;
            }
            min_dist[i] = min_dist[i].min((p - c).norm());
            if best.is_none_or(|b| min_dist[i] > min_dist[b]) {
                best = Some(i);
            }
        }
        next = best.expect("count <= sites.len()");
    }
}

/// Ids of the `take` candidates closest by `key`, ties by ascending id.
pub(crate) fn nearest_by<F>(candidates: &[(u32, Vector3<f64>)], take: usize, mut key: F) -> Vec<u32>
where
    F: FnMut(&Vector3<f64>) -> f64,
{
    let mut ranked: Vec<(f64, u32)> = candidates.iter().map(|(id, p)| (key(p), *id)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().take(take).map(|(_, id)| id).collect()
}
