use serde::Serialize;

use crate::scene::SceneModel;

/// Dense symmetric matrix of shared 3D point counts between images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimilarityMatrix {
    /// Image ids in ascending order; row/column `i` belongs to `ids[i]`.
    pub ids: Vec<u32>,
    counts: Vec<u32>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, image_id: u32) -> Option<usize> {
        self.ids.binary_search(&image_id).ok()
    }

    /// Entry by matrix index.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.ids.len() + j]
    }

    /// Entry by image id; `None` when either id is unknown.
    pub fn get(&self, a: u32, b: u32) -> Option<u32> {
        Some(self.at(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let n = self.ids.len();
        &self.counts[i * n..(i + 1) * n]
    }

    /// True when no point is tracked by any image.
    pub fn is_degenerate(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

/// Counts, for every image pair, the points whose tracks contain both.
///
/// Work is proportional to the sum of squared track lengths rather than the
/// number of image pairs.
pub fn shared_point_similarity(scene: &SceneModel) -> SimilarityMatrix {
    let ids: Vec<u32> = scene.cameras().keys().copied().collect();
    let n = ids.len();
    let mut counts = vec![0u32; n * n];
    let mut rows: Vec<usize> = Vec::new();
    for p in scene.points() {
        rows.clear();
        rows.extend(p.track.iter().filter_map(|id| ids.binary_search(id).ok()));
        rows.sort_unstable();
        for (a, &i) in rows.iter().enumerate() {
            let base = i * n;
            for &j in &rows[a..] {
                counts[base + j] += 1;
            }
        }
    }
    // Mirror the upper triangle.
    for i in 0..n {
        for j in (i + 1)..n {
            counts[j * n + i] = counts[i * n + j];
        }
    }
    let sim = SimilarityMatrix { ids, counts };
    if sim.is_degenerate() {
        log::warn!("no tracked points: shared-point similarity is all zeros");
    }
    sim
}
