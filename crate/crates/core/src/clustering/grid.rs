use nalgebra::Vector3;

use super::{nearest_by, require_views, ClusterSet, ClusteringConfig, Method};
use crate::error::{Error, Result};
use crate::scene::SceneModel;

/// Number of cells of size `cell` needed to cover `extent` (at least one).
pub(crate) fn cells_along(extent: f64, cell: f64) -> usize {
    ((extent / cell - 1e-9).ceil() as usize).max(1)
}

/// Angle in degrees between two unit vectors.
pub(crate) fn angle_deg(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos().to_degrees()
}

/// One candidate cluster per grid cell over the camera XY extent.
///
/// Cameras are ranked by XY distance to the cell center; the nearest is the
/// anchor. Cameras whose optical axis deviates from the anchor's by more than
/// the angle threshold are discarded, and the `k` nearest survivors form the
/// cluster. Cells with fewer than `k` survivors yield nothing. Cells are
/// visited row-major (rows along +Y, columns along +X).
pub fn grid_clusters(scene: &SceneModel, cfg: &ClusteringConfig) -> Result<ClusterSet> {
    cfg.validate()?;
    require_views(scene, cfg.k)?;

    let cams: Vec<(u32, Vector3<f64>, Vector3<f64>)> = scene
        .cameras()
        .values()
        .map(|c| (c.image_id, c.center(), c.optical_axis()))
        .collect();
    let sites: Vec<(u32, Vector3<f64>)> = cams.iter().map(|(id, c, _)| (*id, *c)).collect();
    let axis_of = |id: u32| {
        let i = cams.binary_search_by_key(&id, |c| c.0).expect("id from cams");
        cams[i].2
    };

    let (mut lo, mut hi) = (sites[0].1, sites[0].1);
    for (_, c) in &sites {
        lo = lo.inf(c);
        hi = hi.sup(c);
    }
    let (width, length) = (hi.x - lo.x, hi.y - lo.y);
    let cell = match cfg.grid_cell_size {
        Some(s) => s,
        None if width.max(length) > 0.0 => width.max(length) / 10.0,
        None => 1.0,
    };
    let (ncols, nrows) = (cells_along(width, cell), cells_along(length, cell));

    let mut groups = Vec::new();
    for row in 0..nrows {
        for col in 0..ncols {
            let cx = lo.x + (col as f64 + 0.5) * cell;
            let cy = lo.y + (row as f64 + 0.5) * cell;
            let ranked = nearest_by(&sites, sites.len(), |p| {
                (p.x - cx).powi(2) + (p.y - cy).powi(2)
            });
            let anchor_axis = axis_of(ranked[0]);
            let survivors: Vec<u32> = ranked
                .into_iter()
                .filter(|&id| angle_deg(&axis_of(id), &anchor_axis) <= cfg.angle_threshold_deg)
                .take(cfg.k)
                .collect();
            if survivors.len() == cfg.k {
                groups.push(survivors);
            }
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no grid cell has {} cameras within {} degrees of its anchor",
            cfg.k, cfg.angle_threshold_deg
        )));
    }
    Ok(ClusterSet::from_groups(Method::Grid, cfg, groups))
}
