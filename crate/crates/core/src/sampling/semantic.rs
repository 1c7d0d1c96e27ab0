use super::{
    extract_boxes, fit_plane_lsq, grid_domes, merge_nearest_boxes, occupancy_mask,
    percentile_slice, BinaryMask, Box2D, DomeSpec, DomeTag, SamplingConfig,
};
use crate::error::Result;
use crate::scene::{lowest_fraction, scene_bounds, Plane, Point3D};

/// One dome per box: centered on the box centroid lifted onto `ground`, with
/// radius `cfg.dome_radius_factor_box` times the box diagonal. Boxes with a
/// zero diagonal are skipped.
pub fn semantic_domes(boxes: &[Box2D], ground: &Plane, cfg: &SamplingConfig) -> Result<Vec<DomeSpec>> {
    let az = cfg.az_range()?;
    let el = cfg.el_range()?;
    let mut domes = Vec::with_capacity(boxes.len());
    for (index, b) in boxes.iter().enumerate() {
        let diag = b.diagonal();
        if !(diag > 0.0) {
            log::warn!("skipping degenerate box {index} at {:?}", b.min);
            continue;
        }
        let [cx, cy] = b.centroid();
        domes.push(DomeSpec::new(
            ground.lift_xy(cx, cy),
            cfg.dome_radius_factor_box * diag,
            az,
            el,
            DomeTag::Box {
                index,
                members: b.member_ids.iter().copied().collect(),
            },
        )?);
    }
    Ok(domes)
}

/// Intermediate products of building-targeted dome placement.
#[derive(Debug, Clone)]
pub struct SemanticOutput {
    pub ground: Plane,
    pub threshold: f64,
    pub mask: BinaryMask,
    /// Boxes straight from the mask.
    pub detected: Vec<Box2D>,
    /// Detected boxes plus nearest-neighbor merges.
    pub boxes: Vec<Box2D>,
    pub domes: Vec<DomeSpec>,
}

/// Ground plane fit to the lowest 5% of points.
fn ground_plane(points: &[Point3D]) -> Result<Plane> {
    fit_plane_lsq(&lowest_fraction(points, 0.05))
}

/// Slice, rasterize, box, merge, and place one dome per resulting box.
pub fn semantic_sampling(points: &[Point3D], cfg: &SamplingConfig) -> Result<SemanticOutput> {
    cfg.validate()?;
    let bounds = scene_bounds(points)?;
    let ground = ground_plane(points)?;
    let (threshold, above) = percentile_slice(points, cfg.slice_percentile)?;
    let mask = occupancy_mask(&above, &bounds, cfg)?;
    let detected = extract_boxes(&mask, cfg.min_component_area);
    let boxes = if detected.is_empty() {
        Vec::new()
    } else {
        merge_nearest_boxes(&detected, cfg.merge_m)
    };
    let domes = semantic_domes(&boxes, &ground, cfg)?;
    Ok(SemanticOutput {
        ground,
        threshold,
        mask,
        detected,
        boxes,
        domes,
    })
}

/// Multiscale grid domes over the point cloud extent.
pub fn grid_sampling(points: &[Point3D], cfg: &SamplingConfig) -> Result<(Plane, Vec<DomeSpec>)> {
    let bounds = scene_bounds(points)?;
    let ground = ground_plane(points)?;
    Ok((ground, grid_domes(&bounds, &ground, cfg)?))
}
