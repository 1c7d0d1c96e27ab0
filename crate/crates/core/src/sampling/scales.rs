use super::{DomeSpec, DomeTag, SamplingConfig};
use crate::clustering::cells_along;
use crate::error::{Error, Result};
use crate::scene::{AxisAlignedBounds, Plane};

/// Upper bound on the number of grid scales.
pub const MAX_SCALES: usize = 6;

/// Grid cell sizes for multiscale dome placement.
///
/// Starts at the larger XY extent and halves while the cell stays at least
/// `stop_factor` times the scene height, emitting at most [`MAX_SCALES`]
/// sizes and always the first.
pub fn derive_scales(bounds: &AxisAlignedBounds, stop_factor: f64) -> Result<Vec<f64>> {
    let extent = bounds.width().max(bounds.length());
    if !(extent > 0.0) {
        return Err(Error::InvalidConfig("scene bounds are degenerate in XY".into()));
    }
    let floor = stop_factor * bounds.height();
    let mut scales = vec![extent];
    while scales.len() < MAX_SCALES {
        let next = scales[scales.len() - 1] / 2.0;
        if next < floor {
            break;
        }
        scales.push(next);
    }
    Ok(scales)
}

/// One dome per grid cell at every derived scale, row-major within a scale.
/// Dome centers are the cell centers lifted onto `ground`.
pub fn grid_domes(
    bounds: &AxisAlignedBounds,
    ground: &Plane,
    cfg: &SamplingConfig,
) -> Result<Vec<DomeSpec>> {
    cfg.validate()?;
    let az = cfg.az_range()?;
    let el = cfg.el_range()?;
    let mut domes = Vec::new();
    for (scale, cell) in derive_scales(bounds, cfg.scale_stop_factor)?.into_iter().enumerate() {
        let ncols = cells_along(bounds.width(), cell);
        let nrows = cells_along(bounds.length(), cell);
        for row in 0..nrows {
            for col in 0..ncols {
                let x = bounds.min.x + (col as f64 + 0.5) * cell;
                let y = bounds.min.y + (row as f64 + 0.5) * cell;
                domes.push(DomeSpec::new(
                    ground.lift_xy(x, y),
                    cfg.dome_radius_factor_grid * cell,
                    az,
                    el,
                    DomeTag::Grid { scale, row, col },
                )?);
            }
        }
    }
    Ok(domes)
}
