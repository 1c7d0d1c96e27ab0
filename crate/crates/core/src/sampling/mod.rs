//! Synthetic view sampling.
//!
//! Virtual domes are placed over the scene either on a multiscale grid or
//! over detected buildings, and camera poses looking at each dome center are
//! drawn from the dome surface. Building detection slices the point cloud at
//! a height percentile, rasterizes the rooftop points top-down, and turns the
//! connected components into world-space boxes.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::CameraPose;

mod boxes;
mod dome;
mod mask;
mod plane;
mod scales;
mod semantic;

pub use boxes::{extract_boxes, merge_nearest_boxes, read_boxes_json, write_boxes_json, Box2D};
pub use dome::{dome_poses, sample_domes};
pub use mask::{morphological_closing, occupancy_mask, BinaryMask};
pub use plane::{fit_plane_lsq, percentile_slice};
pub use scales::{derive_scales, grid_domes, MAX_SCALES};
pub use semantic::{grid_sampling, semantic_domes, semantic_sampling, SemanticOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoseMode {
    #[default]
    Random,
    Spiral,
}

impl std::str::FromStr for PoseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PoseMode::Random),
            "spiral" => Ok(PoseMode::Spiral),
            other => Err(Error::InvalidConfig(format!("unknown pose mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    /// Height percentile for the rooftop slice, in (0, 100).
    pub slice_percentile: f64,
    /// Merge each box with its 1..=merge_m nearest neighbors.
    pub merge_m: usize,
    /// Occupancy raster size along the long side, in pixels.
    pub mask_resolution: usize,
    pub min_component_area: usize,
    pub closing_iterations: usize,
    /// Grid dome radius as a multiple of the cell size.
    pub dome_radius_factor_grid: f64,
    /// Building dome radius as a multiple of the box diagonal.
    pub dome_radius_factor_box: f64,
    pub poses_per_dome: usize,
    pub pose_mode: PoseMode,
    /// Elevation range in degrees above the horizon.
    pub el_range_deg: [f64; 2],
    /// Azimuth range in degrees.
    pub az_range_deg: [f64; 2],
    /// Grid halving stops once the cell drops below this multiple of the
    /// scene height.
    pub scale_stop_factor: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            slice_percentile: 70.0,
            merge_m: 3,
            mask_resolution: 512,
            min_component_area: 9,
            closing_iterations: 1,
            dome_radius_factor_grid: 0.75,
            dome_radius_factor_box: 1.0,
            poses_per_dome: 20,
            pose_mode: PoseMode::Random,
            el_range_deg: [30.0, 80.0],
            az_range_deg: [0.0, 360.0],
            scale_stop_factor: 2.0,
            seed: 0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.slice_percentile > 0.0 && self.slice_percentile < 100.0) {
            return bad(format!("slice percentile {} outside (0, 100)", self.slice_percentile));
        }
        if self.merge_m < 1 {
            return bad("merge_m must be >= 1".into());
        }
        if self.mask_resolution < 8 {
            return bad(format!("mask resolution {} < 8", self.mask_resolution));
        }
        if self.poses_per_dome < 1 {
            return bad("poses_per_dome must be >= 1".into());
        }
        if !(self.dome_radius_factor_grid > 0.0 && self.dome_radius_factor_box > 0.0) {
            return bad("dome radius factors must be positive".into());
        }
        if !(self.scale_stop_factor > 0.0) {
            return bad("scale stop factor must be positive".into());
        }
        self.el_range()?;
        self.az_range()?;
        Ok(())
    }

    pub fn el_range(&self) -> Result<[f64; 2]> {
        let [lo, hi] = self.el_range_deg;
        if !(0.0..=90.0).contains(&lo) || !(0.0..=90.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidConfig(format!("elevation range {lo}..{hi} deg")));
        }
        Ok([lo.to_radians(), hi.to_radians()])
    }

    pub fn az_range(&self) -> Result<[f64; 2]> {
        let [lo, hi] = self.az_range_deg;
        if !(0.0..=360.0).contains(&lo) || !(0.0..=360.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidConfig(format!("azimuth range {lo}..{hi} deg")));
        }
        Ok([lo.to_radians(), hi.to_radians()])
    }
}

/// Where a dome came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomeTag {
    Grid { scale: usize, row: usize, col: usize },
    Box { index: usize, members: Vec<usize> },
}

impl DomeTag {
    /// Stable label, also used to derive per-dome random streams.
    pub fn label(&self) -> String {
        match self {
            DomeTag::Grid { scale, row, col } => format!("grid_s{scale}_r{row}_c{col}"),
            DomeTag::Box { index, .. } => format!("box_{index}"),
        }
    }
}

/// A virtual hemisphere (or band of it) above a ground point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomeSpec {
    pub center: [f64; 3],
    pub radius: f64,
    /// Azimuth range in radians within [0, 2pi].
    pub az_range: [f64; 2],
    /// Elevation range in radians within [0, pi/2].
    pub el_range: [f64; 2],
    pub tag: DomeTag,
}

impl DomeSpec {
    pub fn new(
        center: Vector3<f64>,
        radius: f64,
        az_range: [f64; 2],
        el_range: [f64; 2],
        tag: DomeTag,
    ) -> Result<Self> {
        let eps = 1e-12;
        let ok = radius > 0.0
            && radius.is_finite()
            && el_range[0] >= 0.0
            && el_range[0] <= el_range[1]
            && el_range[1] <= PI / 2.0 + eps
            && az_range[0] >= 0.0
            && az_range[0] <= az_range[1]
            && az_range[1] <= 2.0 * PI + eps;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "dome radius {radius}, az {az_range:?}, el {el_range:?}"
            )));
        }
        Ok(Self {
            center: [center.x, center.y, center.z],
            radius,
            az_range,
            el_range,
            tag,
        })
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }
}

/// A synthetic camera drawn from a dome.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPose {
    pub pose: CameraPose,
    pub source_dome: DomeTag,
    /// Sampled azimuth and elevation in radians.
    pub azimuth: f64,
    pub elevation: f64,
    pub synthetic: bool,
}
