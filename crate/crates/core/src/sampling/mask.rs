use std::io::Write;

use super::SamplingConfig;
use crate::error::{Error, Result};
use crate::scene::{AxisAlignedBounds, Point3D};

/// Top-down occupancy raster. Row 0 lies along the minimum-Y edge and column
/// 0 along the minimum-X edge; pixel `(col, row)` covers
/// `origin + [col, col + 1) * pixel_size` by `origin + [row, row + 1) * pixel_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    /// Row-major occupancy.
    pub bits: Vec<bool>,
    /// World XY of the pixel grid corner.
    pub origin: [f64; 2],
    /// Pixel edge length in meters.
    pub pixel_size: f64,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, origin: [f64; 2], pixel_size: f64) -> Self {
        assert!(pixel_size > 0.0, "pixel size must be positive");
        Self {
            width,
            height,
            bits: vec![false; width * height],
            origin,
            pixel_size,
        }
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        self.bits[row * self.width + col] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// World XY of the pixel grid line `(col, row)`.
    pub fn pixel_to_world(&self, col: f64, row: f64) -> [f64; 2] {
        [
            self.origin[0] + col * self.pixel_size,
            self.origin[1] + row * self.pixel_size,
        ]
    }

    /// Binary PGM (P5, maxval 255): 0 empty, 255 occupied.
    pub fn write_pgm(&self, w: &mut dyn Write) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        w.write_all(&bytes)
    }
}

/// Rasterizes `above` over the XY extent of `bounds` with square pixels, the
/// long side spanning `cfg.mask_resolution` pixels, then applies
/// `cfg.closing_iterations` of 3x3 morphological closing.
pub fn occupancy_mask(
    above: &[Point3D],
    bounds: &AxisAlignedBounds,
    cfg: &SamplingConfig,
) -> Result<BinaryMask> {
    if above.is_empty() {
        return Err(Error::EmptyInput("occupancy mask of an empty point set"));
    }
    if cfg.mask_resolution < 8 {
        return Err(Error::InvalidConfig(format!("mask resolution {} < 8", cfg.mask_resolution)));
    }
    let (w, l) = (bounds.width(), bounds.length());
    let long = w.max(l);
    let long = if long > 0.0 { long } else { 1.0 };
    let res = cfg.mask_resolution;
    let pixel = long / res as f64;
    let span = |e: f64| {
        if e >= long {
            res
        } else {
            ((e / pixel - 1e-9).ceil() as usize).clamp(1, res)
        }
    };
    let mut mask = BinaryMask::new(span(w), span(l), [bounds.min.x, bounds.min.y], pixel);
    for p in above {
        let (x, y) = (p.position.x, p.position.y);
        if !bounds.contains_xy(x, y) {
            continue;
        }
        let col = (((x - bounds.min.x) / pixel).floor() as usize).min(mask.width - 1);
        let row = (((y - bounds.min.y) / pixel).floor() as usize).min(mask.height - 1);
        mask.set(col, row, true);
    }
    Ok(morphological_closing(&mask, cfg.closing_iterations))
}

/// Dilation repeated `iterations` times followed by as many erosions, with a
/// 3x3 square structuring element. Pixels outside the raster count as set
/// during erosion, so closing never removes an occupied pixel.
pub fn morphological_closing(mask: &BinaryMask, iterations: usize) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..iterations {
        out = step(&out, false);
    }
    for _ in 0..iterations {
        out = step(&out, true);
    }
    out
}

fn step(mask: &BinaryMask, erode: bool) -> BinaryMask {
    let mut out = mask.clone();
    let (w, h) = (mask.width as isize, mask.height as isize);
    for row in 0..h {
        for col in 0..w {
            let mut acc = erode;
            'nbhd: for dr in -1..=1 {
                for dc in -1..=1 {
                    let (r, c) = (row + dr, col + dc);
                    let v = if r < 0 || c < 0 || r >= h || c >= w {
                        erode
                    } else {
                        mask.get(c as usize, r as usize)
                    };
                    if erode && !v {
                        acc = false;
                        break 'nbhd;
                    }
                    if !erode && v {
                        acc = true;
                        break 'nbhd;
                    }
                }
            }
            out.set(col as usize, row as usize, acc);
        }
    }
    out
}
