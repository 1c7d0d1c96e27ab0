//! Z-buffered point splatting and PPM/PGM output.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::{CameraPose, Intrinsics, Point3D};

/// Points closer to the camera than this (meters) are culled.
pub const NEAR_PLANE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples.
    pub rgb: Vec<[u8; 3]>,
    /// Row-major camera-frame depth in meters, `+inf` where empty.
    pub depth: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            rgb: vec![[0, 0, 0]; width * height],
            depth: vec![f64::INFINITY; width * height],
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.rgb[y * self.width + x]
    }

    pub fn depth_at(&self, x: usize, y: usize) -> f64 {
        self.depth[y * self.width + x]
    }

    /// Fraction of pixels hit by at least one point.
    pub fn coverage(&self) -> f64 {
        let hit = self.depth.iter().filter(|d| d.is_finite()).count();
        hit as f64 / self.depth.len().max(1) as f64
    }
}

/// Renders `points` as `(2r+1)^2` pixel squares with a per-pixel depth test.
/// Equal depths resolve to the lower `point_id`, so the result does not depend
/// on point order.
pub fn splat_render(
    points: &[Point3D],
    pose: &CameraPose,
    intr: &Intrinsics,
    splat_radius_px: u32,
) -> ImageBuffer {
    let (w, h) = (intr.width as usize, intr.height as usize);
    let mut buf = ImageBuffer::new(w, h);
    let mut owner = vec![u64::MAX; w * h];
    let r = i64::from(splat_radius_px);
    let rot = pose.rotation_matrix();
    for p in points {
        let pc = rot * p.position + pose.translation;
        if !(pc.z > NEAR_PLANE) {
            continue;
        }
        let (u, v) = intr.project(&pc);
        if !(u.is_finite() && v.is_finite()) {
            continue;
        }
        let (px, py) = (u.floor() as i64, v.floor() as i64);
        if px + r < 0 || py + r < 0 || px - r >= w as i64 || py - r >= h as i64 {
            continue;
        }
        let (x0, x1) = ((px - r).max(0) as usize, ((px + r) as usize).min(w - 1));
        let (y0, y1) = ((py - r).max(0) as usize, ((py + r) as usize).min(h - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let i = y * w + x;
                let d = buf.depth[i];
                if pc.z < d || (pc.z == d && p.point_id < owner[i]) {
                    buf.depth[i] = pc.z;
                    buf.rgb[i] = p.color;
                    owner[i] = p.point_id;
                }
            }
        }
    }
    buf
}

/// File name of a color render for `image_id`.
pub fn render_file_name(image_id: u32) -> String {
    format!("{image_id:08}.ppm")
}

/// File name of a depth render for `image_id`.
pub fn render_depth_file_name(image_id: u32) -> String {
    format!("{image_id:08}_depth.pgm")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    Rgb,
    Depth,
}

/// Binary PPM (P6, maxval 255).
pub fn encode_ppm(buf: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", buf.width, buf.height).into_bytes();
    out.reserve(buf.rgb.len() * 3);
    for px in &buf.rgb {
        out.extend_from_slice(px);
    }
    out
}

/// Binary PGM (P5) mapping `[NEAR_PLANE, max finite depth]` linearly onto
/// `[0, 255]`; empty pixels are 255.
pub fn encode_depth_pgm(buf: &ImageBuffer) -> Vec<u8> {
    let far = buf
        .depth
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", buf.width, buf.height).into_bytes();
    out.extend(buf.depth.iter().map(|&d| {
        if !d.is_finite() {
            255
        } else if far > NEAR_PLANE {
            ((d - NEAR_PLANE) / (far - NEAR_PLANE) * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

pub fn write_image(buf: &ImageBuffer, kind: ImageKind, path: &Path) -> Result<()> {
    let bytes = match kind {
        ImageKind::Rgb => encode_ppm(buf),
        ImageKind::Depth => encode_depth_pgm(buf),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Decoded binary PNM raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pnm {
    pub width: usize,
    pub height: usize,
    /// 3 for P6, 1 for P5.
    pub channels: usize,
    pub data: Vec<u8>,
}

/// Parses binary P5/P6 with maxval 255.
pub fn parse_pnm(bytes: &[u8]) -> Result<Pnm> {
    let mut pos = 0;
    let mut next_token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PNM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let channels = match next_token()?.as_str() {
        "P6" => 3,
        "P5" => 1,
        other => return Err(Error::Format(format!("unsupported PNM magic `{other}`"))),
    };
    let num = |t: String| {
        t.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PNM header value `{t}`")))
    };
    let width = num(next_token()?)?;
    let height = num(next_token()?)?;
    let maxval = num(next_token()?)?;
    if maxval != 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let start = pos + 1;
    let len = width * height * channels;
    if bytes.len() < start + len {
        return Err(Error::Format("truncated PNM raster".into()));
    }
    Ok(Pnm {
        width,
        height,
        channels,
        data: bytes[start..start + len].to_vec(),
    })
}

/// Reads a P6 file into an RGB buffer with empty depth.
pub fn read_ppm(path: &Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let pnm = parse_pnm(&bytes)?;
    if pnm.channels != 3 {
        return Err(Error::Format(format!("{} is not a P6 image", path.display())));
    }
    let mut buf = ImageBuffer::new(pnm.width, pnm.height);
    for (px, c) in buf.rgb.iter_mut().zip(pnm.data.chunks_exact(3)) {
        *px = [c[0], c[1], c[2]];
    }
    Ok(buf)
}
