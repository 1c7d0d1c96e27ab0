//! DTU-style scan directories and the `clusters.json` manifest.
//!
//! Layout under the export root:
//!
//! ```text
//! clusters.json
//! scan_{i}/cams/{j:08}_cam.txt
//! scan_{i}/images/{j:08}.ppm      (only when a render was supplied)
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSet;
use crate::error::{Error, Result};
use crate::render::{render_file_name, NEAR_PLANE};
use crate::scene::{AxisAlignedBounds, CameraPose, Intrinsics, SceneModel};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "clusters.json";
/// Number of depth hypotheses spanning the scene bounds.
pub const DEPTH_HYPOTHESES: f64 = 192.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewSource {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewRecord {
    pub image_id: u32,
    pub source: ViewSource,
    /// Relative to the export root.
    pub cam: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRecord {
    pub id: usize,
    pub views: Vec<ViewRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub method: String,
    pub k: usize,
    pub scans: Vec<ScanRecord>,
}

pub fn cam_path(scan: usize, j: usize) -> String {
    format!("scan_{scan}/cams/{j:08}_cam.txt")
}

pub fn image_path(scan: usize, j: usize) -> String {
    format!("scan_{scan}/images/{j:08}.ppm")
}

impl Manifest {
    /// Scan `i` holds group `i`; view paths follow the export layout.
    pub fn from_groups(method: &str, k: usize, groups: &[Vec<u32>], source: ViewSource) -> Self {
        let scans = groups
            .iter()
            .enumerate()
            .map(|(id, members)| ScanRecord {
                id,
                views: members
                    .iter()
                    .enumerate()
                    .map(|(j, &image_id)| ViewRecord {
                        image_id,
                        source,
                        cam: cam_path(id, j),
                        image: None,
                    })
                    .collect(),
            })
            .collect();
        Self {
            version: MANIFEST_VERSION,
            method: method.to_string(),
            k,
            scans,
        }
    }

    pub fn from_cluster_set(cs: &ClusterSet) -> Self {
        let groups: Vec<Vec<u32>> = cs.clusters.iter().map(|c| c.members.clone()).collect();
        Self::from_groups(cs.method.manifest_label(), cs.config.k, &groups, ViewSource::Real)
    }

    /// Checks version, view counts, scan numbering and path layout.
    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::Format(format!("unsupported manifest version {}", self.version)));
        }
        for (i, scan) in self.scans.iter().enumerate() {
            if scan.id != i {
                return Err(Error::Format(format!("scan at position {i} has id {}", scan.id)));
            }
            if scan.views.len() != self.k {
                return Err(Error::Format(format!(
                    "scan {i} has {} views, manifest k is {}",
                    scan.views.len(),
                    self.k
                )));
            }
            for (j, v) in scan.views.iter().enumerate() {
                if v.cam != cam_path(i, j) {
                    return Err(Error::Format(format!("scan {i} view {j} cam path `{}`", v.cam)));
                }
                if let Some(img) = &v.image {
                    if *img != image_path(i, j) {
                        return Err(Error::Format(format!("scan {i} view {j} image path `{img}`")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Image ids per scan, in view order.
    pub fn groups(&self) -> Vec<Vec<u32>> {
        self.scans
            .iter()
            .map(|s| s.views.iter().map(|v| v.image_id).collect())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Parsed contents of a `cam.txt` file.
#[derive(Debug, Clone, PartialEq)]
pub struct CamFile {
    pub extrinsic: Matrix4<f64>,
    pub intrinsic: Matrix3<f64>,
    pub depth_min: f64,
    pub depth_interval: f64,
}

impl CamFile {
    pub fn rotation(&self) -> Matrix3<f64> {
        self.extrinsic.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.extrinsic.fixed_view::<3, 1>(0, 3).into_owned()
    }
}

/// `(depth_min, depth_interval)` for a camera viewing `bounds`.
pub fn depth_range(pose: &CameraPose, bounds: &AxisAlignedBounds) -> (f64, f64) {
    let half = bounds.half_diagonal();
    let dist = (pose.center() - bounds.center()).norm();
    ((dist - half).max(NEAR_PLANE), 2.0 * half / DEPTH_HYPOTHESES)
}

/// `cam.txt` text. Numbers use the shortest representation that parses back
/// to the same `f64`.
pub fn format_cam_txt(pose: &CameraPose, intr: &Intrinsics, bounds: &AxisAlignedBounds) -> String {
    let r = pose.rotation_matrix();
    let t = pose.translation;
    let k = intr.matrix();
    let (depth_min, depth_interval) = depth_range(pose, bounds);
    let mut s = String::from("extrinsic\n");
    for i in 0..3 {
        let _ = writeln!(s, "{} {} {} {}", r[(i, 0)], r[(i, 1)], r[(i, 2)], t[i]);
    }
    s.push_str("0 0 0 1\n\nintrinsic\n");
    for i in 0..3 {
        let _ = writeln!(s, "{} {} {}", k[(i, 0)], k[(i, 1)], k[(i, 2)]);
    }
    let _ = writeln!(s, "\n{depth_min} {depth_interval}");
    s
}

fn cam_err(line: usize, msg: impl Into<String>) -> Error {
    Error::parse("cam.txt", line, msg)
}

/// Non-blank, trimmed lines with 1-based line numbers.
struct CamLines<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
}

impl<'a> CamLines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .ok_or_else(|| cam_err(0, format!("unexpected end of file, expected {what}")))
    }

    fn header(&mut self, name: &str) -> Result<()> {
        match self.next_line(&format!("`{name}`"))? {
            (_, l) if l == name => Ok(()),
            (n, l) => Err(cam_err(n, format!("expected `{name}`, found `{l}`"))),
        }
    }

    fn numbers(&mut self, what: &str) -> Result<(usize, Vec<f64>)> {
        let (n, l) = self.next_line(what)?;
        let vals = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| cam_err(n, format!("bad number `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        Ok((n, vals))
    }

    fn row(&mut self, what: &str, cols: usize) -> Result<Vec<f64>> {
        let (n, vals) = self.numbers(what)?;
        if vals.len() != cols {
            return Err(cam_err(n, format!("{what} has {} values, expected {cols}", vals.len())));
        }
        Ok(vals)
    }
}

pub fn parse_cam_txt(bytes: &[u8]) -> Result<CamFile> {
    let text = std::str::from_utf8(bytes).map_err(|_| cam_err(0, "not UTF-8"))?;
    let mut lines = CamLines {
        inner: Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty()),
        ),
    };
    lines.header("extrinsic")?;
    let mut extrinsic = Matrix4::zeros();
    for i in 0..4 {
        for (j, v) in lines.row("extrinsic row", 4)?.into_iter().enumerate() {
            extrinsic[(i, j)] = v;
        }
    }
    lines.header("intrinsic")?;
    let mut intrinsic = Matrix3::zeros();
    for i in 0..3 {
        for (j, v) in lines.row("intrinsic row", 3)?.into_iter().enumerate() {
            intrinsic[(i, j)] = v;
        }
    }
    // Some writers append extra depth fields; only the first two are used.
    let (n, depth) = lines.numbers("depth range")?;
    if depth.len() < 2 {
        return Err(cam_err(n, "expected `depth_min depth_interval`"));
    }
    Ok(CamFile {
        extrinsic,
        intrinsic,
        depth_min: depth[0],
        depth_interval: depth[1],
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes one scan directory per manifest scan and the manifest itself.
///
/// Every view must exist in `scene`. When `renders` is given, a view whose
/// `{image_id:08}.ppm` exists there is copied into the scan and referenced
/// from the manifest. All inputs are checked before anything is written.
pub fn export_dtu(
    scene: &SceneModel,
    manifest: &Manifest,
    bounds: &AxisAlignedBounds,
    renders: Option<&Path>,
    out_dir: &Path,
) -> Result<Manifest> {
    manifest.validate()?;
    let mut out = manifest.clone();
    for scan in &mut out.scans {
        for (j, v) in scan.views.iter_mut().enumerate() {
            if scene.camera(v.image_id).is_none() {
                return Err(Error::Reference(format!(
                    "scan {} references missing image {}",
                    scan.id, v.image_id
                )));
            }
            v.image = renders
                .map(|dir| dir.join(render_file_name(v.image_id)))
                .filter(|p| p.is_file())
                .map(|_| image_path(scan.id, j));
        }
    }

    create_dir(out_dir)?;
    for scan in &out.scans {
        let root = out_dir.join(format!("scan_{}", scan.id));
        create_dir(&root.join("cams"))?;
        if scan.views.iter().any(|v| v.image.is_some()) {
            create_dir(&root.join("images"))?;
        }
        for v in &scan.views {
            let pose = &scene.cameras()[&v.image_id];
            let text = format_cam_txt(pose, scene.intrinsics_for(pose), bounds);
            let path = out_dir.join(&v.cam);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            if let (Some(dst), Some(dir)) = (&v.image, renders) {
                let src = dir.join(render_file_name(v.image_id));
                let dst = out_dir.join(dst);
                std::fs::copy(&src, &dst).map_err(|e| Error::io(&src, e))?;
            }
        }
    }
    out.write(&out_dir.join(MANIFEST_FILE))?;
    Ok(out)
}

/// A file move implied by renumbering scans during [`combine_manifests`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relocation {
    pub source: ViewSource,
    pub from: String,
    pub to: String,
}

/// Concatenates real scans then synthetic scans, renumbering scan ids from 0
/// and rewriting paths. Both manifests must share `k`.
pub fn combine_manifests(real: &Manifest, synthetic: &Manifest) -> Result<(Manifest, Vec<Relocation>)> {
    real.validate()?;
    synthetic.validate()?;
    if real.k != synthetic.k {
        return Err(Error::InvalidConfig(format!(
            "cannot combine manifests with k={} and k={}",
            real.k, synthetic.k
        )));
    }
    let mut scans = Vec::with_capacity(real.scans.len() + synthetic.scans.len());
    let mut moves = Vec::new();
    for (source, m) in [(ViewSource::Real, real), (ViewSource::Synthetic, synthetic)] {
        for scan in &m.scans {
            let id = scans.len();
            let views = scan
                .views
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let cam = cam_path(id, j);
                    moves.push(Relocation {
                        source,
                        from: v.cam.clone(),
                        to: cam.clone(),
                    });
                    let image = v.image.as_ref().map(|old| {
                        let new = image_path(id, j);
                        moves.push(Relocation {
                            source,
                            from: old.clone(),
                            to: new.clone(),
                        });
                        new
                    });
                    ViewRecord {
                        image_id: v.image_id,
                        source: v.source,
                        cam,
                        image,
                    }
                })
                .collect();
            scans.push(ScanRecord { id, views });
        }
    }
    let combined = Manifest {
        version: MANIFEST_VERSION,
        method: format!("{}+{}", real.method, synthetic.method),
        k: real.k,
        scans,
    };
    Ok((combined, moves))
}

/// Combines two exported trees into `out_dir`, copying every referenced file
/// to its renumbered location. Missing inputs are reported before writing.
pub fn combine_trees(real_root: &Path, synthetic_root: &Path, out_dir: &Path) -> Result<Manifest> {
    let real = Manifest::read(&real_root.join(MANIFEST_FILE))?;
    let synthetic = Manifest::read(&synthetic_root.join(MANIFEST_FILE))?;
    let (combined, moves) = combine_manifests(&real, &synthetic)?;
    let root_of = |s: ViewSource| match s {
        ViewSource::Real => real_root,
        ViewSource::Synthetic => synthetic_root,
    };
    for m in &moves {
        let src = root_of(m.source).join(&m.from);
        if !src.is_file() {
            return Err(Error::Reference(format!("missing exported file {}", src.display())));
        }
    }
    let mut dirs: BTreeSet<PathBuf> = BTreeSet::new();
    for m in &moves {
        let dst = out_dir.join(&m.to);
        if let Some(parent) = dst.parent() {
            if dirs.insert(parent.to_path_buf()) {
                create_dir(parent)?;
            }
        }
        let src = root_of(m.source).join(&m.from);
        std::fs::copy(&src, &dst).map_err(|e| Error::io(&src, e))?;
    }
    create_dir(out_dir)?;
    combined.write(&out_dir.join(MANIFEST_FILE))?;
    Ok(combined)
}
