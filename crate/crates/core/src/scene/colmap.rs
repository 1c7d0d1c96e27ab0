//! COLMAP text model subset: `cameras.txt`, `images.txt`, `points3D.txt`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use super::{CameraPose, Intrinsics, Point3D, SceneModel};
use crate::error::{Error, Result};

const CAMERAS: &str = "cameras.txt";
const IMAGES: &str = "images.txt";
const POINTS: &str = "points3D.txt";

/// Parses the three text files of a sparse model.
///
/// Image rows get `seq_index` from their order in `images.txt`. Tracks are
/// deduplicated keeping first occurrence. When an image carries 2D
/// observations, each track element is checked against them.
pub fn parse_sfm_model<A: Read, B: Read, C: Read>(
    images_text: A,
    cameras_text: B,
    points_text: C,
) -> Result<SceneModel> {
    let intrinsics = parse_cameras(cameras_text)?;
    let (cameras, observations) = parse_images(images_text)?;
    if cameras.is_empty() {
        return Err(Error::EmptyModel);
    }
    for cam in &cameras {
        if !intrinsics.contains_key(&cam.intrinsics_id) {
            return Err(Error::Reference(format!(
                "image {} references missing camera {}",
                cam.image_id, cam.intrinsics_id
            )));
        }
    }
    let points = parse_points(points_text, &observations)?;
    SceneModel::new(cameras, intrinsics, points)
}

/// Reads `cameras.txt`, `images.txt` and `points3D.txt` from `dir`.
pub fn read_sfm_dir(dir: &Path) -> Result<SceneModel> {
    let open = |name: &str| {
        let path = dir.join(name);
        File::open(&path).map_err(|e| Error::io(path, e))
    };
    parse_sfm_model(open(IMAGES)?, open(CAMERAS)?, open(POINTS)?)
}

/// Writes the three text files into `dir` (created if missing).
pub fn write_sfm_dir(scene: &SceneModel, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&path, e))
    };
    write(CAMERAS, &|w| write_cameras_txt(scene, w))?;
    write(IMAGES, &|w| write_images_txt(scene, w))?;
    write(POINTS, &|w| write_points_txt(scene, w))?;
    Ok(())
}

pub fn write_cameras_txt(scene: &SceneModel, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "# Camera list with one line of data per camera:")?;
    writeln!(w, "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]")?;
    for (id, k) in scene.intrinsics() {
        writeln!(
            w,
            "{id} PINHOLE {} {} {} {} {} {}",
            k.width, k.height, k.fx, k.fy, k.cx, k.cy
        )?;
    }
    Ok(())
}

/// Images are written in `seq_index` order with empty observation lines.
pub fn write_images_txt(scene: &SceneModel, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "# Image list with two lines of data per image:")?;
    writeln!(
        w,
        "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME"
    )?;
    writeln!(w, "#   POINTS2D[] as (X, Y, POINT3D_ID)")?;
    let mut cams: Vec<&CameraPose> = scene.cameras().values().collect();
    cams.sort_by_key(|c| (c.seq_index, c.image_id));
    for c in cams {
        let q = c.rotation.quaternion();
        let t = &c.translation;
        writeln!(
            w,
            "{} {} {} {} {} {} {} {} {} {}",
            c.image_id, q.w, q.i, q.j, q.k, t.x, t.y, t.z, c.intrinsics_id, c.name
        )?;
        writeln!(w)?;
    }
    Ok(())
}

/// Track elements carry the running observation index per image.
pub fn write_points_txt(scene: &SceneModel, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "# 3D point list with one line of data per point:")?;
    writeln!(
        w,
        "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)"
    )?;
    let mut next_idx: HashMap<u32, usize> = HashMap::new();
    for p in scene.points() {
        let v = &p.position;
        write!(
            w,
            "{} {} {} {} {} {} {} 0",
            p.point_id, v.x, v.y, v.z, p.color[0], p.color[1], p.color[2]
        )?;
        for id in &p.track {
            let idx = next_idx.entry(*id).or_insert(0);
            write!(w, " {id} {idx}")?;
            *idx += 1;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn numbered_lines<R: Read>(
    file: &'static str,
    r: R,
) -> impl Iterator<Item = Result<(usize, String)>> {
    BufReader::new(r)
        .lines()
        .enumerate()
        .map(move |(i, l)| {
            l.map(|l| (i + 1, l))
                .map_err(|e| Error::parse(file, i + 1, e.to_string()))
        })
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim_start().starts_with('#')))
}

fn field<T: std::str::FromStr>(
    file: &'static str,
    line: usize,
    tok: &str,
    what: &str,
) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(file, line, format!("invalid {what} `{tok}`")))
}

fn parse_cameras<R: Read>(r: R) -> Result<BTreeMap<u32, Intrinsics>> {
    let mut out = BTreeMap::new();
    for item in numbered_lines(CAMERAS, r) {
        let (ln, line) = item?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 4 {
            return Err(Error::parse(CAMERAS, ln, "expected CAMERA_ID MODEL WIDTH HEIGHT PARAMS"));
        }
        let id: u32 = field(CAMERAS, ln, toks[0], "camera id")?;
        let width: u32 = field(CAMERAS, ln, toks[2], "width")?;
        let height: u32 = field(CAMERAS, ln, toks[3], "height")?;
        let params = toks[4..]
            .iter()
            .map(|t| field::<f64>(CAMERAS, ln, t, "parameter"))
            .collect::<Result<Vec<_>>>()?;
        let (fx, fy, cx, cy) = match (toks[1], params.as_slice()) {
            ("PINHOLE", &[fx, fy, cx, cy]) => (fx, fy, cx, cy),
            ("SIMPLE_PINHOLE", &[f, cx, cy]) => (f, f, cx, cy),
            ("PINHOLE" | "SIMPLE_PINHOLE", _) => {
                return Err(Error::parse(
                    CAMERAS,
                    ln,
                    format!("wrong parameter count {} for {}", params.len(), toks[1]),
                ))
            }
            (model, _) => {
                return Err(Error::parse(
                    CAMERAS,
                    ln,
                    format!("unsupported camera model `{model}`"),
                ))
            }
        };
        let k = Intrinsics::new(fx, fy, cx, cy, width, height)
            .map_err(|e| Error::parse(CAMERAS, ln, e.to_string()))?;
        if out.insert(id, k).is_some() {
            return Err(Error::parse(CAMERAS, ln, format!("duplicate camera id {id}")));
        }
    }
    Ok(out)
}

/// Per image: the POINT3D_ID of each 2D observation (-1 for unmatched).
type Observations = HashMap<u32, Vec<i64>>;

fn parse_images<R: Read>(r: R) -> Result<(Vec<CameraPose>, Observations)> {
    let mut cams = Vec::new();
    let mut obs = Observations::new();
    let mut lines = numbered_lines(IMAGES, r);
    while let Some(item) = lines.next() {
        let (ln, line) = item?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 10 {
            return Err(Error::parse(
                IMAGES,
                ln,
                format!("expected 10 fields, found {}", toks.len()),
            ));
        }
        let id: u32 = field(IMAGES, ln, toks[0], "image id")?;
        let mut nums = [0.0f64; 7];
        for (slot, tok) in nums.iter_mut().zip(&toks[1..8]) {
            *slot = field(IMAGES, ln, tok, "pose value")?;
        }
        let cam_id: u32 = field(IMAGES, ln, toks[8], "camera id")?;
        let name = toks[9..].join(" ");
        let pose = CameraPose::from_raw(
            id,
            [nums[0], nums[1], nums[2], nums[3]],
            [nums[4], nums[5], nums[6]],
            cam_id,
            name,
            cams.len(),
        )
        .map_err(|e| Error::parse(IMAGES, ln, e.to_string()))?;
        cams.push(pose);

        // The observation line may be empty or absent at end of file.
        let mut ids = Vec::new();
        if let Some(item) = lines.next() {
            let (ln2, line2) = item?;
            let toks: Vec<&str> = line2.split_whitespace().collect();
            if toks.len() % 3 != 0 {
                return Err(Error::parse(
                    IMAGES,
                    ln2,
                    "2D observations must be X Y POINT3D_ID triples",
                ));
            }
            for triple in toks.chunks(3) {
                let _: f64 = field(IMAGES, ln2, triple[0], "observation x")?;
                let _: f64 = field(IMAGES, ln2, triple[1], "observation y")?;
                ids.push(field::<i64>(IMAGES, ln2, triple[2], "point id")?);
            }
        }
        if obs.insert(id, ids).is_some() {
            return Err(Error::parse(IMAGES, ln, format!("duplicate image id {id}")));
        }
    }
    Ok((cams, obs))
}

fn parse_points<R: Read>(r: R, observations: &Observations) -> Result<Vec<Point3D>> {
    let mut out = Vec::new();
    for item in numbered_lines(POINTS, r) {
        let (ln, line) = item?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 8 || (toks.len() - 8) % 2 != 0 {
            return Err(Error::parse(
                POINTS,
                ln,
                "expected POINT3D_ID X Y Z R G B ERROR (IMAGE_ID POINT2D_IDX)*",
            ));
        }
        let id: u64 = field(POINTS, ln, toks[0], "point id")?;
        let x: f64 = field(POINTS, ln, toks[1], "x")?;
        let y: f64 = field(POINTS, ln, toks[2], "y")?;
        let z: f64 = field(POINTS, ln, toks[3], "z")?;
        let r: u8 = field(POINTS, ln, toks[4], "red")?;
        let g: u8 = field(POINTS, ln, toks[5], "green")?;
        let b: u8 = field(POINTS, ln, toks[6], "blue")?;
        let _: f64 = field(POINTS, ln, toks[7], "error")?;
        let mut track: Vec<u32> = Vec::new();
        for pair in toks[8..].chunks(2) {
            let image_id: u32 = field(POINTS, ln, pair[0], "image id")?;
            let idx: usize = field(POINTS, ln, pair[1], "point2D index")?;
            let Some(img_obs) = observations.get(&image_id) else {
                return Err(Error::Reference(format!(
                    "{POINTS} line {ln}: point {id} tracks missing image {image_id}"
                )));
            };
            if !img_obs.is_empty() {
                match img_obs.get(idx) {
                    Some(&pid) if pid == id as i64 => {}
                    _ => {
                        return Err(Error::Reference(format!(
                            "{POINTS} line {ln}: point {id} track element ({image_id}, {idx}) \
                             disagrees with the image's observations"
                        )))
                    }
                }
            }
            if !track.contains(&image_id) {
                track.push(image_id);
            }
        }
        out.push(Point3D {
            point_id: id,
            position: Vector3::new(x, y, z),
            color: [r, g, b],
            track,
        });
    }
    Ok(out)
}
