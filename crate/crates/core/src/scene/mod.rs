//! Scene model: poses, intrinsics and tracked points, plus ingestion.
//!
//! Pose convention throughout the crate: `rotation` maps world to camera and
//! `x_cam = R * x_world + t`. The camera looks along its +Z axis with +X to the
//! right and +Y down in the image, as in COLMAP.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

mod colmap;
mod geometry;
mod ply;

pub use colmap::{
    parse_sfm_model, read_sfm_dir, write_cameras_txt, write_images_txt, write_points_txt,
    write_sfm_dir,
};
pub use geometry::{look_at_rotation, ray_plane_intersect, scene_bounds};
pub use ply::{parse_ply, write_ply};

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let ok = fx > 0.0
            && fy > 0.0
            && width >= 1
            && height >= 1
            && cx > 0.0
            && cx < f64::from(width)
            && cy > 0.0
            && cy < f64::from(height);
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "intrinsics fx={fx} fy={fy} cx={cx} cy={cy} size={width}x{height}"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Pixel coordinates of a camera-frame point. The caller is responsible for
    /// culling points with non-positive depth.
    #[inline]
    pub fn project(&self, p_cam: &Vector3<f64>) -> (f64, f64) {
        (
            self.fx * p_cam.x / p_cam.z + self.cx,
            self.fy * p_cam.y / p_cam.z + self.cy,
        )
    }

    #[inline]
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < f64::from(self.width) && v < f64::from(self.height)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub image_id: u32,
    /// World-to-camera rotation.
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
    pub intrinsics_id: u32,
    pub name: String,
    /// Capture order. Assigned from file order on ingestion.
    pub seq_index: usize,
}

impl CameraPose {
    /// Builds a pose from raw `(qw, qx, qy, qz)`. Quaternions already unit to
    /// within 1e-12 are kept bit-for-bit so text round trips are exact.
    pub fn from_raw(
        image_id: u32,
        q: [f64; 4],
        t: [f64; 3],
        intrinsics_id: u32,
        name: impl Into<String>,
        seq_index: usize,
    ) -> Result<Self> {
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        let norm = quat.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::Format(format!(
                "image {image_id}: quaternion has zero or non-finite norm"
            )));
        }
        let rotation = if (norm - 1.0).abs() < 1e-12 {
            UnitQuaternion::new_unchecked(quat)
        } else {
            UnitQuaternion::new_normalize(quat)
        };
        let translation = Vector3::new(t[0], t[1], t[2]);
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::Format(format!(
                "image {image_id}: non-finite translation"
            )));
        }
        Ok(Self {
            image_id,
            rotation,
            translation,
            intrinsics_id,
            name: name.into(),
            seq_index,
        })
    }

    /// Pose with camera center `center` and world-to-camera rotation `rotation`.
    pub fn from_center(
        image_id: u32,
        rotation: UnitQuaternion<f64>,
        center: Vector3<f64>,
        intrinsics_id: u32,
        name: impl Into<String>,
        seq_index: usize,
    ) -> Self {
        let translation = -(rotation * center);
        Self {
            image_id,
            rotation,
            translation,
            intrinsics_id,
            name: name.into(),
            seq_index,
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// Camera center `-R^T t`.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.inverse() * self.translation)
    }

    #[inline]
    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// World-frame viewing direction of the image center pixel.
    pub fn optical_axis(&self) -> Vector3<f64> {
        (self.rotation.inverse() * Vector3::z()).normalize()
    }

    pub fn optical_axis_ray(&self) -> Ray {
        Ray {
            origin: self.center(),
            direction: self.optical_axis(),
        }
    }
}

/// Free function form of [`CameraPose::center`].
pub fn camera_center(pose: &CameraPose) -> Vector3<f64> {
    pose.center()
}

/// Free function form of [`CameraPose::optical_axis_ray`].
pub fn optical_axis_ray(pose: &CameraPose) -> Ray {
    pose.optical_axis_ray()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point3D {
    pub point_id: u64,
    pub position: Vector3<f64>,
    pub color: [u8; 3],
    /// Image ids observing this point, without duplicates.
    pub track: Vec<u32>,
}

impl Point3D {
    pub const DEFAULT_COLOR: [u8; 3] = [128, 128, 128];

    pub fn new(point_id: u64, position: Vector3<f64>) -> Self {
        Self {
            point_id,
            position,
            color: Self::DEFAULT_COLOR,
            track: Vec::new(),
        }
    }
}

/// Which world axis points up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpAxis {
    PosX,
    NegX,
    PosY,
    NegY,
    #[default]
    PosZ,
    NegZ,
}

impl UpAxis {
    pub fn vector(self) -> Vector3<f64> {
        match self {
            UpAxis::PosX => Vector3::x(),
            UpAxis::NegX => -Vector3::x(),
            UpAxis::PosY => Vector3::y(),
            UpAxis::NegY => -Vector3::y(),
            UpAxis::PosZ => Vector3::z(),
            UpAxis::NegZ => -Vector3::z(),
        }
    }
}

impl std::str::FromStr for UpAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" | "+x" => UpAxis::PosX,
            "-x" => UpAxis::NegX,
            "y" | "+y" => UpAxis::PosY,
            "-y" => UpAxis::NegY,
            "z" | "+z" => UpAxis::PosZ,
            "-z" => UpAxis::NegZ,
            other => return Err(Error::InvalidConfig(format!("unknown up axis `{other}`"))),
        })
    }
}

/// Immutable input world: cameras keyed by image id, intrinsics and points.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneModel {
    cameras: BTreeMap<u32, CameraPose>,
    intrinsics: BTreeMap<u32, Intrinsics>,
    points: Vec<Point3D>,
    up_axis: UpAxis,
}

impl SceneModel {
    /// Validates cross references and track uniqueness.
    pub fn new(
        cameras: Vec<CameraPose>,
        intrinsics: BTreeMap<u32, Intrinsics>,
        points: Vec<Point3D>,
    ) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::EmptyModel);
        }
        let mut by_id = BTreeMap::new();
        for cam in cameras {
            if !intrinsics.contains_key(&cam.intrinsics_id) {
                return Err(Error::Reference(format!(
                    "image {} references missing camera {}",
                    cam.image_id, cam.intrinsics_id
                )));
            }
            let id = cam.image_id;
            if by_id.insert(id, cam).is_some() {
                return Err(Error::Reference(format!("duplicate image id {id}")));
            }
        }
        for p in &points {
            let mut seen = BTreeSet::new();
            for id in &p.track {
                if !by_id.contains_key(id) {
                    return Err(Error::Reference(format!(
                        "point {} tracks missing image {id}",
                        p.point_id
                    )));
                }
                if !seen.insert(*id) {
                    return Err(Error::Reference(format!(
                        "point {} tracks image {id} twice",
                        p.point_id
                    )));
                }
            }
        }
        Ok(Self {
            cameras: by_id,
            intrinsics,
            points,
            up_axis: UpAxis::default(),
        })
    }

    pub fn with_up_axis(mut self, up: UpAxis) -> Self {
        self.up_axis = up;
        self
    }

    pub fn cameras(&self) -> &BTreeMap<u32, CameraPose> {
        &self.cameras
    }

    pub fn camera(&self, image_id: u32) -> Option<&CameraPose> {
        self.cameras.get(&image_id)
    }

    pub fn intrinsics(&self) -> &BTreeMap<u32, Intrinsics> {
        &self.intrinsics
    }

    pub fn intrinsics_for(&self, pose: &CameraPose) -> &Intrinsics {
        // SceneModel::new guarantees the reference resolves.
        &self.intrinsics[&pose.intrinsics_id]
    }

    pub fn points(&self) -> &[Point3D] {
        &self.points
    }

    pub fn up_axis(&self) -> UpAxis {
        self.up_axis
    }

    pub fn num_cameras(&self) -> usize {
        self.cameras.len()
    }

    /// Applies the rigid world rotation `q` (x' = q x) to every pose and point.
    pub fn rotated(&self, q: &UnitQuaternion<f64>) -> Self {
        let cameras = self
            .cameras
            .iter()
            .map(|(&id, cam)| {
                let mut cam = cam.clone();
                cam.rotation = cam.rotation * q.inverse();
                (id, cam)
            })
            .collect();
        let points = self
            .points
            .iter()
            .map(|p| Point3D {
                position: q * p.position,
                ..p.clone()
            })
            .collect();
        Self {
            cameras,
            intrinsics: self.intrinsics.clone(),
            points,
            up_axis: self.up_axis,
        }
    }

    /// Rotates the model so its declared up axis becomes +Z.
    pub fn z_up(&self) -> Self {
        let up = self.up_axis.vector();
        let q = rotation_between(&up, &Vector3::z());
        let mut out = self.rotated(&q);
        out.up_axis = UpAxis::PosZ;
        out
    }

    /// Rotates the model to +Z up, then levels it so the plane fit to the
    /// lowest 5% of points has normal +Z.
    pub fn ground_aligned(&self) -> Result<Self> {
        let base = self.z_up();
        if base.points.is_empty() {
            return Err(Error::EmptyInput("ground alignment needs points"));
        }
        let lowest = lowest_fraction(&base.points, 0.05);
        let plane = crate::sampling::fit_plane_lsq(&lowest)?;
        let q = rotation_between(&plane.normal, &Vector3::z());
        let mut out = base.rotated(&q);
        out.up_axis = UpAxis::PosZ;
        Ok(out)
    }
}

fn rotation_between(from: &Vector3<f64>, to: &Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::rotation_between(from, to).unwrap_or_else(|| {
        // Antiparallel: any half turn about an axis orthogonal to `from`.
        let axis = if from.x.abs() < 0.9 {
            from.cross(&Vector3::x())
        } else {
            from.cross(&Vector3::y())
        };
        UnitQuaternion::from_axis_angle(
            &nalgebra::Unit::new_normalize(axis),
            std::f64::consts::PI,
        )
    })
}

/// The lowest `fraction` of points by Z (at least one), in ascending Z order.
pub fn lowest_fraction(points: &[Point3D], fraction: f64) -> Vec<Point3D> {
    let mut sorted: Vec<&Point3D> = points.iter().collect();
    sorted.sort_by(|a, b| a.position.z.total_cmp(&b.position.z));
    let n = ((points.len() as f64 * fraction).ceil() as usize).clamp(1, points.len().max(1));
    sorted.into_iter().take(n).cloned().collect()
}

/// Rotation matrix as a proper `Rotation3` (for quaternion conversion).
pub(crate) fn quaternion_from_matrix(m: &Matrix3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    /// Unit length.
    pub direction: Vector3<f64>,
}

impl Ray {
    pub fn new(origin: Vector3<f64>, direction: Vector3<f64>) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAlignedBounds {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl AxisAlignedBounds {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Result<Self> {
        if (0..3).any(|i| min[i] > max[i]) {
            return Err(Error::InvalidConfig(format!(
                "bounds min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn length(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn height(&self) -> f64 {
        self.max.z - self.min.z
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn half_diagonal(&self) -> f64 {
        (self.max - self.min).norm() * 0.5
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x >= self.min.x && x <= self.max.x && y >= self.min.y && y <= self.max.y
    }
}

/// Plane `normal . x = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Plane {
    /// Normalizes `normal` and scales `offset` accordingly.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Self {
        let n = normal.norm();
        Self {
            normal: normal / n,
            offset: offset / n,
        }
    }

    /// Horizontal plane `z = height`.
    pub fn horizontal(height: f64) -> Self {
        Self {
            normal: Vector3::z(),
            offset: height,
        }
    }

    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Moves `(x, y)` along Z onto the plane. Requires a non-vertical plane.
    pub fn lift_xy(&self, x: f64, y: f64) -> Vector3<f64> {
        let z = (self.offset - self.normal.x * x - self.normal.y * y) / self.normal.z;
        Vector3::new(x, y, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_pose(t: [f64; 3]) -> CameraPose {
        CameraPose::from_raw(1, [1.0, 0.0, 0.0, 0.0], t, 1, "a.jpg", 0).unwrap()
    }

    #[test]
    fn center_of_identity_pose() {
        assert_eq!(camera_center(&identity_pose([0.0; 3])), Vector3::zeros());
        assert_eq!(
            camera_center(&identity_pose([0.0, 0.0, -100.0])),
            Vector3::new(0.0, 0.0, 100.0)
        );
    }

    #[test]
    fn center_of_half_turn_about_x() {
        // R = diag(1, -1, -1): -R^T t with t = (0, 0, 100) is (0, 0, 100).
        let pose = CameraPose::from_raw(1, [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 100.0], 1, "a", 0)
            .unwrap();
        let c = pose.center();
        assert!((c - Vector3::new(0.0, 0.0, 100.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_optical_axis() {
        let r = optical_axis_ray(&identity_pose([0.0; 3]));
        assert_eq!(r.origin, Vector3::zeros());
        assert!((r.direction - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn nadir_optical_axis() {
        let rot = look_at_rotation(&-Vector3::z(), &Vector3::x());
        let pose = CameraPose::from_center(1, rot, Vector3::new(0.0, 0.0, 100.0), 1, "n", 0);
        let r = pose.optical_axis_ray();
        assert!((r.direction + Vector3::z()).norm() < 1e-12);
        assert!((r.origin - Vector3::new(0.0, 0.0, 100.0)).norm() < 1e-9);
    }

    #[test]
    fn quaternion_is_normalized() {
        let pose = CameraPose::from_raw(1, [2.0, 0.0, 0.0, 0.0], [0.0; 3], 1, "a", 0).unwrap();
        assert!((pose.rotation.quaternion().norm() - 1.0).abs() < 1e-12);
        assert!(CameraPose::from_raw(1, [0.0; 4], [0.0; 3], 1, "a", 0).is_err());
    }

    #[test]
    fn intrinsics_validation() {
        assert!(Intrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).is_ok());
        assert!(Intrinsics::new(0.0, 500.0, 320.0, 240.0, 640, 480).is_err());
        assert!(Intrinsics::new(500.0, 500.0, 640.0, 240.0, 640, 480).is_err());
    }

    #[test]
    fn scene_rejects_dangling_references() {
        let intr = BTreeMap::from([(1, Intrinsics::new(1.0, 1.0, 0.5, 0.5, 1, 1).unwrap())]);
        let mut cam = identity_pose([0.0; 3]);
        cam.intrinsics_id = 9;
        assert!(matches!(
            SceneModel::new(vec![cam], intr.clone(), vec![]),
            Err(Error::Reference(_))
        ));
        let mut p = Point3D::new(0, Vector3::zeros());
        p.track = vec![4];
        assert!(matches!(
            SceneModel::new(vec![identity_pose([0.0; 3])], intr.clone(), vec![p]),
            Err(Error::Reference(_))
        ));
        assert!(matches!(
            SceneModel::new(vec![], intr, vec![]),
            Err(Error::EmptyModel)
        ));
    }

    #[test]
    fn z_up_moves_declared_axis() {
        let intr = BTreeMap::from([(1, Intrinsics::new(1.0, 1.0, 0.5, 0.5, 1, 1).unwrap())]);
        let p = Point3D::new(0, Vector3::new(0.0, 5.0, 0.0));
        let scene = SceneModel::new(vec![identity_pose([0.0; 3])], intr, vec![p])
            .unwrap()
            .with_up_axis(UpAxis::PosY);
        let up = scene.z_up();
        assert!((up.points()[0].position - Vector3::new(0.0, 0.0, 5.0)).norm() < 1e-12);
        assert_eq!(up.up_axis(), UpAxis::PosZ);
    }

    #[test]
    fn ground_alignment_levels_tilted_floor() {
        let intr = BTreeMap::from([(1, Intrinsics::new(1.0, 1.0, 0.5, 0.5, 1, 1).unwrap())]);
        // Tilt about a diagonal so the lowest 5% forms a corner patch, not a row.
        let axis = nalgebra::Unit::new_normalize(Vector3::new(1.0, 2.0, 0.0));
        let tilt = UnitQuaternion::from_axis_angle(&axis, 0.2);
        let mut points = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                let p = Vector3::new(i as f64, j as f64, 0.0);
                points.push(Point3D::new(points.len() as u64, tilt * p));
            }
        }
        let scene = SceneModel::new(vec![identity_pose([0.0; 3])], intr, points).unwrap();
        let aligned = scene.ground_aligned().unwrap();
        let zs: Vec<f64> = aligned.points().iter().map(|p| p.position.z).collect();
        let spread = zs.iter().cloned().fold(f64::MIN, f64::max)
            - zs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-9, "spread {spread}");
    }
}
