use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use super::{quaternion_from_matrix, AxisAlignedBounds, Plane, Point3D, Ray};
use crate::error::{Error, Result};

const PARALLEL_EPS: f64 = 1e-12;
const FORWARD_EPS: f64 = 1e-9;

/// Intersection of `ray` with `plane` strictly in front of the origin.
pub fn ray_plane_intersect(ray: &Ray, plane: &Plane) -> Option<Vector3<f64>> {
    let denom = plane.normal.dot(&ray.direction);
    if denom.abs() < PARALLEL_EPS {
        return None;
    }
    let t = (plane.offset - plane.normal.dot(&ray.origin)) / denom;
    (t > FORWARD_EPS).then(|| ray.at(t))
}

pub fn scene_bounds(points: &[Point3D]) -> Result<AxisAlignedBounds> {
    let first = points
        .first()
        .ok_or(Error::EmptyInput("scene bounds of an empty point list"))?;
    let (min, max) = points.iter().fold(
        (first.position, first.position),
        |(lo, hi), p| (lo.inf(&p.position), hi.sup(&p.position)),
    );
    Ok(AxisAlignedBounds { min, max })
}

/// World-to-camera rotation for a camera looking along `forward` with
/// `up_hint` appearing towards the top of the image (camera +Y is down).
///
/// Falls back to `(1, 0, 0)` as the up hint when `forward` is parallel to it.
pub fn look_at_rotation(forward: &Vector3<f64>, up_hint: &Vector3<f64>) -> UnitQuaternion<f64> {
    let z = forward.normalize();
    let mut x = z.cross(up_hint);
    if x.norm() < 1e-9 {
        x = z.cross(&Vector3::x());
        if x.norm() < 1e-9 {
            x = z.cross(&Vector3::y());
        }
    }
    let x = x.normalize();
    let y = z.cross(&x);
    // Rows are the camera axes expressed in world coordinates.
    let m = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    quaternion_from_matrix(&m)
}
