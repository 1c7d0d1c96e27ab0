use crate::error::{Error, Result};
use crate::scene::{Plane, Point3D};

/// Largest accepted condition number of the horizontal normal matrix.
const MAX_CONDITION: f64 = 1e12;

/// Ordinary least squares fit of `z = a x + b y + c`, returned as a plane
/// with unit normal pointing up.
///
/// Coordinates are centered before solving; the fit is rejected when the
/// horizontal scatter matrix is singular or its condition number exceeds
/// 1e12 (collinear or vertical data).
pub fn fit_plane_lsq(points: &[Point3D]) -> Result<Plane> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 3", points.len())));
    }
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.position).sum::<nalgebra::Vector3<f64>>() / n;
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let d = p.position - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        sxz += d.x * d.z;
        syz += d.y * d.z;
    }
    let half_trace = 0.5 * (sxx + syy);
    let det = sxx * syy - sxy * sxy;
    let disc = (half_trace * half_trace - det).max(0.0).sqrt();
    let (lmax, lmin) = (half_trace + disc, half_trace - disc);
    if !(lmax > 0.0) || !(lmin > 0.0) || lmax / lmin > MAX_CONDITION || !(det > 0.0) {
        return Err(Error::DegenerateFit(
            "horizontal coordinates are collinear or coincident".into(),
        ));
    }
    let a = (syy * sxz - sxy * syz) / det;
    let b = (sxx * syz - sxy * sxz) / det;
    let c = mean.z - a * mean.x - b * mean.y;
    Ok(Plane::new(nalgebra::Vector3::new(-a, -b, 1.0), c))
}

/// Nearest-rank height percentile and the points at or above it.
///
/// The threshold is the `ceil(P / 100 * N)`-th smallest Z (1-based). The
/// returned points keep their input order.
pub fn percentile_slice(points: &[Point3D], percentile: f64) -> Result<(f64, Vec<Point3D>)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("percentile slice of an empty point list"));
    }
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::InvalidConfig(format!("percentile {percentile} outside (0, 100)")));
    }
    let mut zs: Vec<f64> = points.iter().map(|p| p.position.z).collect();
    zs.sort_by(f64::total_cmp);
    let n = zs.len();
    let rank = ((percentile * n as f64 / 100.0 - 1e-9).ceil() as usize).clamp(1, n);
    let threshold = zs[rank - 1];
    let above = points.iter().filter(|p| p.position.z >= threshold).cloned().collect();
    Ok((threshold, above))
}

#[cfg(test)]
mod tests {
    use nalgebra::Vector3;

    use super::*;

    fn pts(coords: &[[f64; 3]]) -> Vec<Point3D> {
        coords
            .iter()
            .enumerate()
            .map(|(i, c)| Point3D::new(i as u64, Vector3::from(*c)))
            .collect()
    }

    #[test]
    fn horizontal_plane() {
        let p = fit_plane_lsq(&pts(&[[0.0, 0.0, 5.0], [1.0, 0.0, 5.0], [0.0, 1.0, 5.0], [3.0, 2.0, 5.0]])).unwrap();
        assert!((p.normal - Vector3::z()).norm() < 1e-12);
        assert!((p.offset - 5.0).abs() < 1e-12);
    }

    #[test]
    fn slanted_plane_matches_normal_equations() {
        // z = x: normal (-1, 0, 1) / sqrt(2), offset 0.
        let p = fit_plane_lsq(&pts(&[[0.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [2.0, 3.0, 2.0]])).unwrap();
        let expected = Vector3::new(-1.0, 0.0, 1.0) / 2f64.sqrt();
        assert!((p.normal - expected).norm() < 1e-12);
        assert!(p.offset.abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let err = fit_plane_lsq(&pts(&[[0.0, 0.0, 0.0], [1.0, 1.0, 3.0], [2.0, 2.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
        assert!(fit_plane_lsq(&pts(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])).is_err());
    }

    #[test]
    fn nearest_rank_of_one_to_hundred() {
        let p: Vec<[f64; 3]> = (1..=100).map(|z| [0.0, 0.0, z as f64]).collect();
        let (t, above) = percentile_slice(&pts(&p), 90.0).unwrap();
        assert_eq!(t, 90.0);
        assert_eq!(above.len(), 11);
    }

    #[test]
    fn median_of_four() {
        let (t, above) = percentile_slice(&pts(&[[0.0, 0.0, 3.0], [0.0, 0.0, 1.0], [0.0, 0.0, 4.0], [0.0, 0.0, 2.0]]), 50.0).unwrap();
        assert_eq!(t, 2.0);
        let zs: Vec<f64> = above.iter().map(|p| p.position.z).collect();
        assert_eq!(zs, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn slice_errors() {
        assert!(matches!(percentile_slice(&[], 50.0), Err(Error::EmptyInput(_))));
        assert!(percentile_slice(&pts(&[[0.0; 3]]), 100.0).is_err());
    }
}
