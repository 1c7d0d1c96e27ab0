//! Brute-force reference implementations used as test oracles.
//!
//! These favor obviousness over speed: quadratic scans, repeated minimum
//! searches and union-find instead of the library's sorted and flood-fill
//! formulations. Geometric primitives (camera centers, optical axes, ray/plane
//! hits) come from the library; only the selection logic is re-derived.

#![allow(dead_code)]

use std::collections::BTreeSet;

use viewcurate::clustering::{ClusteringConfig, GroundHeight};
use viewcurate::sampling::{BinaryMask, Box2D};
use viewcurate::scene::ray_plane_intersect;
use viewcurate::{Plane, Point3D, SceneModel, Vector3};

/// `count[a][b]` = number of points whose track holds both `ids[a]` and `ids[b]`.
pub fn similarity(scene: &SceneModel) -> (Vec<u32>, Vec<Vec<u32>>) {
    let ids: Vec<u32> = scene.cameras().keys().copied().collect();
    let mut m = vec![vec![0u32; ids.len()]; ids.len()];
    for (a, ia) in ids.iter().enumerate() {
        for (b, ib) in ids.iter().enumerate() {
            m[a][b] = scene
                .points()
                .iter()
                .filter(|p| p.track.contains(ia) && p.track.contains(ib))
                .count() as u32;
        }
    }
    (ids, m)
}

fn num_clusters(cfg: &ClusteringConfig, n: usize) -> usize {
    cfg.num_clusters.unwrap_or((n / cfg.k).max(1))
}

pub fn sequence(scene: &SceneModel, k: usize) -> Vec<Vec<u32>> {
    let mut left: Vec<(usize, u32)> = scene
        .cameras()
        .values()
        .map(|c| (c.seq_index, c.image_id))
        .collect();
    let mut order = Vec::new();
    while !left.is_empty() {
        let i = (0..left.len()).min_by_key(|&i| left[i]).unwrap();
        order.push(left.remove(i).1);
    }
    let full = order.len() / k;
    (0..full).map(|c| order[c * k..(c + 1) * k].to_vec()).collect()
}

/// Repeatedly removes the candidate with the smallest `(key, id)`.
fn take_smallest(mut cands: Vec<(f64, u32)>, take: usize) -> Vec<u32> {
    let mut out = Vec::new();
    while out.len() < take && !cands.is_empty() {
        let mut best = 0;
        for i in 1..cands.len() {
            let (d, id) = cands[i];
            let (bd, bid) = cands[best];
            if d < bd || (d == bd && id < bid) {
                best = i;
            }
        }
        out.push(cands.remove(best).1);
    }
    out
}

/// Farthest-point order over `sites`, starting at the lowest id, maximizing
/// the minimum distance to all chosen sites (ties to the lowest id).
fn fps(sites: &[(u32, Vector3<f64>)], count: usize) -> Vec<usize> {
    let count = count.min(sites.len());
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < count {
        if chosen.is_empty() {
            let first = (0..sites.len()).min_by_key(|&i| sites[i].0).unwrap();
            chosen.push(first);
            continue;
        }
        let mut best: Option<(f64, u32, usize)> = None;
        for (i, (id, p)) in sites.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let d = chosen
                .iter()
                .map(|&c| (p - sites[c].1).norm())
                .fold(f64::INFINITY, f64::min);
            let better = match best {
                None => true,
                Some((bd, bid, _)) => d > bd || (d == bd && *id < bid),
            };
            if better {
                best = Some((d, *id, i));
            }
        }
        chosen.push(best.unwrap().2);
    }
    chosen
}

pub fn grid(scene: &SceneModel, cfg: &ClusteringConfig) -> Vec<Vec<u32>> {
    let cams: Vec<_> = scene.cameras().values().collect();
    let min_x = cams.iter().map(|c| c.center().x).fold(f64::INFINITY, f64::min);
    let max_x = cams.iter().map(|c| c.center().x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = cams.iter().map(|c| c.center().y).fold(f64::INFINITY, f64::min);
    let max_y = cams.iter().map(|c| c.center().y).fold(f64::NEG_INFINITY, f64::max);
    let (w, l) = (max_x - min_x, max_y - min_y);
    let cell = cfg
        .grid_cell_size
        .unwrap_or(if w.max(l) > 0.0 { w.max(l) / 10.0 } else { 1.0 });
    let cells = |e: f64| ((e / cell - 1e-9).ceil() as usize).max(1);
    let mut out = Vec::new();
    for row in 0..cells(l) {
        for col in 0..cells(w) {
            let cx = min_x + (col as f64 + 0.5) * cell;
            let cy = min_y + (row as f64 + 0.5) * cell;
            let dist = |c: &viewcurate::CameraPose| {
                let p = c.center();
                (p.x - cx).powi(2) + (p.y - cy).powi(2)
            };
            let ranked = take_smallest(cams.iter().map(|c| (dist(c), c.image_id)).collect(), cams.len());
            let anchor = scene.camera(ranked[0]).unwrap().optical_axis();
            let mut members = Vec::new();
            for id in ranked {
                let axis = scene.camera(id).unwrap().optical_axis();
                let ang = axis.dot(&anchor).clamp(-1.0, 1.0).acos().to_degrees();
                if ang <= cfg.angle_threshold_deg && members.len() < cfg.k {
                    members.push(id);
                }
            }
            if members.len() == cfg.k {
                out.push(members);
            }
        }
    }
    out
}

pub fn ground_height(points: &[Point3D]) -> f64 {
    let mut z: Vec<f64> = points.iter().map(|p| p.position.z).collect();
    z.sort_by(f64::total_cmp);
    let n = ((z.len() as f64 * 0.05).ceil() as usize).max(1);
    let low = &z[..n];
    if n % 2 == 1 {
        low[n / 2]
    } else {
        0.5 * (low[n / 2 - 1] + low[n / 2])
    }
}

pub fn ray(scene: &SceneModel, cfg: &ClusteringConfig) -> Vec<Vec<u32>> {
    let h = match cfg.ground_height {
        GroundHeight::Fixed(h) => h,
        GroundHeight::Estimate => ground_height(scene.points()),
    };
    let plane = Plane::horizontal(h);
    let feet: Vec<(u32, Vector3<f64>)> = scene
        .cameras()
        .values()
        .filter_map(|c| ray_plane_intersect(&c.optical_axis_ray(), &plane).map(|p| (c.image_id, p)))
        .collect();
    fps(&feet, num_clusters(cfg, scene.num_cameras()))
        .into_iter()
        .map(|ci| {
            let (cid, c) = feet[ci];
            let others = feet
                .iter()
                .filter(|(id, _)| *id != cid)
                .map(|(id, p)| ((p - c).norm_squared(), *id))
                .collect();
            let mut m = vec![cid];
            m.extend(take_smallest(others, cfg.k - 1));
            m
        })
        .collect()
}

pub fn sfm(scene: &SceneModel, cfg: &ClusteringConfig) -> Vec<Vec<u32>> {
    let (ids, sim) = similarity(scene);
    let sites: Vec<(u32, Vector3<f64>)> = scene
        .cameras()
        .values()
        .map(|c| (c.image_id, c.center()))
        .collect();
    fps(&sites, num_clusters(cfg, scene.num_cameras()))
        .into_iter()
        .map(|ci| {
            // Negated similarity so "smallest" means most shared points.
            let others = (0..ids.len())
                .filter(|&j| j != ci)
                .map(|j| (-f64::from(sim[ci][j]), ids[j]))
                .collect();
            let mut m = vec![ids[ci]];
            m.extend(take_smallest(others, cfg.k - 1));
            m
        })
        .collect()
}

/// Nearest-rank threshold for an integer percentile and the points at or
/// above it, in input order.
pub fn percentile_slice(points: &[Point3D], percentile: u32) -> (f64, Vec<Point3D>) {
    let n = points.len();
    // Smallest rank r with 100 r >= P n.
    let rank = ((percentile as usize * n).div_ceil(100)).max(1);
    let threshold = points
        .iter()
        .map(|p| p.position.z)
        .find(|&z| {
            let below = points.iter().filter(|q| q.position.z < z).count();
            let at_or_below = points.iter().filter(|q| q.position.z <= z).count();
            below < rank && at_or_below >= rank
        })
        .unwrap();
    let above = points.iter().filter(|p| p.position.z >= threshold).cloned().collect();
    (threshold, above)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

pub fn extract_boxes(mask: &BinaryMask, min_area: usize) -> Vec<Box2D> {
    let (w, h) = (mask.width, mask.height);
    let mut parent: Vec<usize> = (0..w * h).collect();
    for r in 0..h {
        for c in 0..w {
            if !mask.get(c, r) {
                continue;
            }
            if c + 1 < w && mask.get(c + 1, r) {
                let (a, b) = (find(&mut parent, r * w + c), find(&mut parent, r * w + c + 1));
                parent[a] = b;
            }
            if r + 1 < h && mask.get(c, r + 1) {
                let (a, b) = (find(&mut parent, r * w + c), find(&mut parent, (r + 1) * w + c));
                parent[a] = b;
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..w * h {
        if mask.bits[i] {
            let root = find(&mut parent, i);
            if !roots.contains(&root) {
                roots.push(root);
            }
        }
    }
    let mut boxes: Vec<Box2D> = Vec::new();
    for root in roots {
        let pix: Vec<(usize, usize)> = (0..w * h)
            .filter(|&i| mask.bits[i] && find(&mut parent, i) == root)
            .map(|i| (i % w, i / w))
            .collect();
        if pix.len() < min_area {
            continue;
        }
        let c0 = pix.iter().map(|p| p.0).min().unwrap();
        let c1 = pix.iter().map(|p| p.0).max().unwrap();
        let r0 = pix.iter().map(|p| p.1).min().unwrap();
        let r1 = pix.iter().map(|p| p.1).max().unwrap();
        boxes.push(Box2D::new(
            mask.pixel_to_world(c0 as f64, r0 as f64),
            mask.pixel_to_world((c1 + 1) as f64, (r1 + 1) as f64),
            0,
        ));
    }
    boxes.sort_by(|a, b| {
        (a.min[0], a.min[1], a.max[0], a.max[1])
            .partial_cmp(&(b.min[0], b.min[1], b.max[0], b.max[1]))
            .unwrap()
    });
    for (i, b) in boxes.iter_mut().enumerate() {
        b.member_ids = BTreeSet::from([i]);
    }
    boxes
}

pub fn merge_nearest_boxes(boxes: &[Box2D], m: usize) -> Vec<Box2D> {
    let orig: Vec<Box2D> = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| Box2D::new(b.min, b.max, i))
        .collect();
    let mut out = orig.clone();
    for (i, b) in orig.iter().enumerate() {
        let c = b.centroid();
        let cands = (0..orig.len())
            .filter(|&j| j != i)
            .map(|j| {
                let o = orig[j].centroid();
                ((o[0] - c[0]).powi(2) + (o[1] - c[1]).powi(2), j as u32)
            })
            .collect();
        let mut merged = b.clone();
        for j in take_smallest(cands, m) {
            let o = &orig[j as usize];
            merged = Box2D {
                min: [merged.min[0].min(o.min[0]), merged.min[1].min(o.min[1])],
                max: [merged.max[0].max(o.max[0]), merged.max[1].max(o.max[1])],
                member_ids: merged.member_ids.iter().chain(&o.member_ids).copied().collect(),
            };
            if !out.iter().any(|x| x.member_ids == merged.member_ids) {
                out.push(merged.clone());
            }
        }
    }
    out
}
