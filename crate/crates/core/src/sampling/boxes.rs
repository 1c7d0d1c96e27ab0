use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BinaryMask;
use crate::error::{Error, Result};

/// Axis-aligned world-XY box. `member_ids` are indices into the list the box
/// was detected in; merged boxes carry every constituent.
#[derive(Debug, Clone, PartialEq)]
pub struct Box2D {
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub member_ids: BTreeSet<usize>,
}

impl Box2D {
    pub fn new(min: [f64; 2], max: [f64; 2], member: usize) -> Self {
        Self {
            min,
            max,
            member_ids: BTreeSet::from([member]),
        }
    }

    pub fn centroid(&self) -> [f64; 2] {
        [0.5 * (self.min[0] + self.max[0]), 0.5 * (self.min[1] + self.max[1])]
    }

    pub fn diagonal(&self) -> f64 {
        (self.max[0] - self.min[0]).hypot(self.max[1] - self.min[1])
    }

    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }

    pub fn union(&self, other: &Box2D) -> Box2D {
        Box2D {
            min: [self.min[0].min(other.min[0]), self.min[1].min(other.min[1])],
            max: [self.max[0].max(other.max[0]), self.max[1].max(other.max[1])],
            member_ids: self.member_ids.union(&other.member_ids).copied().collect(),
        }
    }

    pub fn contains(&self, other: &Box2D) -> bool {
        (0..2).all(|i| self.min[i] <= other.min[i] && self.max[i] >= other.max[i])
    }

    pub fn iou(&self, other: &Box2D) -> f64 {
        let ix = (self.max[0].min(other.max[0]) - self.min[0].max(other.min[0])).max(0.0);
        let iy = (self.max[1].min(other.max[1]) - self.min[1].max(other.min[1])).max(0.0);
        let inter = ix * iy;
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }
}

/// Bounding boxes of the 4-connected components of `mask` with at least
/// `min_area` pixels, in world XY, sorted by `(min_x, min_y)`.
pub fn extract_boxes(mask: &BinaryMask, min_area: usize) -> Vec<Box2D> {
    let (w, h) = (mask.width, mask.height);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    // (area, col_min, row_min, col_max, row_max)
    let mut comps: Vec<(usize, usize, usize, usize, usize)> = Vec::new();
    for start in 0..w * h {
        if !mask.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut area, mut c0, mut r0, mut c1, mut r1) = (0, usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = stack.pop() {
            let (c, r) = (i % w, i / w);
            area += 1;
            c0 = c0.min(c);
            r0 = r0.min(r);
            c1 = c1.max(c);
            r1 = r1.max(r);
            let mut visit = |j: usize| {
                if mask.bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < w {
                visit(i + 1);
            }
            if r > 0 {
                visit(i - w);
            }
            if r + 1 < h {
                visit(i + w);
            }
        }
        comps.push((area, c0, r0, c1, r1));
    }
    let mut boxes: Vec<Box2D> = comps
        .into_iter()
        .filter(|c| c.0 >= min_area)
        .map(|(_, c0, r0, c1, r1)| {
            let min = mask.pixel_to_world(c0 as f64, r0 as f64);
            let max = mask.pixel_to_world((c1 + 1) as f64, (r1 + 1) as f64);
            Box2D::new(min, max, 0)
        })
        .collect();
    boxes.sort_by(|a, b| {
        a.min[0]
            .total_cmp(&b.min[0])
            .then(a.min[1].total_cmp(&b.min[1]))
            .then(a.max[0].total_cmp(&b.max[0]))
            .then(a.max[1].total_cmp(&b.max[1]))
    });
    for (i, b) in boxes.iter_mut().enumerate() {
        b.member_ids = BTreeSet::from([i]);
    }
    boxes
}

/// Adds, for every box, its unions with its 1..=m nearest neighbors by
/// centroid distance (ties by index). Merges whose member set already
/// appeared are skipped. Originals come first (with `member_ids` reset to
/// their index), then merges ordered by source box and neighbor count.
pub fn merge_nearest_boxes(boxes: &[Box2D], merge_m: usize) -> Vec<Box2D> {
    let originals: Vec<Box2D> = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| Box2D {
            member_ids: BTreeSet::from([i]),
            ..b.clone()
        })
        .collect();
    let mut out = originals.clone();
    let mut seen: BTreeSet<BTreeSet<usize>> = out.iter().map(|b| b.member_ids.clone()).collect();
    let reach = merge_m.min(boxes.len().saturating_sub(1));
    for (i, b) in originals.iter().enumerate() {
        let c = b.centroid();
        let mut order: Vec<(f64, usize)> = originals
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, o)| {
                let oc = o.centroid();
                ((oc[0] - c[0]).powi(2) + (oc[1] - c[1]).powi(2), j)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut merged = b.clone();
        for &(_, j) in order.iter().take(reach) {
            merged = merged.union(&originals[j]);
            if seen.insert(merged.member_ids.clone()) {
                out.push(merged.clone());
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct BoxesFile {
    boxes: Vec<BoxRecord>,
}

#[derive(Serialize, Deserialize)]
struct BoxRecord {
    min: [f64; 2],
    max: [f64; 2],
    members: Vec<usize>,
}

/// `{"boxes":[{"min":[x,y],"max":[x,y],"members":[...]}]}`
pub fn write_boxes_json(boxes: &[Box2D], path: &Path) -> Result<()> {
    let file = BoxesFile {
        boxes: boxes
            .iter()
            .map(|b| BoxRecord {
                min: b.min,
                max: b.max,
                members: b.member_ids.iter().copied().collect(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_boxes_json(path: &Path) -> Result<Vec<Box2D>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: BoxesFile = serde_json::from_str(&text)?;
    file.boxes
        .into_iter()
        .map(|r| {
            if r.members.is_empty() || r.min[0] > r.max[0] || r.min[1] > r.max[1] {
                return Err(Error::Format(format!("invalid box {:?}..{:?}", r.min, r.max)));
            }
            Ok(Box2D {
                min: r.min,
                max: r.max,
                member_ids: r.members.into_iter().collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(mask: &mut BinaryMask, c0: usize, r0: usize, w: usize, h: usize) {
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                mask.set(c, r, true);
            }
        }
    }

    #[test]
    fn two_blobs_two_boxes() {
        let mut m = BinaryMask::new(16, 16, [10.0, 20.0], 0.5);
        blob(&mut m, 1, 1, 3, 3);
        blob(&mut m, 8, 9, 3, 3);
        let boxes = extract_boxes(&m, 9);
        assert_eq!(boxes.len(), 2);
        assert_eq!(boxes[0].min, [10.5, 20.5]);
        assert_eq!(boxes[0].max, [12.0, 22.0]);
        assert_eq!(boxes[1].member_ids, BTreeSet::from([1]));
    }

    #[test]
    fn small_blob_dropped() {
        let mut m = BinaryMask::new(8, 8, [0.0, 0.0], 1.0);
        m.set(2, 2, true);
        assert!(extract_boxes(&m, 9).is_empty());
        assert_eq!(extract_boxes(&m, 1).len(), 1);
    }

    #[test]
    fn diagonal_pixels_are_separate_components() {
        let mut m = BinaryMask::new(4, 4, [0.0, 0.0], 1.0);
        m.set(1, 1, true);
        m.set(2, 2, true);
        assert_eq!(extract_boxes(&m, 1).len(), 2);
    }

    #[test]
    fn single_box_has_no_merges() {
        let b = vec![Box2D::new([0.0, 0.0], [1.0, 1.0], 0)];
        assert_eq!(merge_nearest_boxes(&b, 3), b);
    }

    #[test]
    fn symmetric_pair_dedups() {
        let b = vec![
            Box2D::new([0.0, 0.0], [1.0, 1.0], 0),
            Box2D::new([5.0, 0.0], [6.0, 2.0], 1),
        ];
        let out = merge_nearest_boxes(&b, 1);
        assert_eq!(out.len(), 3);
        assert_eq!(out[2].min, [0.0, 0.0]);
        assert_eq!(out[2].max, [6.0, 2.0]);
        assert_eq!(out[2].member_ids, BTreeSet::from([0, 1]));
    }

    #[test]
    fn iou_basics() {
        let a = Box2D::new([0.0, 0.0], [2.0, 2.0], 0);
        let b = Box2D::new([1.0, 0.0], [3.0, 2.0], 1);
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.iou(&a), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("boxes.json");
        let b = merge_nearest_boxes(
            &[Box2D::new([0.0, 0.0], [1.0, 1.0], 0), Box2D::new([2.0, 0.5], [3.0, 1.5], 1)],
            1,
        );
        write_boxes_json(&b, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"members\""));
        assert_eq!(read_boxes_json(&path).unwrap(), b);
    }
}
