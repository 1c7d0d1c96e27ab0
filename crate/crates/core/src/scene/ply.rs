//! ASCII PLY point clouds (`vertex` element with `x y z [red green blue]`).

use std::io::Write;

use nalgebra::Vector3;

use super::Point3D;
use crate::error::{Error, Result};

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

/// Parses an ASCII PLY. Points get empty tracks, `point_id` = vertex index,
/// and mid-gray color when no color properties are present.
pub fn parse_ply(bytes: &[u8]) -> Result<Vec<Point3D>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("PLY is not UTF-8 text".into()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(Error::Format("missing `ply` magic".into()));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut ascii = false;
    loop {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format("header not terminated by end_header".into()))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", fmt, ..] => {
                if *fmt != "ascii" {
                    return Err(Error::Format(format!("unsupported PLY format `{fmt}`")));
                }
                ascii = true;
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| Error::Format(format!("bad element count `{count}`")))?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, name] | ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| Error::Format("property before any element".into()))?
                .properties
                .push(name.to_string()),
            _ => return Err(Error::Format(format!("unrecognized header line `{line}`"))),
        }
    }
    if !ascii {
        return Err(Error::Format("missing format line".into()));
    }

    let mut points = Vec::new();
    for el in &elements {
        if el.name != "vertex" {
            for i in 0..el.count {
                if lines.next().is_none() {
                    return Err(Error::Truncated {
                        element: el.name.clone(),
                        expected: el.count,
                        found: i,
                    });
                }
            }
            continue;
        }
        let pos = |name: &str| el.properties.iter().position(|p| p == name);
        let (Some(ix), Some(iy), Some(iz)) = (pos("x"), pos("y"), pos("z")) else {
            return Err(Error::Format("vertex element lacks x/y/z properties".into()));
        };
        let rgb = match (pos("red"), pos("green"), pos("blue")) {
            (Some(r), Some(g), Some(b)) => Some([r, g, b]),
            _ => None,
        };
        for i in 0..el.count {
            let Some(line) = lines.next() else {
                return Err(Error::Truncated {
                    element: "vertex".into(),
                    expected: el.count,
                    found: i,
                });
            };
            let vals = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Format(format!("vertex {i}: bad value `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() < el.properties.len() {
                return Err(Error::Format(format!(
                    "vertex {i}: expected {} values, found {}",
                    el.properties.len(),
                    vals.len()
                )));
            }
            let mut p = Point3D::new(i as u64, Vector3::new(vals[ix], vals[iy], vals[iz]));
            if let Some([r, g, b]) = rgb {
                p.color = [vals[r], vals[g], vals[b]].map(|c| c.round().clamp(0.0, 255.0) as u8);
            }
            points.push(p);
        }
    }
    if !elements.iter().any(|e| e.name == "vertex") {
        return Err(Error::Format("no vertex element".into()));
    }
    Ok(points)
}

pub fn write_ply(points: &[Point3D], w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", points.len())?;
    for p in ["x", "y", "z"] {
        writeln!(w, "property double {p}")?;
    }
    for p in ["red", "green", "blue"] {
        writeln!(w, "property uchar {p}")?;
    }
    writeln!(w, "end_header")?;
    for p in points {
        let v = &p.position;
        writeln!(
            w,
            "{} {} {} {} {} {}",
            v.x, v.y, v.z, p.color[0], p.color[1], p.color[2]
        )?;
    }
    Ok(())
}
