//! ASCII PLY point clouds.
//!
//! Only the `vertex` element is read. It must carry `x`, `y` and `z`; `red`,
//! `green` and `blue` are optional and default to white. Other elements are
//! skipped according to their declared counts.

use serde::{Deserialize, Serialize};

use super::GeoError;
use crate::spatial::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub position: Vec3,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Renders the cloud as ASCII PLY with color properties.
    pub fn to_ply(&self) -> String {
        let mut out = format!(
            "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\n\
             property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
            self.points.len()
        );
        for p in &self.points {
            let v = p.position;
            out.push_str(&format!(
                "{} {} {} {} {} {}\n",
                v.x, v.y, v.z, p.color[0], p.color[1], p.color[2]
            ));
        }
        out
    }
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
}

fn err(line: usize, message: impl Into<String>) -> GeoError {
    GeoError::Ply {
        line,
        message: message.into(),
    }
}

pub fn load_point_cloud(ply_text: &str) -> Result<PointCloud, GeoError> {
    let mut lines = ply_text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(err(1, "missing 'ply' magic")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    loop {
        let Some((n, line)) = lines.next() else {
            return Err(err(0, "missing end_header"));
        };
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                match words.next() {
                    Some("ascii") => {}
                    Some(other) => return Err(GeoError::UnsupportedFormat(other.to_string())),
                    None => return Err(err(n, "format line without a format")),
                }
                if words.next() != Some("1.0") {
                    return Err(err(n, "only PLY 1.0 is supported"));
                }
                saw_format = true;
            }
            Some("element") => {
                let name = words.next().ok_or_else(|| err(n, "element without name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| err(n, "element count is not a non-negative integer"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| err(n, "property before any element"))?;
                let parts: Vec<&str> = words.collect();
                match parts.as_slice() {
                    ["list", _, _, name] => {
                        if el.name == "vertex" {
                            return Err(err(n, "list properties on vertices are not supported"));
                        }
                        el.properties.push(name.to_string());
                    }
                    [_, name] => el.properties.push(name.to_string()),
                    _ => return Err(err(n, "malformed property line")),
                }
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("end_header") => break,
            Some(other) => return Err(err(n, format!("unexpected header keyword {other:?}"))),
        }
    }
    if !saw_format {
        return Err(err(0, "missing format line"));
    }

    let vertex_index = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| err(0, "no vertex element"))?;
    let props = &elements[vertex_index].properties;
    let find = |name: &str| props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(err(0, "vertex element needs x, y and z")),
    };
    let color = (find("red"), find("green"), find("blue"));

    let mut data = lines.filter(|(_, l)| !l.is_empty());
    let mut points = Vec::with_capacity(elements[vertex_index].count);
    for (index, element) in elements.iter().enumerate() {
        for read in 0..element.count {
            let Some((n, line)) = data.next() else {
                return Err(GeoError::Truncated {
                    element: element.name.clone(),
                    declared: element.count,
                    found: read,
                });
            };
            if index != vertex_index {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != props.len() {
                return Err(err(n, format!("expected {} values, found {}", props.len(), fields.len())));
            }
            let coord = |i: usize| -> Result<f64, GeoError> {
                let v: f64 = fields[i].parse().map_err(|_| err(n, format!("bad number {:?}", fields[i])))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(n, "non-finite coordinate"))
                }
            };
            let channel = |i: Option<usize>| -> Result<u8, GeoError> {
                match i {
                    None => Ok(255),
                    Some(i) => fields[i].parse().map_err(|_| err(n, format!("bad color {:?}", fields[i]))),
                }
            };
            points.push(CloudPoint {
                position: Vec3::new(coord(ix)?, coord(iy)?, coord(iz)?),
                color: [channel(color.0)?, channel(color.1)?, channel(color.2)?],
            });
        }
    }
    if points.is_empty() {
        return Err(err(0, "point cloud has no vertices"));
    }
    Ok(PointCloud { points })
}
