//! OFF and OBJ mesh files and the `curves.json` boundary format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, ImmersedMesh, Result, Vec3};

/// Parses an OFF file. Polygonal faces are fan-triangulated.
pub fn parse_off(text: &str) -> Result<ImmersedMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
    let mut counts_inline = None;
    if let Some(rest) = header.strip_prefix("OFF") {
        if !rest.trim().is_empty() {
            counts_inline = Some((line, rest.trim().to_string()));
        }
    } else {
        return Err(Error::Parse { line, msg: "missing OFF header".into() });
    }
    let (line, counts) = match counts_inline {
        Some((l, c)) => (l, c),
        None => {
            let (l, c) = lines.next().ok_or(Error::Parse { line, msg: "missing counts".into() })?;
            (l, c.to_string())
        }
    };
    let nums = parse_numbers::<usize>(&counts, line)?;
    if nums.len() < 2 {
        return Err(Error::Parse { line, msg: "expected vertex and face counts".into() });
    }
    let (nv, nf) = (nums[0], nums[1]);

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or(Error::Parse { line, msg: "truncated vertex list".into() })?;
        let c = parse_numbers::<f64>(l, line)?;
        if c.len() < 3 {
            return Err(Error::Parse { line, msg: "vertex needs three coordinates".into() });
        }
        positions.push(Vec3::new(c[0], c[1], c[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, l) = lines.next().ok_or(Error::Parse { line, msg: "truncated face list".into() })?;
        let idx = parse_numbers::<usize>(l, line)?;
        let k = *idx.first().ok_or(Error::Parse { line, msg: "empty face".into() })?;
        if k < 3 || idx.len() < k + 1 {
            return Err(Error::Parse { line, msg: format!("face declares {k} vertices") });
        }
        let poly = &idx[1..=k];
        for i in 1..k - 1 {
            faces.push([poly[0], poly[i], poly[i + 1]]);
        }
    }
    ImmersedMesh::new(positions, faces)
}

/// Parses `v` and `f` records of an OBJ file; everything else is ignored.
pub fn parse_obj(text: &str) -> Result<ImmersedMesh> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        let mut it = l.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse().map_err(|_| Error::Parse { line, msg: format!("bad number '{t}'") }))
                    .collect::<Result<_>>()?;
                if c.len() < 3 {
                    return Err(Error::Parse { line, msg: "vertex needs three coordinates".into() });
                }
                positions.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let poly: Vec<usize> = it
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let v: i64 =
                            head.parse().map_err(|_| Error::Parse { line, msg: format!("bad index '{t}'") })?;
                        let resolved = if v > 0 { v - 1 } else { positions.len() as i64 + v };
                        usize::try_from(resolved).map_err(|_| Error::Parse { line, msg: format!("bad index '{t}'") })
                    })
                    .collect::<Result<_>>()?;
                if poly.len() < 3 {
                    return Err(Error::Parse { line, msg: "face needs three vertices".into() });
                }
                for i in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[i], poly[i + 1]]);
                }
            }
            _ => {}
        }
    }
    ImmersedMesh::new(positions, faces)
}

fn parse_numbers<T: std::str::FromStr>(l: &str, line: usize) -> Result<Vec<T>> {
    l.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("bad number '{t}'") }))
        .collect()
}

/// Serializes to OFF using shortest round-trip float formatting.
pub fn to_off(mesh: &ImmersedMesh) -> String {
    let mut s = String::with_capacity(32 * (mesh.vertex_count() + mesh.face_count()));
    s.push_str("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.vertex_count(), mesh.face_count());
    for p in mesh.positions() {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

/// Reads `.off` or `.obj` by extension.
pub fn read_mesh(path: &Path) -> Result<ImmersedMesh> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("obj") => parse_obj(&text),
        Some("off") => parse_off(&text),
        other => Err(Error::invalid(format!("unrecognized mesh extension {other:?}"))),
    }
}

pub fn write_off(mesh: &ImmersedMesh, path: &Path) -> Result<()> {
    fs::write(path, to_off(mesh))?;
    Ok(())
}

/// One closed boundary polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveComponent {
    pub name: String,
    pub points: Vec<[f64; 3]>,
}

impl CurveComponent {
    pub fn new(name: impl Into<String>, points: &[Vec3]) -> Self {
        CurveComponent { name: name.into(), points: points.iter().map(|p| [p.x, p.y, p.z]).collect() }
    }

    pub fn vectors(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect()
    }
}

/// `{"components": [{"name": …, "points": [[x, y, z], …]}, …]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSet {
    pub components: Vec<CurveComponent>,
}

impl CurveSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let set: CurveSet = serde_json::from_str(text)?;
        for c in &set.components {
            if c.points.len() < 3 {
                return Err(Error::invalid(format!("curve '{}' needs at least three points", c.name)));
            }
            if c.points.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("curve '{}' has non-finite coordinates", c.name)));
            }
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curves serialize")
    }

    pub fn read(path: &Path) -> Result<Self> {
        CurveSet::from_json(&fs::read_to_string(path)?)
    }

    pub fn polylines(&self) -> Vec<Vec<Vec3>> {
        self.components.iter().map(CurveComponent::vectors).collect()
    }
}
