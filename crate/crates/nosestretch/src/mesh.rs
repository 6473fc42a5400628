//! Grid-function mesh JSON: `{format, version, domain, h, M, nodes: [[x, y, u], ...]}`.
//!
//! Node coordinates are redundant with `domain` and `h`; on load they must
//! match the regenerated grid, so a load followed by a save reproduces the
//! file byte for byte.

use std::path::Path;

use nosestretch_core::geometry::{Domain, DomainKind, GridFn};
use nosestretch_core::Vec2;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::format::{nums, read_file, to_json, write_file, Num};

pub const MESH_FORMAT: &str = "nosestretch-mesh";
pub const MESH_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn of(d: &Domain) -> DomainSpec {
        match &d.kind {
            DomainKind::Disk { center, radius } => DomainSpec::Disk { center: [center.x, center.y], radius: *radius },
            DomainKind::Polygon { vertices } => {
                DomainSpec::Polygon { vertices: vertices.iter().map(|v| [v.x, v.y]).collect() }
            }
        }
    }

    pub fn build(&self, h: f64) -> nosestretch_core::Result<Domain> {
        match self {
            DomainSpec::Disk { center, radius } => Domain::disk(Vec2::new(center[0], center[1]), *radius, h),
            DomainSpec::Polygon { vertices } => {
                Domain::polygon(vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(), h)
            }
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DomainOut {
    Disk { center: [Num; 2], radius: Num },
    Polygon { vertices: Vec<[Num; 2]> },
}

impl From<&DomainSpec> for DomainOut {
    fn from(d: &DomainSpec) -> Self {
        match d {
            DomainSpec::Disk { center, radius } => DomainOut::Disk { center: nums(*center), radius: Num(*radius) },
            DomainSpec::Polygon { vertices } => DomainOut::Polygon { vertices: vertices.iter().map(|v| nums(*v)).collect() },
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshIn {
    format: String,
    version: u32,
    domain: DomainSpec,
    h: f64,
    #[serde(rename = "M")]
    m: f64,
    nodes: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct MeshOut {
    format: &'static str,
    version: u32,
    domain: DomainOut,
    h: Num,
    #[serde(rename = "M")]
    m: Num,
    nodes: Vec<[Num; 3]>,
}

/// Mesh JSON text of a grid function.
pub fn mesh_to_string(u: &GridFn) -> CliResult<String> {
    let grid = u.grid();
    let out = MeshOut {
        format: MESH_FORMAT,
        version: MESH_VERSION,
        domain: (&DomainSpec::of(u.domain())).into(),
        h: Num(u.h()),
        m: Num(u.height_cap()),
        nodes: grid.nodes.iter().zip(u.values()).map(|(p, z)| nums([p.x, p.y, *z])).collect(),
    };
    to_json(&out)
}

/// Parse mesh JSON text. Schema problems are I/O errors (exit 3).
pub fn mesh_from_str(text: &str) -> CliResult<GridFn> {
    let schema = |m: String| CliError::Io(format!("mesh schema: {m}"));
    let m: MeshIn = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if m.format != MESH_FORMAT || m.version != MESH_VERSION {
        return Err(schema(format!("unsupported format {} v{}", m.format, m.version)));
    }
    let domain = m.domain.build(m.h).map_err(|e| schema(e.to_string()))?;
    let grid = domain.grid();
    if grid.len() != m.nodes.len() {
        return Err(schema(format!("{} nodes, grid has {}", m.nodes.len(), grid.len())));
    }
    let tol = 1e-9 * (1.0 + domain.diameter());
    for (i, (p, n)) in grid.nodes.iter().zip(&m.nodes).enumerate() {
        if (p.x - n[0]).abs() > tol || (p.y - n[1]).abs() > tol {
            return Err(schema(format!("node {i} at ({}, {}) is not grid node ({}, {})", n[0], n[1], p.x, p.y)));
        }
    }
    let values = m.nodes.iter().map(|n| n[2]).collect();
    Ok(GridFn::new(grid, values, m.m)?)
}

pub fn load_mesh(path: &Path) -> CliResult<GridFn> {
    mesh_from_str(&read_file(path)?).map_err(|e| match e {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save_mesh(path: &Path, u: &GridFn) -> CliResult<()> {
    write_file(path, &mesh_to_string(u)?)
}

/// Wavefront OBJ of the lower-hull surface of `u`.
pub fn obj_string(u: &GridFn) -> CliResult<String> {
    let surf = u.surface()?;
    let mut out = String::from("# lower hull surface\n");
    for p in &surf.points {
        let c = [p.x, p.y, p.z].map(crate::format::fmt17).into_iter().collect::<CliResult<Vec<_>>>()?;
        out.push_str(&format!("v {}\n", c.join(" ")));
    }
    for t in &surf.tris {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFn {
        let g = Domain::disk(Vec2::new(0.1, -0.2), 1.0, 0.25).unwrap().grid();
        GridFn::from_fn(g, 1.5, |p| 0.3 * p.x * p.x + p.y.abs() / 3.0).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = mesh_to_string(&sample()).unwrap();
        let u = mesh_from_str(&s).unwrap();
        assert_eq!(mesh_to_string(&u).unwrap(), s);
        assert_eq!(u.values(), sample().values());
    }

    #[test]
    fn schema_errors_are_io() {
        let s = mesh_to_string(&sample()).unwrap();
        let bad = s.replace("\"version\":1", "\"version\":2");
        assert!(matches!(mesh_from_str(&bad), Err(CliError::Io(_))));
        assert!(matches!(mesh_from_str("{"), Err(CliError::Io(_))));
        let moved = s.replacen("\"nodes\":[", "\"nodes\":[[9.0,9.0,0.0],", 1);
        assert!(matches!(mesh_from_str(&moved), Err(CliError::Io(_))));
    }
}
