//! ASCII mesh file format.
//!
//! ```text
//! equimesh 1
//! chart sphere                  # optional; catenoid carries its parameters
//! v x y z                       # vertices, 0-based implicit index
//! t i j k                       # triangles
//! b i j TAG                     # boundary edges, TAG in {D, N, R}
//! g i g11 g12 g22               # optional per-triangle metric override
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::{BoundaryEdge, BoundaryTag, Chart, SurfaceMesh};
use crate::error::{Error, Result};

pub fn write_mesh_string(mesh: &SurfaceMesh) -> String {
    let mut out = String::new();
    out.push_str("equimesh 1\n");
    match mesh.chart {
        Some(Chart::Sphere) => out.push_str("chart sphere\n"),
        Some(Chart::Catenoid { a, h, s }) => {
            let _ = writeln!(out, "chart catenoid {:.17e} {:.17e} {:.17e}", a, h, s);
        }
        Some(Chart::Disk) => out.push_str("chart disk\n"),
        Some(Chart::Plane) => out.push_str("chart plane\n"),
        None => {}
    }
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    for e in &mesh.boundary_edges {
        let _ = writeln!(out, "b {} {} {}", e.a, e.b, e.tag.letter());
    }
    if let Some(ov) = &mesh.metric_override {
        for (i, g) in ov.iter().enumerate() {
            let _ = writeln!(out, "g {} {:.17e} {:.17e} {:.17e}", i, g[0], g[1], g[2]);
        }
    }
    out
}

pub fn write_mesh(mesh: &SurfaceMesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn parse_mesh(text: &str) -> Result<SurfaceMesh> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty mesh file".into()))?
        .1
        .trim();
    if header != "equimesh 1" {
        return Err(Error::Format(format!(
            "expected header `equimesh 1`, found `{}`",
            header
        )));
    }
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut boundary_edges: Vec<BoundaryEdge> = Vec::new();
    let mut chart: Option<Chart> = None;
    let mut metric: Vec<(usize, [f64; 3])> = Vec::new();

    let bad = |lineno: usize, msg: &str| Error::Format(format!("line {}: {}", lineno + 1, msg));

    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let kind = it.next().unwrap();
        let rest: Vec<&str> = it.collect();
        match kind {
            "chart" => {
                chart = Some(match rest.first().copied() {
                    Some("sphere") => Chart::Sphere,
                    Some("disk") => Chart::Disk,
                    Some("plane") => Chart::Plane,
                    Some("catenoid") => {
                        if rest.len() != 4 {
                            return Err(bad(lineno, "chart catenoid needs a h s"));
                        }
                        let p: Vec<f64> = rest[1..]
                            .iter()
                            .map(|s| s.parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| bad(lineno, "bad catenoid parameters"))?;
                        Chart::Catenoid {
                            a: p[0],
                            h: p[1],
                            s: p[2],
                        }
                    }
                    _ => return Err(bad(lineno, "unknown chart")),
                });
            }
            "v" => {
                if rest.len() != 3 {
                    return Err(bad(lineno, "vertex needs 3 coordinates"));
                }
                let p: Vec<f64> = rest
                    .iter()
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(lineno, "bad vertex coordinate"))?;
                vertices.push(Vector3::new(p[0], p[1], p[2]));
            }
            "t" => {
                if rest.len() != 3 {
                    return Err(bad(lineno, "triangle needs 3 indices"));
                }
                let ix: Vec<usize> = rest
                    .iter()
                    .map(|s| s.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(lineno, "bad triangle index"))?;
                triangles.push([ix[0], ix[1], ix[2]]);
            }
            "b" => {
                if rest.len() != 3 {
                    return Err(bad(lineno, "boundary edge needs i j TAG"));
                }
                let a = rest[0]
                    .parse()
                    .map_err(|_| bad(lineno, "bad boundary index"))?;
                let b = rest[1]
                    .parse()
                    .map_err(|_| bad(lineno, "bad boundary index"))?;
                let tag = BoundaryTag::from_letter(
                    rest[2]
                        .chars()
                        .next()
                        .ok_or_else(|| bad(lineno, "missing tag"))?,
                )?;
                boundary_edges.push(BoundaryEdge { a, b, tag });
            }
            "g" => {
                if rest.len() != 4 {
                    return Err(bad(lineno, "metric line needs i g11 g12 g22"));
                }
                let i: usize = rest[0].parse().map_err(|_| bad(lineno, "bad index"))?;
                let g: Vec<f64> = rest[1..]
                    .iter()
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(lineno, "bad metric entry"))?;
                metric.push((i, [g[0], g[1], g[2]]));
            }
            other => return Err(bad(lineno, &format!("unknown record `{}`", other))),
        }
    }

    let metric_override = if metric.is_empty() {
        None
    } else {
        if metric.len() != triangles.len() {
            return Err(Error::Format(format!(
                "{} metric lines for {} triangles",
                metric.len(),
                triangles.len()
            )));
        }
        let mut ov = vec![[0.0; 3]; triangles.len()];
        for (i, g) in metric {
            if i >= triangles.len() {
                return Err(Error::Format(format!("metric index {} out of range", i)));
            }
            ov[i] = g;
        }
        Some(ov)
    };

    let mesh = SurfaceMesh {
        vertices,
        triangles,
        boundary_edges,
        chart,
        metric_override,
        level: 0,
    };
    mesh.validate()?;
    Ok(mesh)
}

pub fn read_mesh(path: &Path) -> Result<SurfaceMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};

    #[test]
    fn round_trip_preserves_everything() {
        for id in ["sphere_lune", "catenoid_K0", "unit_disk"] {
            let m = build_builtin(id, 1, &Params::default()).unwrap();
            let text = write_mesh_string(&m);
            let back = parse_mesh(&text).unwrap();
            assert_eq!(m.triangles, back.triangles);
            assert_eq!(m.boundary_edges.len(), back.boundary_edges.len());
            for (a, b) in m.vertices.iter().zip(&back.vertices) {
                assert_eq!(a, b);
            }
            assert_eq!(m.chart, back.chart);
        }
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse_mesh("").is_err());
        assert!(parse_mesh("equimesh 2\n").is_err());
        assert!(parse_mesh("equimesh 1\nv 0 0\n").is_err());
        assert!(parse_mesh("equimesh 1\nv 0 0 0\nt 0 1 2\n").is_err());
        assert!(parse_mesh("equimesh 1\nq 1 2 3\n").is_err());
    }
}
