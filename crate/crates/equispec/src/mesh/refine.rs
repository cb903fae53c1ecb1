//! Uniform midpoint refinement with chart reprojection.

use std::collections::HashMap;

use nalgebra::Vector3;

use super::{BoundaryEdge, Chart, SurfaceMesh};
use crate::error::{Error, Result};

/// How the refined vertex set relates to the coarse one: vertices
/// `0..parent_vertices` are unchanged, vertex `parent_vertices + k` is the
/// (reprojected) midpoint of coarse edge `midpoints[k]`.
#[derive(Clone, Debug)]
pub struct RefineMap {
    pub parent_vertices: usize,
    pub midpoints: Vec<(usize, usize)>,
}

fn project(chart: Chart, p: Vector3<f64>, on_boundary: bool) -> Vector3<f64> {
    match chart {
        Chart::Sphere => p / p.norm(),
        Chart::Catenoid { a, h, s } => {
            let zeta = p.z.abs().min(h);
            let r = (a * zeta - s).cosh() / a;
            let rho = (p.x * p.x + p.y * p.y).sqrt();
            if rho == 0.0 {
                return p;
            }
            Vector3::new(p.x * r / rho, p.y * r / rho, p.z.signum() * zeta)
        }
        Chart::Disk => {
            if on_boundary {
                let rho = (p.x * p.x + p.y * p.y).sqrt();
                Vector3::new(p.x / rho, p.y / rho, 0.0)
            } else {
                p
            }
        }
        Chart::Plane => p,
    }
}

/// Split every triangle into four by edge midpoints; midpoints land back on
/// the analytic chart when one is present, and boundary tags are inherited by
/// the child edges.
pub fn refine(mesh: &SurfaceMesh) -> Result<SurfaceMesh> {
    refine_with_map(mesh).map(|(m, _)| m)
}

pub fn refine_with_map(mesh: &SurfaceMesh) -> Result<(SurfaceMesh, RefineMap)> {
    if mesh.metric_override.is_some() {
        return Err(Error::InvalidInput(
            "refinement of a mesh with a metric override is not supported".into(),
        ));
    }
    let mut vertices = mesh.vertices.clone();
    let mut midpoint_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoints = Vec::new();

    let boundary_keys: std::collections::HashSet<(usize, usize)> = mesh
        .boundary_edges
        .iter()
        .map(|e| if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) })
        .collect();

    let mut midpoint = |a: usize,
                        b: usize,
                        vertices: &mut Vec<Vector3<f64>>,
                        midpoints: &mut Vec<(usize, usize)>|
     -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *midpoint_of.entry(key).or_insert_with(|| {
            let mut p = 0.5 * (vertices[a] + vertices[b]);
            if let Some(chart) = mesh.chart {
                p = project(chart, p, boundary_keys.contains(&key));
            }
            vertices.push(p);
            midpoints.push(key);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let [a, b, c] = *tri;
        let ab = midpoint(a, b, &mut vertices, &mut midpoints);
        let bc = midpoint(b, c, &mut vertices, &mut midpoints);
        let ca = midpoint(c, a, &mut vertices, &mut midpoints);
        triangles.push([a, ab, ca]);
        triangles.push([b, bc, ab]);
        triangles.push([c, ca, bc]);
        triangles.push([ab, bc, ca]);
    }

    // ordered as (first half, second half) per coarse boundary edge
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let key = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
        let m = midpoint_of[&key];
        boundary_edges.push(BoundaryEdge {
            a: e.a,
            b: m,
            tag: e.tag,
        });
        boundary_edges.push(BoundaryEdge {
            a: m,
            b: e.b,
            tag: e.tag,
        });
    }

    let fine = SurfaceMesh {
        vertices,
        triangles,
        boundary_edges,
        chart: mesh.chart,
        metric_override: None,
        level: mesh.level + 1,
    };
    Ok((
        fine,
        RefineMap {
            parent_vertices: mesh.vertices.len(),
            midpoints,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};

    #[test]
    fn sphere_midpoints_are_reprojected() {
        let m = build_builtin("full_sphere", 0, &Params::default()).unwrap();
        let (f, map) = refine_with_map(&m).unwrap();
        assert_eq!(map.parent_vertices, 6);
        for v in &f.vertices {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(f.n_triangles(), 32);
    }

    #[test]
    fn catenoid_midpoints_satisfy_profile() {
        let m = build_builtin("catenoid_K0", 0, &Params::default()).unwrap();
        let f = refine(&m).unwrap();
        let (a, s) = match f.chart {
            Some(Chart::Catenoid { a, s, .. }) => (a, s),
            _ => unreachable!(),
        };
        for v in &f.vertices {
            let r = (v.x * v.x + v.y * v.y).sqrt();
            assert!((r - (a * v.z - s).cosh() / a).abs() < 1e-12);
        }
    }

    #[test]
    fn refine_map_tracks_midpoints() {
        let m = build_builtin("unit_disk", 0, &Params::default()).unwrap();
        let (f, map) = refine_with_map(&m).unwrap();
        for (k, &(a, b)) in map.midpoints.iter().enumerate() {
            let v = f.vertices[map.parent_vertices + k];
            let mid = 0.5 * (m.vertices[a] + m.vertices[b]);
            // either the plain midpoint or its boundary reprojection
            assert!((v - mid).norm() < 1e-14 || (v.xy().norm() - 1.0).abs() < 1e-14);
        }
    }
}
