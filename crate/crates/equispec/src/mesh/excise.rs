//! Removal of small disks around interior points, with Dirichlet conditions
//! on the cut interface.

use nalgebra::Vector3;

use super::{BoundaryTag, SubmeshMap, SurfaceMesh};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ExciseOutcome {
    /// Parent indices of the removed triangles, per center.
    pub removed: Vec<Vec<usize>>,
    /// True when a requested excision removed nothing at this resolution.
    pub empty_excision: bool,
    /// Worst distance from a removed vertex to its center (the effective
    /// outer radius of the excised region).
    pub outer_radius: f64,
    pub map: SubmeshMap,
}

/// Remove all triangles whose vertices all lie within `radius` of one of the
/// `centers`; the interface edges produced by the cut are tagged Dirichlet.
/// Excisions must be pairwise disjoint and stay away from the existing
/// boundary.  Distances are ambient (chordal); the polygonal interface
/// carries an O(edge length) geometric error.
pub fn excise_disks(
    mesh: &SurfaceMesh,
    centers: &[Vector3<f64>],
    radius: f64,
) -> Result<(SurfaceMesh, ExciseOutcome)> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput("excision radius must be positive".into()));
    }
    if centers.is_empty() {
        return Err(Error::InvalidInput("no excision centers given".into()));
    }
    let on_boundary = {
        let mut flags = vec![false; mesh.vertices.len()];
        for e in &mesh.boundary_edges {
            flags[e.a] = true;
            flags[e.b] = true;
        }
        flags
    };
    let mut removed_by: Vec<Option<usize>> = vec![None; mesh.triangles.len()];
    let mut removed: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    let mut outer_radius = 0.0f64;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for (ci, c) in centers.iter().enumerate() {
            let inside = tri
                .iter()
                .all(|&v| (mesh.vertices[v] - c).norm() <= radius);
            if !inside {
                continue;
            }
            if let Some(prev) = removed_by[t] {
                return Err(Error::InvalidInput(format!(
                    "excisions {} and {} overlap at triangle {}",
                    prev, ci, t
                )));
            }
            if tri.iter().any(|&v| on_boundary[v]) {
                return Err(Error::InvalidInput(format!(
                    "excision {} touches the domain boundary at triangle {}",
                    ci, t
                )));
            }
            removed_by[t] = Some(ci);
            removed[ci].push(t);
            for &v in tri {
                outer_radius = outer_radius.max((mesh.vertices[v] - c).norm());
            }
        }
    }
    let empty_excision = removed.iter().any(|r| r.is_empty());
    let keep: Vec<usize> = (0..mesh.triangles.len())
        .filter(|&t| removed_by[t].is_none())
        .collect();
    let (sub, map) = mesh.submesh(&keep, BoundaryTag::Dirichlet)?;
    Ok((
        sub,
        ExciseOutcome {
            removed,
            empty_excision,
            outer_radius,
            map,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};

    #[test]
    fn tiny_radius_removes_nothing() {
        let m = build_builtin("unit_disk", 1, &Params::default()).unwrap();
        let (out, rep) = excise_disks(&m, &[Vector3::zeros()], 1e-6).unwrap();
        assert!(rep.empty_excision);
        assert_eq!(out.n_triangles(), m.n_triangles());
    }

    #[test]
    fn center_excision_makes_annulus_with_dirichlet_interface() {
        let m = build_builtin("unit_disk", 2, &Params::default()).unwrap();
        let (out, rep) = excise_disks(&m, &[Vector3::zeros()], 0.2).unwrap();
        assert!(!rep.empty_excision);
        assert!(out.n_triangles() < m.n_triangles());
        assert_eq!(
            rep.removed[0].len(),
            m.n_triangles() - out.n_triangles()
        );
        let dirichlet: Vec<_> = out
            .boundary_edges
            .iter()
            .filter(|e| e.tag == BoundaryTag::Dirichlet)
            .collect();
        assert!(!dirichlet.is_empty());
        // every removed vertex stays within the requested radius of its
        // center, so the excised region is sandwiched as intended
        assert!(rep.outer_radius <= 0.2 + 1e-12);
        // interface vertices are near the removal region
        for e in &dirichlet {
            assert!(out.vertices[e.a].norm() <= rep.outer_radius + 1e-12);
        }
        out.validate().unwrap();
    }

    #[test]
    fn antipodal_sphere_excisions_drop_euler_characteristic_by_two() {
        let m = build_builtin("full_sphere", 3, &Params::default()).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
        let centers = [Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, -1.0)];
        let (out, rep) = excise_disks(&m, &centers, 0.3).unwrap();
        assert!(!rep.empty_excision);
        assert_eq!(out.euler_characteristic(), 0);
        out.validate().unwrap();
    }

    #[test]
    fn overlapping_excisions_rejected() {
        let m = build_builtin("full_sphere", 3, &Params::default()).unwrap();
        let centers = [
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.0, 0.35, 0.93).normalize(),
        ];
        assert!(excise_disks(&m, &centers, 0.4).is_err());
    }

    #[test]
    fn boundary_touching_excision_rejected() {
        let m = build_builtin("unit_disk", 2, &Params::default()).unwrap();
        let c = Vector3::new(0.9, 0.0, 0.0);
        assert!(excise_disks(&m, &[c], 0.3).is_err());
    }
}
