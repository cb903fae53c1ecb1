//! Scalar Jacobi fields induced by ambient rotations.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// kappa_xi(p) = <xi_hat x p, nu(p)> per vertex, with the vertex normal the
/// angle-weighted average of the incident triangle normals.  This is the
/// normal speed of the surface under rotation about the axis, hence a
/// discrete Jacobi field for stability problems with the natural Robin
/// condition.
pub fn killing_jacobi_field(mesh: &SurfaceMesh, axis: Vector3<f64>) -> Result<Vec<f64>> {
    let axis = axis
        .try_normalize(1e-14)
        .ok_or_else(|| Error::InvalidInput("rotation axis must be nonzero".into()))?;
    let normals = mesh.vertex_normals();
    Ok(mesh
        .vertices
        .iter()
        .zip(&normals)
        .map(|(p, nu)| axis.cross(p).dot(nu))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};

    #[test]
    fn axis_of_revolution_gives_the_zero_field() {
        let mesh = build_builtin("catenoid_K0", 2, &Params::default()).unwrap();
        let kappa = killing_jacobi_field(&mesh, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        for v in kappa {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_normals_are_radial_so_kappa_vanishes() {
        let mesh = build_builtin("full_sphere", 3, &Params::default()).unwrap();
        let kappa = killing_jacobi_field(&mesh, Vector3::new(1.0, 0.0, 0.0)).unwrap();
        for v in kappa {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn equatorial_axis_on_the_annulus_vanishes_on_its_plane() {
        // the field vanishes on the vertical plane containing the axis and
        // changes sign along the arc in the orthogonal plane
        let mesh = build_builtin("catenoid_K0", 3, &Params::default()).unwrap();
        let kappa = killing_jacobi_field(&mesh, Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let scale = kappa.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut signs_on_arc = Vec::new();
        for (v, p) in kappa.iter().zip(&mesh.vertices) {
            if p.y.abs() < 1e-12 {
                assert!(v.abs() < 1e-12 * scale.max(1.0), "on-plane value {}", v);
            }
            if p.x.abs() < 1e-12 && p.y > 0.0 {
                signs_on_arc.push((p.z, *v));
            }
        }
        signs_on_arc.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(signs_on_arc.len() >= 3);
        let first = signs_on_arc.first().unwrap().1;
        let last = signs_on_arc.last().unwrap().1;
        assert!(
            first * last < 0.0,
            "expected a sign change along the arc: {} .. {}",
            first,
            last
        );
    }

    #[test]
    fn zero_axis_rejected() {
        let mesh = build_builtin("unit_disk", 0, &Params::default()).unwrap();
        assert!(killing_jacobi_field(&mesh, Vector3::zeros()).is_err());
    }
}
