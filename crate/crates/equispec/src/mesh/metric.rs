//! Per-triangle metric and conformal rescaling.

use super::{Coefficient, ProblemSpec, SurfaceMesh};
use crate::error::{Error, Result};

/// First fundamental form [g11, g12, g22] of triangle `t` in the reference
/// frame (e1, e2) = (v1 - v0, v2 - v0).
pub fn induced_metric(mesh: &SurfaceMesh, t: usize) -> Result<[f64; 3]> {
    if t >= mesh.triangles.len() {
        return Err(Error::InvalidInput(format!(
            "triangle index {} out of range {}",
            t,
            mesh.triangles.len()
        )));
    }
    if let Some(ov) = &mesh.metric_override {
        return Ok(ov[t]);
    }
    let [a, b, c] = mesh.triangles[t];
    let e1 = mesh.vertices[b] - mesh.vertices[a];
    let e2 = mesh.vertices[c] - mesh.vertices[a];
    let g = [e1.dot(&e1), e1.dot(&e2), e2.dot(&e2)];
    let det = g[0] * g[2] - g[1] * g[1];
    if det <= 0.0 || g[0] <= 0.0 {
        return Err(Error::InvalidMesh(format!(
            "triangle {} is degenerate (zero area)",
            t
        )));
    }
    Ok(g)
}

/// g -> rho^2 g (as a per-triangle override), q -> rho^-2 q, r -> rho^-1 r.
/// The per-triangle factor is the geometric mean of the vertex samples, so
/// applying rho and then 1/rho recovers the original problem exactly.
pub fn apply_conformal_change(problem: &ProblemSpec, rho: &[f64]) -> Result<ProblemSpec> {
    let mesh = &problem.mesh;
    if rho.len() != mesh.vertices.len() {
        return Err(Error::InvalidInput(format!(
            "conformal factor has {} samples for {} vertices",
            rho.len(),
            mesh.vertices.len()
        )));
    }
    if let Some((i, v)) = rho
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::InvalidInput(format!(
            "conformal factor must be strictly positive; sample {} is {}",
            i, v
        )));
    }

    let mut metric = Vec::with_capacity(mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let g = induced_metric(mesh, t)?;
        let [a, b, c] = mesh.triangles[t];
        let factor = (rho[a].ln() + rho[b].ln() + rho[c].ln()) / 3.0;
        let f2 = (2.0 * factor).exp();
        metric.push([f2 * g[0], f2 * g[1], f2 * g[2]]);
    }

    let q = problem.potential_samples()?;
    let r = problem.robin_samples()?;
    let q_new: Vec<f64> = q.iter().zip(rho).map(|(q, p)| q / (p * p)).collect();
    let r_new: Vec<f64> = r.iter().zip(rho).map(|(r, p)| r / p).collect();

    let conformal = match &problem.conformal_factor {
        None => rho.to_vec(),
        Some(prev) => prev.iter().zip(rho).map(|(a, b)| a * b).collect(),
    };

    let mut mesh_new = mesh.clone();
    mesh_new.metric_override = Some(metric);
    Ok(ProblemSpec {
        mesh: mesh_new,
        potential: Coefficient::Samples(q_new),
        robin_coefficient: Coefficient::Samples(r_new),
        boundary: problem.boundary.clone(),
        conformal_factor: Some(conformal),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};

    #[test]
    fn planar_right_triangle_metric_is_identity() {
        use nalgebra::Vector3;
        let mesh = SurfaceMesh {
            vertices: vec![
                Vector3::zeros(),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
            ],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![],
            chart: None,
            metric_override: None,
            level: 0,
        };
        let g = induced_metric(&mesh, 0).unwrap();
        assert_eq!(g, [1.0, 0.0, 1.0]);
    }

    #[test]
    fn catenoid_aligned_metric_matches_profile() {
        // a small triangle with legs along the (z, theta) coordinate
        // directions sees the analytic metric diag(cosh^2(a z - s), r(z)^2)
        use nalgebra::Vector3;
        let (a, s) = (2.3328f64, 1.4907f64);
        let zeta = 0.4;
        let theta = 0.3;
        let delta = 1e-4;
        let point = |zeta: f64, theta: f64| {
            let r = (a * zeta - s).cosh() / a;
            Vector3::new(r * theta.cos(), r * theta.sin(), zeta)
        };
        let mesh = SurfaceMesh {
            vertices: vec![
                point(zeta, theta),
                point(zeta + delta, theta),
                point(zeta, theta + delta),
            ],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![],
            chart: None,
            metric_override: None,
            level: 0,
        };
        let g = induced_metric(&mesh, 0).unwrap();
        let t = a * zeta - s;
        let cosh2 = t.cosh().powi(2);
        let r2 = (t.cosh() / a).powi(2);
        assert!((g[0] / (delta * delta) - cosh2).abs() < 1e-3 * cosh2);
        assert!((g[2] / (delta * delta) - r2).abs() < 1e-3 * r2);
        assert!(g[1].abs() / (delta * delta) < 1e-3);
    }

    #[test]
    fn constant_conformal_factor_scales_fields() {
        let mesh = build_builtin("unit_disk", 1, &Params::default()).unwrap();
        let n = mesh.vertices.len();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(1.0),
        );
        let scaled = p.apply_conformal_change(&vec![2.0; n]).unwrap();
        let g0 = induced_metric(&p.mesh, 0).unwrap();
        let g1 = induced_metric(&scaled.mesh, 0).unwrap();
        for k in 0..3 {
            assert!((g1[k] - 4.0 * g0[k]).abs() < 1e-12);
        }
        assert!((scaled.potential_samples().unwrap()[0] - 0.5).abs() < 1e-14);
        assert!((scaled.robin_samples().unwrap()[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn conformal_change_round_trips() {
        let mesh = build_builtin("sphere_octant", 2, &Params::default()).unwrap();
        let n = mesh.vertices.len();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let rho: Vec<f64> = (0..n).map(|i| 1.0 + 0.4 * ((i as f64) * 0.7).sin()).collect();
        let inv: Vec<f64> = rho.iter().map(|v| 1.0 / v).collect();
        let back = p
            .apply_conformal_change(&rho)
            .unwrap()
            .apply_conformal_change(&inv)
            .unwrap();
        for t in 0..p.mesh.n_triangles() {
            let g0 = induced_metric(&p.mesh, t).unwrap();
            let g1 = induced_metric(&back.mesh, t).unwrap();
            for k in 0..3 {
                assert!((g0[k] - g1[k]).abs() <= 1e-12 * g0[0].max(g0[2]));
            }
        }
        let q0 = p.potential_samples().unwrap();
        let q1 = back.potential_samples().unwrap();
        for (a, b) in q0.iter().zip(&q1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_triangle_is_rejected() {
        use nalgebra::Vector3;
        let mesh = SurfaceMesh {
            vertices: vec![
                Vector3::zeros(),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(2.0, 0.0, 0.0),
            ],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![],
            chart: None,
            metric_override: None,
            level: 0,
        };
        assert!(induced_metric(&mesh, 0).is_err());
        assert!(mesh.validate().is_err());
    }

    #[test]
    fn rejects_non_positive_rho() {
        let mesh = build_builtin("unit_disk", 0, &Params::default()).unwrap();
        let n = mesh.vertices.len();
        let p = ProblemSpec::laplacian(mesh);
        let mut rho = vec![1.0; n];
        rho[0] = 0.0;
        assert!(p.apply_conformal_change(&rho).is_err());
    }
}
